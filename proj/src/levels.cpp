// Copyright 2026 The granucount Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "granucount/levels.hpp"

#include <algorithm>
#include <set>

#include "granucount/error.hpp"

namespace granucount {
namespace {

constexpr std::array<std::string_view, 6> kLevelNames{"L1", "L2Size", "L2Color", "L3", "L4", "L5"};
constexpr std::array<std::string_view, 2> kRoleNames{"target", "distractor"};
constexpr std::array<std::string_view, 2> kConfigNames{"normal", "dense"};

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  throw Error(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

std::vector<InstanceTypeId> available_types(const AssetBank& bank, const SplitAssignment& splits, CategoryId c,
                                            Split s) {
  std::vector<InstanceTypeId> out;
  for (auto t : bank.category(c).instance_types) {
    if (!splits.assets_for(bank, t, s).empty()) out.push_back(t);
  }
  return out;
}

std::size_t types_needed(LevelTag level) {
  return level == LevelTag::L4 || level == LevelTag::L5 ? 2 : 1;
}

bool cross_category(LevelTag level) { return level == LevelTag::L3 || level == LevelTag::L5; }

std::vector<AssetId> choose_assets(const AssetBank& bank, const SplitAssignment& splits, const GroupSpec& g, Split s,
                                   Rng& rng) {
  // Every listed type is realised at least once; the rest are free draws.
  std::vector<InstanceTypeId> order(g.instance_types.begin(), g.instance_types.end());
  while (order.size() < static_cast<std::size_t>(g.count)) order.push_back(g.instance_types[rng.index(g.instance_types.size())]);
  rng.shuffle(std::span(order));
  std::vector<AssetId> out;
  out.reserve(order.size());
  for (auto t : order) {
    const auto pool = splits.assets_for(bank, t, s);
    out.push_back(pool[rng.index(pool.size())]);
  }
  return out;
}

Color random_color(Rng& rng) { return static_cast<Color>(rng.index(kPaletteSize)); }
SizeMode random_size(Rng& rng) { return rng.bernoulli(0.5) ? SizeMode::Large : SizeMode::Small; }

nlohmann::json constraint_json(const AttributeConstraint& a) {
  nlohmann::json j;
  j["size"] = a.size ? nlohmann::json(to_string(*a.size)) : nlohmann::json(nullptr);
  j["color"] = a.color ? nlohmann::json(to_string(*a.color)) : nlohmann::json(nullptr);
  return j;
}

AttributeConstraint constraint_from_json(const nlohmann::json& j) {
  AttributeConstraint a;
  if (!j.at("size").is_null()) a.size = size_mode_from_string(j.at("size").get<std::string>());
  if (!j.at("color").is_null()) a.color = color_from_string(j.at("color").get<std::string>());
  return a;
}

nlohmann::json group_json(const GroupSpec& g) {
  auto types = nlohmann::json::array();
  for (auto t : g.instance_types) types.push_back(t.value);
  return {{"role", to_string(g.role)},
          {"category", g.category.value},
          {"instance_types", types},
          {"attributes", constraint_json(g.attributes)},
          {"count", g.count}};
}

GroupSpec group_from_json(const nlohmann::json& j) {
  GroupSpec g;
  g.role = role_from_string(j.at("role").get<std::string>());
  g.category = CategoryId(j.at("category").get<std::uint32_t>());
  for (const auto& t : j.at("instance_types")) g.instance_types.emplace_back(t.get<std::uint32_t>());
  g.attributes = constraint_from_json(j.at("attributes"));
  g.count = j.at("count").get<int>();
  return g;
}

nlohmann::json box_json(const Box2i& b) { return {b.xmin, b.ymin, b.xmax, b.ymax}; }
Box2i box_from_json(const nlohmann::json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

}  // namespace

std::string_view to_string(LevelTag l) { return kLevelNames[static_cast<std::size_t>(l)]; }
LevelTag level_from_string(std::string_view s) { return parse_enum<LevelTag>(s, kLevelNames, "level"); }
std::string_view to_string(GroupRole r) { return kRoleNames[static_cast<std::size_t>(r)]; }
GroupRole role_from_string(std::string_view s) { return parse_enum<GroupRole>(s, kRoleNames, "group role"); }
std::string_view to_string(SceneConfig c) { return kConfigNames[static_cast<std::size_t>(c)]; }
SceneConfig config_from_string(std::string_view s) { return parse_enum<SceneConfig>(s, kConfigNames, "config"); }

ConfigProfile effective_profile(const ConfigProfile& profile, SceneConfig config, const DenseScaling& scaling) {
  return config == SceneConfig::Dense ? dense_variant(profile, scaling) : profile;
}

SceneRecipe compose_recipe(LevelTag level, const AssetBank& bank, const SplitAssignment& splits, Split target_split,
                           SceneConfig config, const ConfigProfile& profile, Rng& rng, CategoryUsage* usage,
                           const DenseScaling& scaling) {
  SceneRecipe r;
  r.level = level;
  r.split = target_split;
  r.config = config;
  r.profile_draw_seed = rng.next_u64();
  r.scene_seed = rng.next_u64();

  // Group sizes.
  const auto d = draw(effective_profile(profile, config, scaling), r.profile_draw_seed);
  const int min_group = d.min_objects_per_group();
  const int max_total = std::min(d.max_total_objects(), kMaxInstances);
  int target_count = 0, distractor_count = 0;
  if (!has_distractor(level)) {
    if (min_group > max_total) {
      throw Error("compose_recipe: profile infeasible: min_objects_per_group " + std::to_string(min_group) +
                  " exceeds max_total_objects " + std::to_string(max_total));
    }
    target_count = static_cast<int>(rng.uniform_int(min_group, max_total));
  } else {
    // A draw whose per-group floor does not fit twice under the total is
    // clamped to the largest even split.
    const int hi = max_total / 2;
    const int lo = std::min(level == LevelTag::L5 ? std::max(min_group, 2) : min_group, hi);
    if (lo < (level == LevelTag::L5 ? 2 : 1)) {
      throw Error("compose_recipe: profile infeasible: two groups of at least " + std::to_string(lo) +
                  " exceed max_total_objects " + std::to_string(max_total));
    }
    do {
      target_count = static_cast<int>(rng.uniform_int(lo, hi));
      distractor_count = static_cast<int>(rng.uniform_int(lo, hi));
    } while (target_count + distractor_count > max_total || target_count + distractor_count > kMaxInstances);
  }

  const auto backgrounds = splits.backgrounds_for(target_split);
  if (backgrounds.empty()) throw Error("compose_recipe: no background available for split " + std::string(to_string(target_split)));
  r.background = backgrounds[rng.index(backgrounds.size())];

  // Categories able to host the level in this split.
  const std::size_t need = types_needed(level);
  std::vector<std::vector<InstanceTypeId>> avail(bank.categories.size());
  std::vector<bool> usable(bank.categories.size(), false);
  for (const auto& c : bank.categories) {
    avail[c.id.value] = available_types(bank, splits, c.id, target_split);
    usable[c.id.value] = avail[c.id.value].size() >= need;
  }
  auto partners = [&](CategoryId c) {
    std::vector<CategoryId> out;
    for (const auto& other : bank.categories) {
      if (other.id != c && usable[other.id.value] && other.super_category == bank.category(c).super_category) {
        out.push_back(other.id);
      }
    }
    return out;
  };
  std::vector<CategoryId> eligible;
  for (const auto& c : bank.categories) {
    if (usable[c.id.value] && (!cross_category(level) || !partners(c.id).empty())) eligible.push_back(c.id);
  }
  if (eligible.empty()) {
    throw Error("compose_recipe: no category in split " + std::string(to_string(target_split)) + " supports level " +
                std::string(to_string(level)) + " (needs " + std::to_string(need) + " instance type(s) per category" +
                (cross_category(level) ? " and a second such category in the same super-category)" : ")"));
  }
  const CategoryId target_cat = usage ? sample_category(bank, *usage, rng, std::span<const CategoryId>(eligible)).id
                                      : eligible[rng.index(eligible.size())];

  GroupSpec& t = r.target;
  t.role = GroupRole::Target;
  t.category = target_cat;
  t.count = target_count;

  auto pick_types = [&](CategoryId c, std::size_t k) {
    auto pool = avail[c.value];
    rng.shuffle(std::span(pool));
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
  };

  if (level == LevelTag::L1) {
    t.instance_types = pick_types(target_cat, 1);
    t.attributes = {random_size(rng), random_color(rng)};
  } else {
    GroupSpec dgroup;
    dgroup.role = GroupRole::Distractor;
    dgroup.count = distractor_count;
    switch (level) {
      case LevelTag::L2Size:
      case LevelTag::L2Color: {
        dgroup.category = target_cat;
        t.instance_types = pick_types(target_cat, 1);
        dgroup.instance_types = t.instance_types;
        if (level == LevelTag::L2Size) {
          const Color shared = random_color(rng);
          const SizeMode mine = random_size(rng);
          t.attributes = {mine, shared};
          dgroup.attributes = {mine == SizeMode::Small ? SizeMode::Large : SizeMode::Small, shared};
        } else {
          const SizeMode shared = random_size(rng);
          const Color mine = random_color(rng);
          Color other = random_color(rng);
          while (other == mine) other = random_color(rng);
          t.attributes = {shared, mine};
          dgroup.attributes = {shared, other};
        }
        break;
      }
      case LevelTag::L4: {
        dgroup.category = target_cat;
        auto two = avail[target_cat.value];
        rng.shuffle(std::span(two));
        t.instance_types = {two[0]};
        dgroup.instance_types = {two[1]};
        break;
      }
      case LevelTag::L3:
      case LevelTag::L5: {
        const auto mates = partners(target_cat);
        dgroup.category = mates[rng.index(mates.size())];
        auto span_types = [&](CategoryId c, int count) -> std::size_t {
          if (level == LevelTag::L3) return 1;
          const auto hi = std::min<std::size_t>(avail[c.value].size(), static_cast<std::size_t>(count));
          return static_cast<std::size_t>(rng.uniform_int(2, static_cast<std::int64_t>(hi)));
        };
        t.instance_types = pick_types(target_cat, span_types(target_cat, t.count));
        dgroup.instance_types = pick_types(dgroup.category, span_types(dgroup.category, dgroup.count));
        break;
      }
      case LevelTag::L1:
        break;
    }
    r.distractor = std::move(dgroup);
  }

  r.asset_choices[0] = choose_assets(bank, splits, r.target, target_split, rng);
  if (r.distractor) r.asset_choices[1] = choose_assets(bank, splits, *r.distractor, target_split, rng);

  if (usage) {
    ++(*usage)[target_cat.value];
    if (r.distractor && r.distractor->category != target_cat) ++(*usage)[r.distractor->category.value];
  }
  return r;
}

RecipeCheck recipe_valid(const SceneRecipe& recipe, const AssetBank& bank, const SplitAssignment& splits) {
  RecipeCheck out;
  auto fail = [&](std::string code, std::string msg) {
    out.ok = false;
    out.violations.push_back({std::move(code), std::move(msg)});
  };
  const LevelTag level = recipe.level;

  auto check_group = [&](const GroupSpec& g, GroupRole expected, const std::vector<AssetId>& assets) {
    const std::string tag(to_string(expected));
    if (g.role != expected) fail("role", tag + " group carries the wrong role");
    if (g.count < 1) fail("count", tag + " group is empty");
    if (g.category.value >= bank.categories.size()) {
      fail("category", tag + " group references an unknown category");
      return;
    }
    if (g.instance_types.empty()) fail("instance_type", tag + " group lists no instance type");
    if (!std::is_sorted(g.instance_types.begin(), g.instance_types.end()) ||
        std::adjacent_find(g.instance_types.begin(), g.instance_types.end()) != g.instance_types.end()) {
      fail("instance_type", tag + " group instance types are not a sorted set");
    }
    for (auto t : g.instance_types) {
      if (t.value >= bank.instance_types.size() || bank.instance_type(t).category != g.category) {
        fail("instance_type", tag + " group instance type " + std::to_string(t.value) + " is outside its category");
      }
    }
    if (static_cast<int>(assets.size()) != g.count) {
      fail("asset", tag + " group has " + std::to_string(assets.size()) + " asset choices for " +
                        std::to_string(g.count) + " instances");
    }
    std::set<InstanceTypeId> used;
    for (auto a : assets) {
      if (a.value >= bank.assets.size()) {
        fail("asset", tag + " group references an unknown asset");
        continue;
      }
      const auto type = bank.asset(a).instance_type;
      used.insert(type);
      if (!std::binary_search(g.instance_types.begin(), g.instance_types.end(), type)) {
        fail("asset", tag + " asset " + std::to_string(a.value) + " is not of a listed instance type");
      }
      if (a.value < splits.asset_split.size() && splits.asset_split[a.value] != recipe.split) {
        fail("split", tag + " asset " + std::to_string(a.value) + " belongs to split " +
                          std::string(to_string(splits.asset_split[a.value])));
      }
    }
    if (used.size() != g.instance_types.size()) fail("instance_type", tag + " group does not realise every listed instance type");
  };

  check_group(recipe.target, GroupRole::Target, recipe.asset_choices[0]);
  if (recipe.distractor) check_group(*recipe.distractor, GroupRole::Distractor, recipe.asset_choices[1]);
  if (recipe.total_count() > kMaxInstances) {
    fail("cap", "total of " + std::to_string(recipe.total_count()) + " instances exceeds " + std::to_string(kMaxInstances));
  }
  if (recipe.background.value >= bank.backgrounds.size()) {
    fail("background", "unknown background");
  } else if (recipe.background.value < splits.background_split.size()) {
    const auto want = recipe.split == Split::Train ? BackgroundSplit::Train : BackgroundSplit::Test;
    if (splits.background_split[recipe.background.value] != want) fail("background", "background from the wrong split");
  }
  if (!out.ok && std::any_of(out.violations.begin(), out.violations.end(),
                             [](const auto& v) { return v.code == "category" || v.code == "role"; })) {
    return out;
  }

  const auto& t = recipe.target;
  auto fixed = [](const AttributeConstraint& a) { return a.size.has_value() && a.color.has_value(); };
  if (level == LevelTag::L1) {
    if (recipe.distractor) fail("level", "L1 scenes have no distractor group");
    if (t.instance_types.size() != 1) fail("instance_type", "L1 uses a single instance type");
    if (!fixed(t.attributes)) fail("attribute", "L1 fixes both size and color");
    return out;
  }
  if (!recipe.distractor) {
    fail("level", std::string(to_string(level)) + " needs a distractor group");
    return out;
  }
  const auto& d = *recipe.distractor;
  const bool same_cat = t.category == d.category;
  const bool same_super = bank.category(t.category).super_category == bank.category(d.category).super_category;
  switch (level) {
    case LevelTag::L2Size:
    case LevelTag::L2Color: {
      if (!same_cat) fail("category", "L2 groups share one category");
      if (t.instance_types.size() != 1 || t.instance_types != d.instance_types) {
        fail("instance_type", "L2 groups share one instance type");
      }
      if (!fixed(t.attributes) || !fixed(d.attributes)) {
        fail("attribute", "L2 groups fix both size and color");
        break;
      }
      const bool size_differs = *t.attributes.size != *d.attributes.size;
      const bool color_differs = *t.attributes.color != *d.attributes.color;
      if (level == LevelTag::L2Size && !(size_differs && !color_differs)) {
        fail("attribute", "L2Size groups differ in size only");
      }
      if (level == LevelTag::L2Color && !(color_differs && !size_differs)) {
        fail("attribute", "L2Color groups differ in color only");
      }
      break;
    }
    case LevelTag::L3:
    case LevelTag::L5: {
      if (same_cat) fail("category", std::string(to_string(level)) + " groups come from different categories");
      if (!same_super) fail("super_category", std::string(to_string(level)) + " categories share a super-category");
      if (level == LevelTag::L3 && (t.instance_types.size() != 1 || d.instance_types.size() != 1)) {
        fail("instance_type", "L3 groups use one instance type each");
      }
      if (level == LevelTag::L5 && (t.instance_types.size() < 2 || d.instance_types.size() < 2)) {
        fail("instance_type", "L5 groups span at least two instance types each");
      }
      if (t.attributes != d.attributes) fail("attribute", "attributes are held equal across groups");
      break;
    }
    case LevelTag::L4: {
      if (!same_cat) fail("category", "L4 groups share one category");
      if (t.instance_types.size() != 1 || d.instance_types.size() != 1 || t.instance_types == d.instance_types) {
        fail("instance_type", "L4 groups use one distinct instance type each");
      }
      if (t.attributes != d.attributes) fail("attribute", "attributes are held equal across groups");
      break;
    }
    case LevelTag::L1:
      break;
  }
  return out;
}

nlohmann::json to_json(const SceneRecipe& r) {
  auto assets = [](const std::vector<AssetId>& v) {
    auto j = nlohmann::json::array();
    for (auto a : v) j.push_back(a.value);
    return j;
  };
  return {{"level", to_string(r.level)},
          {"target", group_json(r.target)},
          {"distractor", r.distractor ? group_json(*r.distractor) : nlohmann::json(nullptr)},
          {"asset_choices", {{"target", assets(r.asset_choices[0])}, {"distractor", assets(r.asset_choices[1])}}},
          {"background", r.background.value},
          {"profile_draw_seed", r.profile_draw_seed},
          {"scene_seed", r.scene_seed},
          {"split", to_string(r.split)},
          {"config", to_string(r.config)}};
}

SceneRecipe recipe_from_json(const nlohmann::json& j) {
  SceneRecipe r;
  try {
    r.level = level_from_string(j.at("level").get<std::string>());
    r.target = group_from_json(j.at("target"));
    if (!j.at("distractor").is_null()) r.distractor = group_from_json(j.at("distractor"));
    for (const auto& a : j.at("asset_choices").at("target")) r.asset_choices[0].emplace_back(a.get<std::uint32_t>());
    for (const auto& a : j.at("asset_choices").at("distractor")) r.asset_choices[1].emplace_back(a.get<std::uint32_t>());
    r.background = BackgroundId(j.at("background").get<std::uint32_t>());
    r.profile_draw_seed = j.at("profile_draw_seed").get<std::uint64_t>();
    r.scene_seed = j.at("scene_seed").get<std::uint64_t>();
    r.split = split_from_string(j.at("split").get<std::string>());
    r.config = config_from_string(j.at("config").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("recipe: ") + e.what());
  }
  return r;
}

std::size_t brute_force_count(std::span<const InstanceRecord> instances, const InstancePredicate& predicate) {
  std::size_t n = 0;
  for (const auto& inst : instances) n += predicate(inst) ? 1 : 0;
  return n;
}

InstancePredicate group_predicate(const GroupSpec& group) {
  return [category = group.category, types = group.instance_types, attrs = group.attributes](const InstanceRecord& r) {
    return r.category == category && std::find(types.begin(), types.end(), r.instance_type) != types.end() &&
           attrs.admits(r.attributes);
  };
}

std::string describe_group(LevelTag level, const GroupSpec& group, const AssetBank& bank) {
  const auto& cat = bank.category(group.category).name;
  switch (level) {
    case LevelTag::L2Size:
      return std::string(to_string(*group.attributes.size)) + " " + cat;
    case LevelTag::L2Color:
      return std::string(to_string(*group.attributes.color)) + " " + cat;
    case LevelTag::L4:
      return bank.instance_type(group.instance_types.front()).name + " " + cat;
    default:
      return cat;
  }
}

std::vector<Box2i> exemplar_boxes(std::span<const InstanceRecord> instances, const InstancePredicate& predicate,
                                  std::size_t k, Rng& rng) {
  std::vector<const InstanceRecord*> pool;
  for (const auto& r : instances) {
    if (r.visible_pixels > 0 && predicate(r)) pool.push_back(&r);
  }
  if (pool.size() < k) {
    throw Error("exemplar_boxes: requested " + std::to_string(k) + " exemplars but only " +
                std::to_string(pool.size()) + " visible instances match");
  }
  rng.shuffle(std::span(pool));
  std::stable_sort(pool.begin(), pool.end(),
                   [](const InstanceRecord* a, const InstanceRecord* b) { return a->visible_pixels > b->visible_pixels; });
  std::vector<Box2i> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(pool[i]->bbox);
  return out;
}

std::vector<CountQuery> queries_for_scene(const std::string& scene_id, const SceneRecipe& recipe,
                                          const AssetBank& bank, std::span<const InstanceRecord> instances, Rng& rng,
                                          std::size_t exemplars_per_group) {
  std::array<int, 2> per_role{0, 0};
  for (const auto& inst : instances) {
    if (inst.role == GroupRole::Distractor && !recipe.distractor) {
      throw Error(scene_id + ": annotation has a distractor instance but the recipe has no distractor group");
    }
    ++per_role[static_cast<std::size_t>(inst.role)];
    if (!group_predicate(recipe.group(inst.role))(inst)) {
      throw Error(scene_id + ": instance " + std::to_string(inst.instance_id) + " does not match its recipe group");
    }
  }
  if (per_role[0] != recipe.target.count || per_role[1] != (recipe.distractor ? recipe.distractor->count : 0)) {
    throw Error(scene_id + ": annotation instance counts disagree with the recipe");
  }

  std::vector<GroupRole> roles{GroupRole::Target};
  if (recipe.distractor) roles.push_back(GroupRole::Distractor);
  std::vector<CountQuery> out;
  for (auto role : roles) {
    const auto& pos = recipe.group(role);
    CountQuery q;
    q.query_id = scene_id + "#" + std::string(to_string(role));
    q.scene_id = scene_id;
    q.level = recipe.level;
    q.role = role;
    q.category = bank.category(pos.category).name;
    q.positive_text = describe_group(recipe.level, pos, bank);
    const auto pos_pred = group_predicate(pos);
    const auto gt = brute_force_count(instances, pos_pred);
    if (static_cast<int>(gt) != pos.count) {
      throw Error(q.query_id + ": brute-force count " + std::to_string(gt) + " disagrees with recipe count " +
                  std::to_string(pos.count));
    }
    q.gt_count = static_cast<int>(gt);
    auto visible = [&](const InstancePredicate& p) {
      std::size_t n = 0;
      for (const auto& inst : instances) n += (inst.visible_pixels > 0 && p(inst)) ? 1 : 0;
      return n;
    };
    q.exemplar_boxes_positive =
        exemplar_boxes(instances, pos_pred, std::min(exemplars_per_group, visible(pos_pred)), rng);
    if (recipe.distractor) {
      const auto other = role == GroupRole::Target ? GroupRole::Distractor : GroupRole::Target;
      const auto& neg = recipe.group(other);
      q.negative_text = describe_group(recipe.level, neg, bank);
      const auto neg_pred = group_predicate(neg);
      q.exemplar_boxes_negative =
          exemplar_boxes(instances, neg_pred, std::min(exemplars_per_group, visible(neg_pred)), rng);
    }
    out.push_back(std::move(q));
  }
  return out;
}

nlohmann::json to_json(const CountQuery& q) {
  auto boxes = [](const std::vector<Box2i>& v) {
    auto j = nlohmann::json::array();
    for (const auto& b : v) j.push_back(box_json(b));
    return j;
  };
  return {{"query_id", q.query_id},
          {"scene_id", q.scene_id},
          {"level", to_string(q.level)},
          {"role", to_string(q.role)},
          {"category", q.category},
          {"positive_text", q.positive_text},
          {"negative_text", q.negative_text ? nlohmann::json(*q.negative_text) : nlohmann::json(nullptr)},
          {"exemplar_boxes_positive", boxes(q.exemplar_boxes_positive)},
          {"exemplar_boxes_negative", boxes(q.exemplar_boxes_negative)},
          {"gt_count", q.gt_count}};
}

CountQuery query_from_json(const nlohmann::json& j) {
  CountQuery q;
  try {
    q.query_id = j.at("query_id").get<std::string>();
    q.scene_id = j.at("scene_id").get<std::string>();
    q.level = level_from_string(j.at("level").get<std::string>());
    q.role = role_from_string(j.at("role").get<std::string>());
    q.category = j.at("category").get<std::string>();
    q.positive_text = j.at("positive_text").get<std::string>();
    if (!j.at("negative_text").is_null()) q.negative_text = j.at("negative_text").get<std::string>();
    for (const auto& b : j.at("exemplar_boxes_positive")) q.exemplar_boxes_positive.push_back(box_from_json(b));
    for (const auto& b : j.at("exemplar_boxes_negative")) q.exemplar_boxes_negative.push_back(box_from_json(b));
    q.gt_count = j.at("gt_count").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("query: ") + e.what());
  }
  return q;
}

}  // namespace granucount
