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

#include "granucount/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "granucount/error.hpp"

namespace granucount {
namespace {

std::size_t ceil_fraction(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-12));
}

template <class E, std::size_t N>
E enum_from(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  throw Error(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 3> kSplitNames{"Train", "TestA", "TestB"};
constexpr std::array<std::string_view, 2> kCategorySplitNames{"TrainSeen", "TestBOnly"};
constexpr std::array<std::string_view, 2> kBackgroundSplitNames{"Train", "Test"};

}  // namespace

std::string_view to_string(Split s) { return kSplitNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(CategorySplit s) { return kCategorySplitNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(BackgroundSplit s) { return kBackgroundSplitNames[static_cast<std::size_t>(s)]; }
Split split_from_string(std::string_view s) { return enum_from<Split>(s, kSplitNames, "split"); }

std::vector<BackgroundId> SplitAssignment::backgrounds_for(Split s) const {
  const auto want = s == Split::Train ? BackgroundSplit::Train : BackgroundSplit::Test;
  std::vector<BackgroundId> out;
  for (std::size_t i = 0; i < background_split.size(); ++i) {
    if (background_split[i] == want) out.emplace_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

std::vector<AssetId> SplitAssignment::assets_for(const AssetBank& bank, InstanceTypeId t, Split s) const {
  std::vector<AssetId> out;
  for (auto a : bank.instance_type(t).assets) {
    if (asset_split.at(a.value) == s) out.push_back(a);
  }
  return out;
}

SplitAssignment assign_splits(const AssetBank& bank, std::uint64_t seed, double asset_holdout,
                              double category_holdout) {
  if (!(asset_holdout > 0.0 && asset_holdout < 0.5) || !(category_holdout > 0.0 && category_holdout < 0.5)) {
    throw Error("assign_splits: holdout fractions must lie in (0, 0.5)");
  }
  if (auto problems = check_bank(bank); !problems.empty()) {
    throw Error("assign_splits: invalid bank: " + problems.front());
  }
  SplitAssignment out;
  out.seed = seed;
  out.asset_holdout = asset_holdout;
  out.category_holdout = category_holdout;
  out.asset_split.assign(bank.assets.size(), Split::Train);
  out.category_split.assign(bank.categories.size(), CategorySplit::TrainSeen);
  out.background_split.assign(bank.backgrounds.size(), BackgroundSplit::Train);
  Rng rng(derive_seed({seed, 0x73706c6974ULL}));

  // Unseen categories, two per super-category (three when exactly three remain).
  std::map<SuperCategoryId, std::vector<CategoryId>> by_super;
  for (const auto& c : bank.categories) by_super[c.super_category].push_back(c.id);
  std::vector<SuperCategoryId> supers;
  for (const auto& [s, cats] : by_super) supers.push_back(s);
  rng.shuffle(std::span(supers));
  std::size_t remaining = ceil_fraction(category_holdout, bank.categories.size());
  if (remaining >= bank.categories.size()) remaining = bank.categories.size() - 1;
  for (auto s : supers) {
    if (remaining == 0) break;
    auto cats = by_super[s];
    rng.shuffle(std::span(cats));
    const std::size_t take = std::min(cats.size(), remaining == 3 ? std::size_t{3} : std::min<std::size_t>(2, remaining));
    for (std::size_t i = 0; i < take; ++i) out.category_split[cats[i].value] = CategorySplit::TestBOnly;
    remaining -= take;
  }

  for (const auto& c : bank.categories) {
    if (out.category_split[c.id.value] == CategorySplit::TestBOnly) {
      for (auto t : c.instance_types) {
        for (auto a : bank.instance_type(t).assets) out.asset_split[a.value] = Split::TestB;
      }
      continue;
    }
    const std::size_t n = bank.asset_count(c.id);
    if (n < 2) {
      throw Error("assign_splits: category '" + c.name + "' has a single asset; cannot hold one out for TestA");
    }
    std::size_t hold = std::max<std::size_t>(1, ceil_fraction(asset_holdout, n));
    if (hold >= n) {
      hold = n - 1;
      out.warnings.push_back("category '" + c.name + "': holdout clamped to keep one training asset");
    }
    // Round-robin over a shuffled type order so TestA covers as many
    // instance types as the holdout size allows.
    std::vector<std::vector<AssetId>> pools;
    for (auto t : c.instance_types) {
      auto assets = bank.instance_type(t).assets;
      rng.shuffle(std::span(assets));
      pools.push_back(std::move(assets));
    }
    rng.shuffle(std::span(pools));
    std::vector<std::size_t> next(pools.size(), 0);
    // Keep one training asset per instance type unless the holdout needs it.
    bool relaxed = false;
    for (std::size_t taken = 0; taken < hold;) {
      bool progressed = false;
      for (std::size_t p = 0; p < pools.size() && taken < hold; ++p) {
        const std::size_t keep = relaxed ? 0 : 1;
        if (next[p] + keep < pools[p].size()) {
          out.asset_split[pools[p][next[p]++].value] = Split::TestA;
          ++taken;
          progressed = true;
        }
      }
      if (!progressed) relaxed = true;
    }
  }

  std::vector<BackgroundId> bgs;
  for (const auto& b : bank.backgrounds) bgs.push_back(b.id);
  rng.shuffle(std::span(bgs));
  std::size_t held = std::max<std::size_t>(1, ceil_fraction(asset_holdout, bgs.size()));
  if (held >= bgs.size()) {
    if (bgs.size() < 2) throw Error("assign_splits: need at least two backgrounds to hold one out");
    held = bgs.size() - 1;
    out.warnings.push_back("background holdout clamped to keep one training background");
  }
  for (std::size_t i = 0; i < held; ++i) out.background_split[bgs[i].value] = BackgroundSplit::Test;
  return out;
}

std::vector<SplitViolation> validate_splits(const AssetBank& bank, const SplitAssignment& split) {
  std::vector<SplitViolation> v;
  if (split.asset_split.size() != bank.assets.size()) {
    v.push_back({"coverage", "asset split covers " + std::to_string(split.asset_split.size()) + " of " +
                                 std::to_string(bank.assets.size()) + " assets"});
  }
  if (split.category_split.size() != bank.categories.size()) {
    v.push_back({"coverage", "category split does not cover every category"});
  }
  if (split.background_split.size() != bank.backgrounds.size()) {
    v.push_back({"coverage", "background split does not cover every background"});
  }
  if (!v.empty()) return v;

  for (const auto& a : bank.assets) {
    const auto cat = bank.category_of(a.id);
    const auto cs = split.category_split[cat.value];
    const auto as = split.asset_split[a.id.value];
    const auto tag = "asset " + std::to_string(a.id.value) + " (" + std::string(to_string(as)) + ") in category '" +
                     bank.category(cat).name + "' (" + std::string(to_string(cs)) + ")";
    if (as == Split::TestB && cs != CategorySplit::TestBOnly) v.push_back({"asset", tag + ": TestB needs an unseen category"});
    if (as != Split::TestB && cs == CategorySplit::TestBOnly) v.push_back({"asset", tag + ": unseen category leaks"});
  }
  bool any_train_bg = false, any_test_bg = false;
  for (auto b : split.background_split) (b == BackgroundSplit::Train ? any_train_bg : any_test_bg) = true;
  if (!any_train_bg) v.push_back({"background", "no training background"});
  if (!any_test_bg) v.push_back({"background", "no held-out background"});
  return v;
}

nlohmann::json to_json(const SplitAssignment& split) {
  using nlohmann::json;
  json assets = json::object(), cats = json::object(), bgs = json::object();
  for (std::size_t i = 0; i < split.asset_split.size(); ++i) assets[std::to_string(i)] = to_string(split.asset_split[i]);
  for (std::size_t i = 0; i < split.category_split.size(); ++i) cats[std::to_string(i)] = to_string(split.category_split[i]);
  for (std::size_t i = 0; i < split.background_split.size(); ++i) {
    bgs[std::to_string(i)] = to_string(split.background_split[i]);
  }
  return {{"seed", split.seed},
          {"fractions", {{"asset_holdout", split.asset_holdout}, {"category_holdout", split.category_holdout}}},
          {"asset_split", assets},
          {"category_split", cats},
          {"background_split", bgs},
          {"warnings", split.warnings}};
}

SplitAssignment splits_from_json(const nlohmann::json& doc) {
  SplitAssignment out;
  try {
    out.seed = doc.at("seed").get<std::uint64_t>();
    out.asset_holdout = doc.at("fractions").at("asset_holdout").get<double>();
    out.category_holdout = doc.at("fractions").at("category_holdout").get<double>();
    auto dense = [](const nlohmann::json& obj, auto& vec, auto parse) {
      vec.resize(obj.size());
      std::vector<bool> seen(obj.size(), false);
      for (const auto& [key, value] : obj.items()) {
        const auto i = std::stoul(key);
        if (i >= vec.size() || seen[i]) throw Error("split manifest: ids are not dense");
        seen[i] = true;
        vec[i] = parse(value.template get<std::string>());
      }
    };
    dense(doc.at("asset_split"), out.asset_split, [](const std::string& s) { return split_from_string(s); });
    dense(doc.at("category_split"), out.category_split,
          [](const std::string& s) { return enum_from<CategorySplit>(s, kCategorySplitNames, "category split"); });
    dense(doc.at("background_split"), out.background_split,
          [](const std::string& s) { return enum_from<BackgroundSplit>(s, kBackgroundSplitNames, "background split"); });
    if (doc.contains("warnings")) out.warnings = doc.at("warnings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("split manifest: ") + e.what());
  }
  return out;
}

}  // namespace granucount
