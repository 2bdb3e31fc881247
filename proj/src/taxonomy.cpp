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

#include "granucount/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "granucount/error.hpp"

namespace granucount {
namespace {

constexpr std::array<std::string_view, 4> kFamilyNames{"box", "ellipsoid", "cylinder", "superellipsoid"};
constexpr std::array<std::string_view, 4> kFamilyAdjectives{"boxy", "oval", "tubular", "rounded"};

constexpr std::array<std::string_view, 24> kSyllables{
    "ka", "lo", "mi", "ten", "ru", "sa", "vo", "ne", "pi", "dor", "zu", "fa",
    "ber", "qui", "lan", "to", "me", "ris", "gal", "no", "ve", "sul", "ta", "po"};

std::string make_name(Rng& rng, std::set<std::string>& taken, int syllables) {
  for (;;) {
    std::string name;
    for (int i = 0; i < syllables; ++i) name += kSyllables[rng.index(kSyllables.size())];
    if (taken.insert(name).second) return name;
  }
}

Rgb8 grey(Rng& rng, double lo, double hi, double tint) {
  const double base = rng.uniform(lo, hi);
  auto channel = [&] {
    return static_cast<std::uint8_t>(std::lround(std::clamp(base + rng.uniform(-tint, tint), 0.0, 255.0)));
  };
  Rgb8 c;
  c.r = channel();
  c.g = channel();
  c.b = channel();
  return c;
}

ShapeParams draw_type_params(Rng& rng, ShapeFamily family) {
  ShapeParams p;
  for (int i = 0; i < 3; ++i) p.v[i] = rng.uniform(kAspectMin, kAspectMax);
  p.v[3] = family == ShapeFamily::Superellipsoid ? rng.uniform(kRoundnessMin, 1.0) : 1.0;
  return p;
}

nlohmann::json rgb_json(Rgb8 c) { return nlohmann::json::array({c.r, c.g, c.b}); }

Rgb8 rgb_from_json(const nlohmann::json& j) {
  return Rgb8{j.at(0).get<std::uint8_t>(), j.at(1).get<std::uint8_t>(), j.at(2).get<std::uint8_t>()};
}

template <class IdT>
nlohmann::json ids_json(const std::vector<IdT>& ids) {
  auto out = nlohmann::json::array();
  for (auto id : ids) out.push_back(id.value);
  return out;
}

template <class IdT>
std::vector<IdT> ids_from_json(const nlohmann::json& j) {
  std::vector<IdT> out;
  for (const auto& v : j) out.emplace_back(v.get<std::uint32_t>());
  return out;
}

}  // namespace

std::string_view to_string(SizeMode s) { return s == SizeMode::Small ? "small" : "large"; }
std::string_view to_string(Color c) { return palette_entry(c).name; }
std::string_view to_string(ShapeFamily f) { return kFamilyNames[static_cast<std::size_t>(f)]; }

SizeMode size_mode_from_string(std::string_view s) {
  if (s == "small") return SizeMode::Small;
  if (s == "large") return SizeMode::Large;
  throw Error("unknown size mode '" + std::string(s) + "'");
}

Color color_from_string(std::string_view s) {
  for (const auto& e : kPalette) {
    if (e.name == s) return e.color;
  }
  throw Error("unknown color '" + std::string(s) + "'");
}

ShapeFamily shape_family_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
    if (kFamilyNames[i] == s) return static_cast<ShapeFamily>(i);
  }
  throw Error("unknown shape family '" + std::string(s) + "'");
}

double shape_distance(const ShapeParams& a, const ShapeParams& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) d = std::max(d, std::abs(a.v[i] - b.v[i]));
  return d;
}

std::size_t AssetBank::asset_count(CategoryId c) const {
  std::size_t n = 0;
  for (auto t : category(c).instance_types) n += instance_type(t).assets.size();
  return n;
}

ResolvedAsset resolve_asset(const AssetBank& bank, AssetId id) {
  const auto& asset = bank.asset(id);
  const auto& type = bank.instance_type(asset.instance_type);
  Rng rng(derive_seed({asset.instance_type.value, asset.variation_seed}));
  ResolvedAsset out{type.family, type.params, rng.next_u64()};
  for (int i = 0; i < 3; ++i) out.params.v[i] *= 1.0 + rng.uniform(-kAssetPerturbation, kAssetPerturbation);
  if (type.family == ShapeFamily::Superellipsoid) {
    out.params.v[3] = std::min(1.0, out.params.v[3] * (1.0 + rng.uniform(-kAssetPerturbation, kAssetPerturbation)));
  }
  return out;
}

AssetBank build_bank(const BankParams& params) {
  if (params.n_super == 0 || params.cats_per_super == 0 || params.types_per_cat == 0 ||
      params.assets_per_type == 0 || params.n_backgrounds == 0) {
    throw Error("build_bank: all counts must be at least 1");
  }
  if (params.types_per_cat < 2) {
    throw Error("build_bank: types_per_cat must be >= 2 (instance-level scenes need two instance types "
                "of one category)");
  }
  if (params.assets_per_type < 2) {
    throw Error("build_bank: assets_per_type must be >= 2 (held-out test assets need a second asset)");
  }

  AssetBank bank;
  bank.params = params;
  Rng rng(derive_seed({params.seed, 0x7461786fULL}));
  std::set<std::string> names;

  for (std::size_t s = 0; s < params.n_super; ++s) {
    SuperCategory sc{SuperCategoryId(static_cast<std::uint32_t>(s)), make_name(rng, names, 3)};
    bank.super_categories.push_back(sc);
    for (std::size_t c = 0; c < params.cats_per_super; ++c) {
      Category cat;
      cat.id = CategoryId(static_cast<std::uint32_t>(bank.categories.size()));
      cat.super_category = sc.id;
      cat.name = make_name(rng, names, 2);
      std::vector<ShapeParams> taken;
      for (std::size_t t = 0; t < params.types_per_cat; ++t) {
        InstanceType type;
        type.id = InstanceTypeId(static_cast<std::uint32_t>(bank.instance_types.size()));
        type.category = cat.id;
        for (int attempt = 0;; ++attempt) {
          if (attempt > 10000) throw Error("build_bank: cannot separate instance types; lower types_per_cat");
          type.family = static_cast<ShapeFamily>(rng.index(kFamilyNames.size()));
          type.params = draw_type_params(rng, type.family);
          const bool separated = std::all_of(taken.begin(), taken.end(), [&](const ShapeParams& other) {
            return shape_distance(other, type.params) >= kTypeSeparation;
          });
          if (separated) break;
        }
        taken.push_back(type.params);
        type.name = std::string(kFamilyAdjectives[static_cast<std::size_t>(type.family)]) + "-" + std::to_string(t + 1);
        for (std::size_t a = 0; a < params.assets_per_type; ++a) {
          AssetDescriptor asset{AssetId(static_cast<std::uint32_t>(bank.assets.size())), type.id, rng.next_u64()};
          type.assets.push_back(asset.id);
          bank.assets.push_back(asset);
        }
        cat.instance_types.push_back(type.id);
        bank.instance_types.push_back(std::move(type));
      }
      bank.categories.push_back(std::move(cat));
    }
  }

  for (std::size_t b = 0; b < params.n_backgrounds; ++b) {
    Background bg;
    bg.id = BackgroundId(static_cast<std::uint32_t>(b));
    bg.sky_zenith = grey(rng, 150, 205, 10);
    bg.sky_horizon = grey(rng, 175, 225, 8);
    bg.ground_horizon = grey(rng, 105, 150, 10);
    bg.ground_near = grey(rng, 80, 125, 10);
    bg.light_azimuth = rng.uniform(0.0, 2.0 * std::numbers::pi);
    bg.light_elevation = rng.uniform(30.0, 75.0) * std::numbers::pi / 180.0;
    bank.backgrounds.push_back(bg);
  }
  return bank;
}

std::vector<std::string> check_bank(const AssetBank& bank) {
  std::vector<std::string> v;
  auto fail = [&](std::string msg) { v.push_back(std::move(msg)); };
  for (std::size_t i = 0; i < bank.super_categories.size(); ++i) {
    if (bank.super_categories[i].id.value != i) fail("super-category " + std::to_string(i) + ": id mismatch");
  }
  for (std::size_t i = 0; i < bank.categories.size(); ++i) {
    const auto& c = bank.categories[i];
    const auto tag = "category " + std::to_string(i);
    if (c.id.value != i) fail(tag + ": id mismatch");
    if (c.super_category.value >= bank.super_categories.size()) fail(tag + ": dangling super-category");
    if (c.instance_types.size() < 2) fail(tag + ": fewer than 2 instance types");
    for (auto t : c.instance_types) {
      if (t.value >= bank.instance_types.size()) {
        fail(tag + ": dangling instance type");
      } else if (bank.instance_types[t.value].category != c.id) {
        fail(tag + ": instance type " + std::to_string(t.value) + " points elsewhere");
      }
    }
  }
  for (std::size_t i = 0; i < bank.instance_types.size(); ++i) {
    const auto& t = bank.instance_types[i];
    const auto tag = "instance type " + std::to_string(i);
    if (t.id.value != i) fail(tag + ": id mismatch");
    if (t.category.value >= bank.categories.size()) {
      fail(tag + ": dangling category");
    } else {
      const auto& owners = bank.categories[t.category.value].instance_types;
      if (std::count(owners.begin(), owners.end(), t.id) != 1) fail(tag + ": not listed by its category");
    }
    if (t.assets.size() < 2) fail(tag + ": fewer than 2 assets");
    for (std::size_t k = 0; k < 3; ++k) {
      if (t.params.v[k] < kAspectMin || t.params.v[k] > kAspectMax) fail(tag + ": aspect out of bounds");
    }
    const double r = t.params.roundness();
    if (t.family == ShapeFamily::Superellipsoid ? (r < kRoundnessMin || r > 1.0) : r != 1.0) {
      fail(tag + ": roundness out of bounds");
    }
    for (auto a : t.assets) {
      if (a.value >= bank.assets.size()) {
        fail(tag + ": dangling asset");
      } else if (bank.assets[a.value].instance_type != t.id) {
        fail(tag + ": asset " + std::to_string(a.value) + " points elsewhere");
      }
    }
  }
  for (std::size_t i = 0; i < bank.assets.size(); ++i) {
    const auto& a = bank.assets[i];
    if (a.id.value != i) fail("asset " + std::to_string(i) + ": id mismatch");
    if (a.instance_type.value >= bank.instance_types.size()) fail("asset " + std::to_string(i) + ": dangling type");
  }
  for (std::size_t i = 0; i < bank.backgrounds.size(); ++i) {
    if (bank.backgrounds[i].id.value != i) fail("background " + std::to_string(i) + ": id mismatch");
  }
  return v;
}

nlohmann::json to_json(const AssetBank& bank) {
  using nlohmann::json;
  json doc;
  const auto& p = bank.params;
  doc["params"] = {{"seed", p.seed},
                   {"n_super", p.n_super},
                   {"cats_per_super", p.cats_per_super},
                   {"types_per_cat", p.types_per_cat},
                   {"assets_per_type", p.assets_per_type},
                   {"n_backgrounds", p.n_backgrounds}};
  auto& supers = doc["super_categories"] = json::array();
  for (const auto& s : bank.super_categories) supers.push_back({{"id", s.id.value}, {"name", s.name}});
  auto& cats = doc["categories"] = json::array();
  for (const auto& c : bank.categories) {
    cats.push_back({{"id", c.id.value},
                    {"super_category", c.super_category.value},
                    {"name", c.name},
                    {"instance_types", ids_json(c.instance_types)}});
  }
  auto& types = doc["instance_types"] = json::array();
  for (const auto& t : bank.instance_types) {
    types.push_back({{"id", t.id.value},
                     {"category", t.category.value},
                     {"name", t.name},
                     {"family", to_string(t.family)},
                     {"params", t.params.v},
                     {"assets", ids_json(t.assets)}});
  }
  auto& assets = doc["assets"] = json::array();
  for (const auto& a : bank.assets) {
    assets.push_back({{"id", a.id.value}, {"instance_type", a.instance_type.value}, {"variation_seed", a.variation_seed}});
  }
  auto& bgs = doc["backgrounds"] = json::array();
  for (const auto& b : bank.backgrounds) {
    bgs.push_back({{"id", b.id.value},
                   {"sky_zenith", rgb_json(b.sky_zenith)},
                   {"sky_horizon", rgb_json(b.sky_horizon)},
                   {"ground_horizon", rgb_json(b.ground_horizon)},
                   {"ground_near", rgb_json(b.ground_near)},
                   {"light_azimuth", b.light_azimuth},
                   {"light_elevation", b.light_elevation}});
  }
  return doc;
}

AssetBank bank_from_json(const nlohmann::json& doc) {
  AssetBank bank;
  try {
    const auto& p = doc.at("params");
    bank.params = BankParams{p.at("seed").get<std::uint64_t>(),         p.at("n_super").get<std::size_t>(),
                             p.at("cats_per_super").get<std::size_t>(), p.at("types_per_cat").get<std::size_t>(),
                             p.at("assets_per_type").get<std::size_t>(), p.at("n_backgrounds").get<std::size_t>()};
    for (const auto& s : doc.at("super_categories")) {
      bank.super_categories.push_back({SuperCategoryId(s.at("id").get<std::uint32_t>()), s.at("name").get<std::string>()});
    }
    for (const auto& c : doc.at("categories")) {
      bank.categories.push_back({CategoryId(c.at("id").get<std::uint32_t>()),
                                 SuperCategoryId(c.at("super_category").get<std::uint32_t>()),
                                 c.at("name").get<std::string>(), ids_from_json<InstanceTypeId>(c.at("instance_types"))});
    }
    for (const auto& t : doc.at("instance_types")) {
      InstanceType type;
      type.id = InstanceTypeId(t.at("id").get<std::uint32_t>());
      type.category = CategoryId(t.at("category").get<std::uint32_t>());
      type.name = t.at("name").get<std::string>();
      type.family = shape_family_from_string(t.at("family").get<std::string>());
      type.params.v = t.at("params").get<std::array<double, 4>>();
      type.assets = ids_from_json<AssetId>(t.at("assets"));
      bank.instance_types.push_back(std::move(type));
    }
    for (const auto& a : doc.at("assets")) {
      bank.assets.push_back({AssetId(a.at("id").get<std::uint32_t>()),
                             InstanceTypeId(a.at("instance_type").get<std::uint32_t>()),
                             a.at("variation_seed").get<std::uint64_t>()});
    }
    for (const auto& b : doc.at("backgrounds")) {
      bank.backgrounds.push_back({BackgroundId(b.at("id").get<std::uint32_t>()), rgb_from_json(b.at("sky_zenith")),
                                  rgb_from_json(b.at("sky_horizon")), rgb_from_json(b.at("ground_horizon")),
                                  rgb_from_json(b.at("ground_near")), b.at("light_azimuth").get<double>(),
                                  b.at("light_elevation").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("asset bank: malformed document: ") + e.what());
  }
  if (auto problems = check_bank(bank); !problems.empty()) {
    throw Error("asset bank: " + problems.front());
  }
  return bank;
}

Category sample_category(const AssetBank& bank, const CategoryUsage& usage, Rng& rng,
                         std::optional<std::span<const CategoryId>> eligible) {
  if (bank.categories.empty()) throw Error("sample_category: empty bank");
  if (usage.size() != bank.categories.size()) {
    throw Error("sample_category: usage must cover every category");
  }
  std::vector<CategoryId> pool;
  if (eligible) {
    pool.assign(eligible->begin(), eligible->end());
    std::sort(pool.begin(), pool.end());
  } else {
    for (const auto& c : bank.categories) pool.push_back(c.id);
  }
  if (pool.empty()) throw Error("sample_category: no eligible category");

  double mean_assets = 0.0;
  for (const auto& c : bank.categories) mean_assets += static_cast<double>(bank.asset_count(c.id));
  mean_assets /= static_cast<double>(bank.categories.size());

  std::vector<double> weight(pool.size());
  std::vector<double> load(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double n = static_cast<double>(bank.asset_count(pool[i]));
    weight[i] = n < mean_assets ? n / mean_assets : 1.0;
    load[i] = weight[i] > 0.0 ? static_cast<double>(usage[pool[i].value]) / weight[i]
                              : std::numeric_limits<double>::infinity();
  }
  const double least = *std::min_element(load.begin(), load.end());
  constexpr double kTie = 1e-9;
  double total = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (load[i] <= least + kTie) total += weight[i];
  }
  double u = rng.uniform() * total;
  std::size_t pick = pool.size();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (load[i] > least + kTie) continue;
    pick = i;
    if (u < weight[i]) break;
    u -= weight[i];
  }
  return bank.category(pool[pick]);
}

}  // namespace granucount
