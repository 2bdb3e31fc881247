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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "granucount/error.hpp"
#include "granucount/taxonomy.hpp"
#include "support.hpp"

using namespace granucount;

TEST_CASE("bank sizes follow the requested counts") {
  const auto bank = build_bank({1, 2, 2, 2, 2, 4});
  CHECK(bank.super_categories.size() == 2);
  CHECK(bank.categories.size() == 4);
  CHECK(bank.instance_types.size() == 8);
  CHECK(bank.assets.size() == 16);
  CHECK(bank.backgrounds.size() == 4);
  CHECK(check_bank(bank).empty());
}

TEST_CASE("bank at reference scale") {
  const auto bank = build_bank({7, 16, 10, 2, 4, 50});
  CHECK(bank.super_categories.size() == 16);
  CHECK(bank.categories.size() == 160);
  std::map<std::uint32_t, int> per_super;
  for (const auto& c : bank.categories) ++per_super[c.super_category.value];
  CHECK(per_super.size() == 16);
}

TEST_CASE("bank construction is deterministic") {
  CHECK(to_json(build_bank({1, 3, 3, 2, 3, 5})).dump() == to_json(build_bank({1, 3, 3, 2, 3, 5})).dump());
  CHECK(to_json(build_bank({1, 3, 3, 2, 3, 5})).dump() != to_json(build_bank({2, 3, 3, 2, 3, 5})).dump());
}

TEST_CASE("bank rejects degenerate counts") {
  CHECK_THROWS_AS(build_bank({1, 0, 2, 2, 2, 4}), Error);
  CHECK_THROWS_WITH_AS(build_bank({1, 2, 2, 1, 2, 4}), doctest::Contains("types_per_cat"), Error);
  CHECK_THROWS_AS(build_bank({1, 2, 2, 2, 1, 4}), Error);
}

TEST_CASE("hierarchy is complete and referentially sound") {
  const auto& bank = testing::full_bank();
  CHECK(check_bank(bank).empty());
  for (const auto& a : bank.assets) {
    const auto& t = bank.instance_type(a.instance_type);
    REQUIRE(std::find(t.assets.begin(), t.assets.end(), a.id) != t.assets.end());
    const auto& c = bank.category(t.category);
    REQUIRE(std::find(c.instance_types.begin(), c.instance_types.end(), t.id) != c.instance_types.end());
    REQUIRE(c.super_category.value < bank.super_categories.size());
  }
  for (const auto& c : bank.categories) CHECK(c.instance_types.size() >= 2);
  for (const auto& t : bank.instance_types) CHECK(t.assets.size() >= 2);
}

TEST_CASE("instance types of a category are separated") {
  const auto& bank = testing::full_bank();
  for (const auto& c : bank.categories) {
    for (std::size_t i = 0; i < c.instance_types.size(); ++i) {
      for (std::size_t j = i + 1; j < c.instance_types.size(); ++j) {
        const auto& a = bank.instance_type(c.instance_types[i]);
        const auto& b = bank.instance_type(c.instance_types[j]);
        CHECK((a.family != b.family || shape_distance(a.params, b.params) >= kTypeSeparation));
      }
    }
  }
}

TEST_CASE("shape parameters stay in bounds and assets perturb by at most 10%") {
  const auto& bank = testing::full_bank();
  for (const auto& t : bank.instance_types) {
    for (int i = 0; i < 3; ++i) {
      CHECK(t.params.v[i] >= kAspectMin);
      CHECK(t.params.v[i] <= kAspectMax);
    }
  }
  for (const auto& a : bank.assets) {
    const auto r = resolve_asset(bank, a.id);
    const auto& t = bank.instance_type(a.instance_type);
    CHECK(r.family == t.family);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(r.params.v[i] / t.params.v[i] - 1.0) <= kAssetPerturbation + 1e-12);
    const auto again = resolve_asset(bank, a.id);
    CHECK(again.params == r.params);
    CHECK(again.texture_seed == r.texture_seed);
  }
}

TEST_CASE("palette colours are pairwise far apart") {
  for (std::size_t i = 0; i < kPaletteSize; ++i) {
    CHECK(kPalette[i].color == static_cast<Color>(i));
    for (std::size_t j = i + 1; j < kPaletteSize; ++j) {
      const double dr = kPalette[i].rgb.r - kPalette[j].rgb.r;
      const double dg = kPalette[i].rgb.g - kPalette[j].rgb.g;
      const double db = kPalette[i].rgb.b - kPalette[j].rgb.b;
      CHECK(std::sqrt(dr * dr + dg * dg + db * db) >= 120.0);
    }
  }
  CHECK(color_from_string(to_string(Color::Azure)) == Color::Azure);
  CHECK_THROWS_AS(color_from_string("mauve"), Error);
}

TEST_CASE("bank JSON round trip") {
  const auto& bank = testing::small_bank();
  const auto text = to_json(bank).dump();
  CHECK(to_json(bank_from_json(nlohmann::json::parse(text))).dump() == text);
  auto broken = nlohmann::json::parse(text);
  broken["instance_types"][0]["category"] = 999;
  CHECK_THROWS_AS(bank_from_json(broken), Error);
}

TEST_CASE("least-used rule") {
  const auto bank = build_bank({1, 1, 2, 2, 2, 2});
  CategoryUsage usage{5, 0};
  Rng rng(1);
  for (int i = 0; i < 20; ++i) CHECK(sample_category(bank, usage, rng).id.value == 1);
}

TEST_CASE("equal availability gives a uniform draw") {
  const auto& bank = testing::small_bank();
  const std::size_t k = bank.categories.size();
  CategoryUsage usage(k, 0);
  Rng rng(77);
  std::vector<double> hits(k, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits[sample_category(bank, usage, rng).id.value] += 1.0;
  const double expected = static_cast<double>(n) / static_cast<double>(k);
  double chi2 = 0.0;
  for (double h : hits) chi2 += (h - expected) * (h - expected) / expected;
  const double df = static_cast<double>(k - 1);
  CHECK(chi2 < df + 3.0 * std::sqrt(2.0 * df));
}

TEST_CASE("scarce categories are down-weighted") {
  auto bank = testing::small_bank();
  // Leave category 0 with a single asset.
  const auto& types = bank.categories[0].instance_types;
  bank.instance_types[types[0].value].assets.resize(1);
  for (std::size_t i = 1; i < types.size(); ++i) bank.instance_types[types[i].value].assets.clear();
  const std::size_t k = bank.categories.size();
  CategoryUsage usage(k, 0);
  Rng rng(5);
  const int n = 100000;
  int scarce = 0;
  for (int i = 0; i < n; ++i) {
    const auto c = sample_category(bank, usage, rng);
    ++usage[c.id.value];
    scarce += c.id.value == 0;
  }
  CHECK(static_cast<double>(scarce) < static_cast<double>(n) / static_cast<double>(k));
}

TEST_CASE("balanced sampling keeps category frequencies close") {
  const auto& bank = testing::full_bank();
  CategoryUsage usage(bank.categories.size(), 0);
  Rng rng(3);
  for (int i = 0; i < 20000; ++i) ++usage[sample_category(bank, usage, rng).id.value];
  const auto [lo, hi] = std::minmax_element(usage.begin(), usage.end());
  REQUIRE(*lo > 0);
  CHECK(static_cast<double>(*hi) / static_cast<double>(*lo) <= 1.2);
}

TEST_CASE("sample_category errors") {
  AssetBank empty;
  Rng rng(1);
  CHECK_THROWS_AS(sample_category(empty, {}, rng), Error);
  CHECK_THROWS_AS(sample_category(testing::small_bank(), CategoryUsage{1}, rng), Error);
}
