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

#include <cmath>
#include <map>
#include <set>
#include <algorithm>

#include "granucount/error.hpp"
#include "granucount/splits.hpp"
#include "support.hpp"

using namespace granucount;

TEST_CASE("per-category asset holdout is ceil of 10%") {
  const auto bank = build_bank({2, 4, 5, 2, 10, 20});  // 20 assets per category
  const auto s = assign_splits(bank, 1);
  for (const auto& c : bank.categories) {
    std::map<Split, int> n;
    for (auto t : c.instance_types) {
      for (auto a : bank.instance_type(t).assets) ++n[s.asset_split[a.value]];
    }
    if (s.category_split[c.id.value] == CategorySplit::TestBOnly) {
      CHECK(n[Split::TestB] == 20);
    } else {
      CHECK(n[Split::TestA] == 2);
      CHECK(n[Split::Train] == 18);
    }
  }
}

TEST_CASE("category holdout count") {
  const auto& bank = testing::full_bank();
  const auto& s = testing::full_splits();
  CHECK(std::count(s.category_split.begin(), s.category_split.end(), CategorySplit::TestBOnly) == 16);
}

TEST_CASE("splits are disjoint and leak free") {
  const auto& bank = testing::full_bank();
  const auto& s = testing::full_splits();
  CHECK(validate_splits(bank, s).empty());
  std::set<std::uint32_t> train_cats, testb_cats, testa_cats;
  for (const auto& a : bank.assets) {
    const auto c = bank.category_of(a.id).value;
    switch (s.asset_split[a.id.value]) {
      case Split::Train: train_cats.insert(c); break;
      case Split::TestA: testa_cats.insert(c); break;
      case Split::TestB: testb_cats.insert(c); break;
    }
  }
  for (auto c : testb_cats) CHECK(train_cats.count(c) == 0);
  for (auto c : testa_cats) CHECK(train_cats.count(c) == 1);
  // Test scenes draw from held-out backgrounds only.
  for (auto b : s.backgrounds_for(Split::TestA)) CHECK(s.background_split[b.value] == BackgroundSplit::Test);
  for (auto b : s.backgrounds_for(Split::Train)) CHECK(s.background_split[b.value] == BackgroundSplit::Train);
  CHECK(!s.backgrounds_for(Split::TestB).empty());
}

TEST_CASE("split assignment is deterministic") {
  const auto& bank = testing::small_bank();
  CHECK(to_json(assign_splits(bank, 4)).dump() == to_json(assign_splits(bank, 4)).dump());
}

TEST_CASE("truncated assignment is a coverage violation") {
  auto s = testing::small_splits();
  s.asset_split.pop_back();
  const auto v = validate_splits(testing::small_bank(), s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == "coverage");
}

TEST_CASE("background holdout must leave both sides") {
  auto s = testing::small_splits();
  std::fill(s.background_split.begin(), s.background_split.end(), BackgroundSplit::Train);
  const auto v = validate_splits(testing::small_bank(), s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == "background");
}

TEST_CASE("bad holdout fractions") {
  CHECK_THROWS_AS(assign_splits(testing::small_bank(), 1, 0.0), Error);
  CHECK_THROWS_AS(assign_splits(testing::small_bank(), 1, 0.1, 0.5), Error);
}

TEST_CASE("one leaked asset is one violation") {
  const auto& bank = testing::small_bank();
  auto s = testing::small_splits();
  const auto it = std::find(s.asset_split.begin(), s.asset_split.end(), Split::TestB);
  REQUIRE(it != s.asset_split.end());
  *it = Split::Train;
  CHECK(validate_splits(bank, s).size() == 1);
}

TEST_CASE("permuted assignments: violation count matches a recount") {
  const auto& bank = testing::small_bank();
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = testing::small_splits();
    rng.shuffle(std::span(s.asset_split));
    std::size_t expected = 0;
    for (std::size_t a = 0; a < bank.assets.size(); ++a) {
      const auto type = bank.assets[a].instance_type;
      const auto cat = bank.instance_types[type.value].category;
      const bool unseen = s.category_split[cat.value] == CategorySplit::TestBOnly;
      const bool in_b = s.asset_split[a] == Split::TestB;
      expected += unseen != in_b;
    }
    CHECK(validate_splits(bank, s).size() == expected);
  }
}

TEST_CASE("split JSON round trip") {
  const auto& s = testing::small_splits();
  const auto text = to_json(s).dump();
  CHECK(to_json(splits_from_json(nlohmann::json::parse(text))).dump() == text);
}
