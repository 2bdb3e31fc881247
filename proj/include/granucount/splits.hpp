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

#pragma once

// Leakage-controlled partition of assets, categories and backgrounds.

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "granucount/rng.hpp"
#include "granucount/taxonomy.hpp"

namespace granucount {

enum class Split : std::uint8_t { Train, TestA, TestB };
enum class CategorySplit : std::uint8_t { TrainSeen, TestBOnly };
enum class BackgroundSplit : std::uint8_t { Train, Test };

std::string_view to_string(Split s);
std::string_view to_string(CategorySplit s);
std::string_view to_string(BackgroundSplit s);
Split split_from_string(std::string_view s);

/// Maps are dense vectors indexed by id value.
struct SplitAssignment {
  std::uint64_t seed = 0;
  double asset_holdout = 0.10;
  double category_holdout = 0.10;
  std::vector<Split> asset_split;
  std::vector<CategorySplit> category_split;
  std::vector<BackgroundSplit> background_split;
  /// Non-fatal notes, e.g. a holdout clamped to keep one training asset.
  std::vector<std::string> warnings;

  /// Backgrounds usable by scenes of the given split.
  std::vector<BackgroundId> backgrounds_for(Split s) const;
  /// Assets of one instance type that belong to the given split.
  std::vector<AssetId> assets_for(const AssetBank& bank, InstanceTypeId t, Split s) const;
};

/// Holds out ceil(category_holdout * |categories|) categories to TestB, taken
/// in pairs from randomly chosen super-categories so cross-category scenes
/// remain composable on the unseen side. Within every other category
/// ceil(asset_holdout * assets) assets (at least one) go to TestA, spread
/// round-robin across instance types. Backgrounds are held out with the
/// asset fraction; both test splits draw only from held-out backgrounds.
SplitAssignment assign_splits(const AssetBank& bank, std::uint64_t seed, double asset_holdout = 0.10,
                              double category_holdout = 0.10);

struct SplitViolation {
  std::string kind;  // "asset", "category", "background", "coverage"
  std::string message;
};

/// Empty iff the assignment is complete and leak-free.
std::vector<SplitViolation> validate_splits(const AssetBank& bank, const SplitAssignment& split);

nlohmann::json to_json(const SplitAssignment& split);
SplitAssignment splits_from_json(const nlohmann::json& doc);

}  // namespace granucount
