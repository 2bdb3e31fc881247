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

// The five granularity levels as recipe generators, a recipe validator, and
// the per-scene query emitter.

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "granucount/profiles.hpp"
#include "granucount/splits.hpp"
#include "granucount/taxonomy.hpp"

namespace granucount {

enum class LevelTag : std::uint8_t { L1, L2Size, L2Color, L3, L4, L5 };
inline constexpr std::array<LevelTag, 6> kAllLevels{LevelTag::L1, LevelTag::L2Size, LevelTag::L2Color,
                                                    LevelTag::L3, LevelTag::L4,     LevelTag::L5};

std::string_view to_string(LevelTag l);
LevelTag level_from_string(std::string_view s);
constexpr bool has_distractor(LevelTag l) { return l != LevelTag::L1; }

enum class GroupRole : std::uint8_t { Target, Distractor };
std::string_view to_string(GroupRole r);
GroupRole role_from_string(std::string_view s);

enum class SceneConfig : std::uint8_t { Normal, Dense };
std::string_view to_string(SceneConfig c);
SceneConfig config_from_string(std::string_view s);

/// nullopt means the factor is drawn per instance.
struct AttributeConstraint {
  std::optional<SizeMode> size;
  std::optional<Color> color;
  bool operator==(const AttributeConstraint&) const = default;
  bool admits(const AttributeTuple& a) const {
    return (!size || *size == a.size) && (!color || *color == a.color);
  }
};

struct GroupSpec {
  GroupRole role = GroupRole::Target;
  CategoryId category;
  std::vector<InstanceTypeId> instance_types;  // sorted, unique
  AttributeConstraint attributes;
  int count = 1;
};

struct SceneRecipe {
  LevelTag level = LevelTag::L1;
  GroupSpec target;
  std::optional<GroupSpec> distractor;
  /// One asset per instance, indexed by GroupRole.
  std::array<std::vector<AssetId>, 2> asset_choices;
  BackgroundId background;
  std::uint64_t profile_draw_seed = 0;
  std::uint64_t scene_seed = 0;
  Split split = Split::Train;
  SceneConfig config = SceneConfig::Normal;

  int total_count() const { return target.count + (distractor ? distractor->count : 0); }
  const GroupSpec& group(GroupRole r) const { return r == GroupRole::Target ? target : *distractor; }
};

/// Profile in force for a configuration.
ConfigProfile effective_profile(const ConfigProfile& profile, SceneConfig config, const DenseScaling& scaling = {});

/// Level-conformant recipe for a scene of `target_split`.
///
/// When `usage` is given, the target category is drawn with
/// sample_category and usage is incremented for every category the recipe
/// uses.
SceneRecipe compose_recipe(LevelTag level, const AssetBank& bank, const SplitAssignment& splits, Split target_split,
                           SceneConfig config, const ConfigProfile& profile, Rng& rng,
                           CategoryUsage* usage = nullptr, const DenseScaling& scaling = {});

struct RecipeViolation {
  std::string code;  // "level", "category", "super_category", "instance_type", "attribute", "count", "cap", "asset", "split", "role", "background"
  std::string message;
};

struct RecipeCheck {
  bool ok = true;
  std::vector<RecipeViolation> violations;
};

RecipeCheck recipe_valid(const SceneRecipe& recipe, const AssetBank& bank, const SplitAssignment& splits);

nlohmann::json to_json(const SceneRecipe& recipe);
SceneRecipe recipe_from_json(const nlohmann::json& doc);

struct Box2i {
  int xmin = 0, ymin = 0, xmax = 0, ymax = 0;  // inclusive pixel indices
  bool operator==(const Box2i&) const = default;
};

/// What counting needs to know about one rendered instance.
struct InstanceRecord {
  std::uint16_t instance_id = 0;
  GroupRole role = GroupRole::Target;
  CategoryId category;
  InstanceTypeId instance_type;
  AttributeTuple attributes;
  Box2i bbox;
  std::uint32_t visible_pixels = 0;
};

using InstancePredicate = std::function<bool(const InstanceRecord&)>;

std::size_t brute_force_count(std::span<const InstanceRecord> instances, const InstancePredicate& predicate);

/// Semantic membership test for a group: category, instance type set and
/// attribute constraint (the recorded role is ignored).
InstancePredicate group_predicate(const GroupSpec& group);

struct CountQuery {
  std::string query_id;
  std::string scene_id;
  LevelTag level = LevelTag::L1;
  GroupRole role = GroupRole::Target;
  std::string category;  // positive group's category name
  std::string positive_text;
  std::optional<std::string> negative_text;
  std::vector<Box2i> exemplar_boxes_positive;
  std::vector<Box2i> exemplar_boxes_negative;
  int gt_count = 0;
};

nlohmann::json to_json(const CountQuery& q);
CountQuery query_from_json(const nlohmann::json& doc);

std::string describe_group(LevelTag level, const GroupSpec& group, const AssetBank& bank);

/// Tight boxes of k distinct instances matching `predicate`, largest visible
/// area first; equal areas are ordered by a shuffle drawn from rng.
std::vector<Box2i> exemplar_boxes(std::span<const InstanceRecord> instances, const InstancePredicate& predicate,
                                  std::size_t k, Rng& rng);

/// One query for L1, two (target and swapped) for every other level. Ground
/// truth comes from brute_force_count over the records, never from the
/// recipe's counts; a disagreement between the two is an error.
std::vector<CountQuery> queries_for_scene(const std::string& scene_id, const SceneRecipe& recipe,
                                          const AssetBank& bank, std::span<const InstanceRecord> instances, Rng& rng,
                                          std::size_t exemplars_per_group = 3);

}  // namespace granucount
