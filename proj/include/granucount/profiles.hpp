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

// Configuration-driven synthesis hyperparameters. A profile file maps each
// key to a two-element [lo, hi] array; a draw collapses every range to one
// scalar.

#include <array>
#include <cstdint>
#include <string_view>

#include <nlohmann/json.hpp>

#include "granucount/rng.hpp"

namespace granucount {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

enum class ProfileKey : std::uint8_t {
  MinObjectsPerGroup,
  MaxTotalObjects,
  ObjectSizeMin,
  ObjectSizeMax,
  DensityFactor,
  MinDistanceRatio,
  CameraDistanceMin,
  CameraDistanceMax,
  CameraHeightMin,
  CameraHeightMax,
  CameraAngleMin,
  CameraAngleMax,
  FocalLengthMin,
  FocalLengthMax,
  CoverageMin,
  CoverageMax,
};

/// Hard per-image instance cap.
inline constexpr int kMaxInstances = 250;

inline constexpr std::size_t kProfileKeyCount = 16;

inline constexpr std::array<std::string_view, kProfileKeyCount> kProfileKeyNames{
    "min_objects_per_group", "max_total_objects",   "object_size_min",     "object_size_max",
    "density_factor",        "min_distance_ratio",  "camera_distance_min", "camera_distance_max",
    "camera_height_min",     "camera_height_max",   "camera_angle_min",    "camera_angle_max",
    "focal_length_min",      "focal_length_max",    "coverage_min",        "coverage_max"};

constexpr std::string_view key_name(ProfileKey k) { return kProfileKeyNames[static_cast<std::size_t>(k)]; }

struct ConfigProfile {
  std::array<Range, kProfileKeyCount> ranges{};

  Range& operator[](ProfileKey k) { return ranges[static_cast<std::size_t>(k)]; }
  const Range& operator[](ProfileKey k) const { return ranges[static_cast<std::size_t>(k)]; }
  bool operator==(const ConfigProfile&) const = default;
};

struct ProfileDraw {
  std::array<double, kProfileKeyCount> values{};
  std::uint64_t seed = 0;

  double operator[](ProfileKey k) const { return values[static_cast<std::size_t>(k)]; }

  /// Object-count keys are integral; draws are rounded to nearest.
  int min_objects_per_group() const;
  int max_total_objects() const;
};

/// Factors applied by dense_variant.
struct DenseScaling {
  double count = 3.0;
  double spacing = 0.75;
  double density = 1.5;
};

/// The reference profile shipped as profiles/default.json.
ConfigProfile default_profile();

/// Validates and returns the profile; throws Error naming the offending key.
ConfigProfile load_profile(const nlohmann::json& doc);
nlohmann::json to_json(const ConfigProfile& profile);

/// Each scalar ~ Uniform[lo, hi]; deterministic for a given seed.
ProfileDraw draw(const ConfigProfile& profile, std::uint64_t seed);

/// Crowded regime: scales max_total_objects (clamped to the 250 cap),
/// min_distance_ratio and density_factor. Not idempotent.
ConfigProfile dense_variant(const ConfigProfile& profile, const DenseScaling& scaling = {});

}  // namespace granucount
