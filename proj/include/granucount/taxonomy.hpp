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

// Semantic hierarchy (super-category > category > instance type > asset)
// and the procedural asset bank that stands in for a curated 3D library.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "granucount/ids.hpp"
#include "granucount/rng.hpp"

namespace granucount {

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  constexpr bool operator==(const Rgb8&) const = default;
};

enum class SizeMode : std::uint8_t { Small, Large };

/// Closed palette. Every pair is at least 120 apart in RGB (Euclidean), and
/// every entry is fully saturated so that shading never drifts it onto the
/// desaturated backgrounds.
enum class Color : std::uint8_t { Red, Green, Blue, Yellow, Cyan, Magenta, Orange, Purple, Lime, Azure };

inline constexpr std::size_t kPaletteSize = 10;

struct PaletteEntry {
  Color color;
  std::string_view name;
  Rgb8 rgb;
};

inline constexpr std::array<PaletteEntry, kPaletteSize> kPalette{{
    {Color::Red, "red", {255, 0, 0}},
    {Color::Green, "green", {0, 255, 0}},
    {Color::Blue, "blue", {0, 0, 255}},
    {Color::Yellow, "yellow", {255, 255, 0}},
    {Color::Cyan, "cyan", {0, 255, 255}},
    {Color::Magenta, "magenta", {255, 0, 255}},
    {Color::Orange, "orange", {255, 128, 0}},
    {Color::Purple, "purple", {128, 0, 255}},
    {Color::Lime, "lime", {128, 255, 0}},
    {Color::Azure, "azure", {0, 128, 255}},
}};

constexpr const PaletteEntry& palette_entry(Color c) { return kPalette[static_cast<std::size_t>(c)]; }

std::string_view to_string(SizeMode s);
std::string_view to_string(Color c);
SizeMode size_mode_from_string(std::string_view s);
Color color_from_string(std::string_view s);

struct AttributeTuple {
  SizeMode size = SizeMode::Small;
  Color color = Color::Red;
  constexpr bool operator==(const AttributeTuple&) const = default;
};

enum class ShapeFamily : std::uint8_t { Box, Ellipsoid, Cylinder, Superellipsoid };

std::string_view to_string(ShapeFamily f);
ShapeFamily shape_family_from_string(std::string_view s);

/// Unitless shape signature: three aspect ratios (half-extent multipliers
/// along local x, y (up), z) and a roundness exponent.
///
/// Instance-type bounds: aspects in [kAspectMin, kAspectMax]; roundness in
/// [kRoundnessMin, 1] for superellipsoids and exactly 1 for the other
/// families. Distinct instance types of one category are at least
/// kTypeSeparation apart in max-norm over all four components.
struct ShapeParams {
  std::array<double, 4> v{1.0, 1.0, 1.0, 1.0};

  double aspect_x() const { return v[0]; }
  double aspect_y() const { return v[1]; }
  double aspect_z() const { return v[2]; }
  double roundness() const { return v[3]; }
  bool operator==(const ShapeParams&) const = default;
};

inline constexpr double kAspectMin = 0.55;
inline constexpr double kAspectMax = 1.45;
inline constexpr double kRoundnessMin = 0.3;
inline constexpr double kTypeSeparation = 0.35;
/// Asset variations perturb each shape parameter by at most this fraction.
inline constexpr double kAssetPerturbation = 0.10;

double shape_distance(const ShapeParams& a, const ShapeParams& b);

struct SuperCategory {
  SuperCategoryId id;
  std::string name;
};

struct Category {
  CategoryId id;
  SuperCategoryId super_category;
  std::string name;
  std::vector<InstanceTypeId> instance_types;
};

struct InstanceType {
  InstanceTypeId id;
  CategoryId category;
  std::string name;
  ShapeFamily family = ShapeFamily::Box;
  ShapeParams params;
  std::vector<AssetId> assets;
};

struct AssetDescriptor {
  AssetId id;
  InstanceTypeId instance_type;
  std::uint64_t variation_seed = 0;
};

/// Ground + sky gradient standing in for an environment map. Also carries
/// the directional light used for flat shading.
struct Background {
  BackgroundId id;
  Rgb8 sky_zenith;
  Rgb8 sky_horizon;
  Rgb8 ground_horizon;
  Rgb8 ground_near;
  double light_azimuth = 0.0;    // radians
  double light_elevation = 0.0;  // radians above the ground plane
};

struct BankParams {
  std::uint64_t seed = 0;
  std::size_t n_super = 16;
  std::size_t cats_per_super = 10;
  std::size_t types_per_cat = 2;
  std::size_t assets_per_type = 10;
  std::size_t n_backgrounds = 50;
};

/// Ids are dense: element i of each collection has id value i.
struct AssetBank {
  BankParams params;
  std::vector<SuperCategory> super_categories;
  std::vector<Category> categories;
  std::vector<InstanceType> instance_types;
  std::vector<AssetDescriptor> assets;
  std::vector<Background> backgrounds;

  const SuperCategory& super_category(SuperCategoryId id) const { return super_categories.at(id.value); }
  const Category& category(CategoryId id) const { return categories.at(id.value); }
  const InstanceType& instance_type(InstanceTypeId id) const { return instance_types.at(id.value); }
  const AssetDescriptor& asset(AssetId id) const { return assets.at(id.value); }
  const Background& background(BackgroundId id) const { return backgrounds.at(id.value); }

  CategoryId category_of(AssetId a) const { return instance_type(asset(a).instance_type).category; }
  std::size_t asset_count(CategoryId c) const;
};

/// Concrete shape of one asset: the instance type's signature perturbed
/// deterministically by the variation seed.
struct ResolvedAsset {
  ShapeFamily family;
  ShapeParams params;
  std::uint64_t texture_seed;
};

ResolvedAsset resolve_asset(const AssetBank& bank, AssetId id);

AssetBank build_bank(const BankParams& params);

/// Full traversal of the hierarchy; empty iff every invariant holds.
std::vector<std::string> check_bank(const AssetBank& bank);

nlohmann::json to_json(const AssetBank& bank);
AssetBank bank_from_json(const nlohmann::json& doc);

/// Images emitted so far per category, indexed by category id.
using CategoryUsage = std::vector<std::uint64_t>;

/// Balanced category draw.
///
/// Each category has an availability weight w = min(1, assets / mean_assets).
/// Usage is normalised by that weight; the draw is restricted to categories
/// whose normalised usage is minimal, and among those picks with
/// probability proportional to w. With equal availability this is a uniform
/// draw over the least-used categories.
///
/// `eligible`, when given, restricts the candidate set (ascending id order).
Category sample_category(const AssetBank& bank, const CategoryUsage& usage, Rng& rng,
                         std::optional<std::span<const CategoryId>> eligible = std::nullopt);

}  // namespace granucount
