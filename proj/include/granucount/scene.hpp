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

// Recipe + profile draw -> concrete 3D layout and camera.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "granucount/geometry.hpp"
#include "granucount/levels.hpp"
#include "granucount/profiles.hpp"

namespace granucount {

inline constexpr int kPlacementAttempts = 200;
inline constexpr int kSceneRetries = 20;
inline constexpr int kCameraRetries = 50;
inline constexpr int kMinVisiblePixels = 8;
inline constexpr int kDefaultImageSize = 512;

struct Placement {
  Vec3 position;  // object centre; y-up, ground plane y = 0
  double yaw = 0.0;
  double scale = 1.0;
};

struct SceneInstance {
  std::uint16_t instance_id = 0;  // 1-based
  AssetId asset;
  GroupRole role = GroupRole::Target;
  CategoryId category;
  InstanceTypeId instance_type;
  AttributeTuple attributes;
  ShapeFamily family = ShapeFamily::Box;
  ShapeParams shape;
  std::uint64_t texture_seed = 0;
  Placement placement;

  Vec3 half() const { return half_extents(shape, placement.scale); }
  double radius() const { return norm(half()); }
  /// Tessellated mesh in world coordinates.
  Mesh world_mesh() const;
  /// Corners of the oriented bounding box in world coordinates.
  std::array<Vec3, 8> box_corners() const;
};

struct SceneGraph {
  std::vector<SceneInstance> instances;
  Background background;
  double region_half = 0.0;  // placement region is [-h, h] x [-h, h] on the ground
};

struct ImageSize {
  int width = kDefaultImageSize;
  int height = kDefaultImageSize;
  bool operator==(const ImageSize&) const = default;
};

struct CameraPose {
  Vec3 eye;
  Vec3 look_at;
  double focal_length = 35.0;  // mm, 36 mm wide sensor
  ImageSize image;

  double focal_pixels() const { return focal_length / 36.0 * image.width; }
  double distance() const { return norm(eye - look_at); }
  double height() const { return eye.y; }
  /// Angle below the horizon of the viewing direction, degrees.
  double depression_deg() const;
};

/// Continuous pixel coordinates of a world point; nullopt behind the camera.
std::optional<std::array<double, 2>> project(const CameraPose& camera, const Vec3& world);

/// Sizes span [object_size_min, object_size_max] for Small; Large starts
/// above both the small band and 1.6x its floor so the bands never meet.
Range size_band(SizeMode mode, const ProfileDraw& draw);

/// Rejection-sampling layout. Throws Error naming the violated constraint
/// when no layout is found within the retry budget.
SceneGraph place_objects(const SceneRecipe& recipe, const AssetBank& bank, const ProfileDraw& draw, Rng& rng);

/// Fraction of instances whose projected 2D box (over mesh vertices) lies
/// fully in frame, inclusive bounds.
double coverage(const SceneGraph& scene, const CameraPose& camera);

/// Closest fraction k/n to [lo, hi] (itself when one lies inside).
double nearest_feasible_coverage(std::size_t n, double lo, double hi);

/// Pose within every camera range whose coverage lies in the draw's
/// coverage band; instances not fully in frame must still overlap it.
/// Throws Error when no such pose is found in max_retries.
CameraPose sample_camera(const ProfileDraw& draw, const SceneGraph& scene, ImageSize image, Rng& rng,
                         int max_retries = kCameraRetries);

/// Pixel count per instance id (index 0 = background).
using PixelCounts = std::vector<std::uint32_t>;
using RenderIdsFn = std::function<PixelCounts(const SceneGraph&, const CameraPose&)>;

bool enforce_visibility(const SceneGraph& scene, const CameraPose& camera, const RenderIdsFn& render_fn,
                        int min_pixels = kMinVisiblePixels);

/// Exhaustive pairwise spacing, ground contact, id and cap checks.
std::vector<std::string> check_scene(const SceneGraph& scene, double min_distance_ratio);

nlohmann::json to_json(const SceneGraph& scene);
SceneGraph scene_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const CameraPose& camera);
CameraPose camera_from_json(const nlohmann::json& doc);

}  // namespace granucount
