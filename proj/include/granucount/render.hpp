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

// Deterministic z-buffered rasterizer and the per-instance annotation suite.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "granucount/levels.hpp"
#include "granucount/scene.hpp"

namespace granucount {

struct Image {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;  // row-major RGB triples

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}
  std::uint8_t* at(int x, int y) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  bool operator==(const Image&) const = default;
};

struct InstanceIdMap {
  int width = 0, height = 0;
  std::vector<std::uint16_t> ids;  // 0 = background

  InstanceIdMap() = default;
  InstanceIdMap(int w, int h) : width(w), height(h), ids(static_cast<std::size_t>(w) * h, 0) {}
  std::uint16_t at(int x, int y) const { return ids[static_cast<std::size_t>(y) * width + x]; }
  bool operator==(const InstanceIdMap&) const = default;
};

struct RenderResult {
  Image image;
  InstanceIdMap ids;
};

/// Background colour of a row; the camera never rolls, so the sky/ground
/// gradient depends on the row alone.
Rgb8 background_color(const Background& bg, const CameraPose& camera, int row);

RenderResult render(const SceneGraph& scene, const CameraPose& camera);

/// Pixel count per id, index 0 is background.
PixelCounts pixel_counts(const InstanceIdMap& ids, std::size_t n_instances);

struct InstanceAnnotation {
  std::uint16_t instance_id = 0;
  AssetId asset;
  GroupRole role = GroupRole::Target;
  CategoryId category;
  InstanceTypeId instance_type;
  AttributeTuple attributes;
  std::array<double, 2> center{};  // visible-mask centroid
  Box2i bbox2d;
  std::array<Vec3, 8> bbox3d{};
  std::vector<std::uint32_t> mask_rle;
  std::uint32_t visible_pixels = 0;
};

struct AnnotationSet {
  int width = 0, height = 0;
  std::vector<InstanceAnnotation> instances;

  std::vector<InstanceRecord> records() const;
};

/// Throws Error for an instance with no visible pixel.
AnnotationSet derive_annotations(const InstanceIdMap& ids, const SceneGraph& scene, const CameraPose& camera);

/// Row-major alternating runs starting with a background run (possibly 0).
std::vector<std::uint32_t> encode_rle(std::span<const std::uint8_t> mask);
/// Throws Error when the runs do not cover width*height exactly.
std::vector<std::uint8_t> decode_rle(std::span<const std::uint32_t> runs, int width, int height);

nlohmann::json to_json(const AnnotationSet& a);
AnnotationSet annotations_from_json(const nlohmann::json& doc);

void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);
void write_pgm16(const std::filesystem::path& path, const InstanceIdMap& ids);
InstanceIdMap read_pgm16(const std::filesystem::path& path);

}  // namespace granucount
