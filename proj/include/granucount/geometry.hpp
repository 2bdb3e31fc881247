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

// Small vector algebra and the fixed-budget tessellations used by the
// rasterizer.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "granucount/taxonomy.hpp"

namespace granucount {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalize(const Vec3& v) { return v / norm(v); }

/// Rotation about +y by `yaw` radians.
inline Vec3 rotate_yaw(const Vec3& v, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * v.x + s * v.z, v.y, -s * v.x + c * v.z};
}

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

/// Triangle budgets per family.
inline constexpr int kEllipsoidSlices = 16;
inline constexpr int kEllipsoidStacks = 10;
inline constexpr int kCylinderSides = 24;

/// Mesh in the object frame, centred at the origin with the given half
/// extents. Every family reaches exactly ±half.y on the vertical axis.
Mesh tessellate(ShapeFamily family, const Vec3& half, double roundness);

/// Half extents of an object whose bounding-sphere diameter is `scale`.
inline Vec3 half_extents(const ShapeParams& p, double scale) {
  const Vec3 a{p.aspect_x(), p.aspect_y(), p.aspect_z()};
  return a * (0.5 * scale / norm(a));
}

}  // namespace granucount
