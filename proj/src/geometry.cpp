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

#include "granucount/geometry.hpp"

#include <numbers>

namespace granucount {
namespace {

double spow(double v, double e) { return std::copysign(std::pow(std::abs(v), e), v); }

void add_quad(Mesh& m, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
  m.triangles.push_back({a, b, c});
  m.triangles.push_back({a, c, d});
}

Mesh box(const Vec3& h) {
  Mesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back({(i & 1) ? h.x : -h.x, (i & 2) ? h.y : -h.y, (i & 4) ? h.z : -h.z});
  }
  add_quad(m, 0, 1, 3, 2);
  add_quad(m, 4, 6, 7, 5);
  add_quad(m, 0, 4, 5, 1);
  add_quad(m, 2, 3, 7, 6);
  add_quad(m, 0, 2, 6, 4);
  add_quad(m, 1, 5, 7, 3);
  return m;
}

Mesh superellipsoid(const Vec3& h, double e) {
  constexpr int S = kEllipsoidSlices, T = kEllipsoidStacks;
  Mesh m;
  m.vertices.push_back({0.0, -h.y, 0.0});
  for (int i = 1; i < T; ++i) {
    const double v = -std::numbers::pi / 2 + std::numbers::pi * i / T;
    for (int j = 0; j < S; ++j) {
      const double u = 2.0 * std::numbers::pi * j / S;
      const double cv = spow(std::cos(v), e);
      m.vertices.push_back({h.x * cv * spow(std::cos(u), e), h.y * spow(std::sin(v), e), h.z * cv * spow(std::sin(u), e)});
    }
  }
  m.vertices.push_back({0.0, h.y, 0.0});
  const auto ring = [](int i, int j) { return static_cast<std::uint32_t>(1 + (i - 1) * S + (j % S)); };
  const auto top = static_cast<std::uint32_t>(m.vertices.size() - 1);
  for (int j = 0; j < S; ++j) {
    m.triangles.push_back({0, ring(1, j + 1), ring(1, j)});
    m.triangles.push_back({top, ring(T - 1, j), ring(T - 1, j + 1)});
  }
  for (int i = 1; i < T - 1; ++i) {
    for (int j = 0; j < S; ++j) add_quad(m, ring(i, j), ring(i, j + 1), ring(i + 1, j + 1), ring(i + 1, j));
  }
  return m;
}

Mesh cylinder(const Vec3& h) {
  constexpr int N = kCylinderSides;
  Mesh m;
  m.vertices.push_back({0.0, -h.y, 0.0});
  m.vertices.push_back({0.0, h.y, 0.0});
  for (int j = 0; j < N; ++j) {
    const double u = 2.0 * std::numbers::pi * j / N;
    const double x = h.x * std::cos(u), z = h.z * std::sin(u);
    m.vertices.push_back({x, -h.y, z});
    m.vertices.push_back({x, h.y, z});
  }
  const auto lo = [](int j) { return static_cast<std::uint32_t>(2 + 2 * (j % N)); };
  const auto hi = [](int j) { return static_cast<std::uint32_t>(3 + 2 * (j % N)); };
  for (int j = 0; j < N; ++j) {
    m.triangles.push_back({0, lo(j), lo(j + 1)});
    m.triangles.push_back({1, hi(j + 1), hi(j)});
    add_quad(m, lo(j), hi(j), hi(j + 1), lo(j + 1));
  }
  return m;
}

}  // namespace

Mesh tessellate(ShapeFamily family, const Vec3& half, double roundness) {
  switch (family) {
    case ShapeFamily::Box:
      return box(half);
    case ShapeFamily::Ellipsoid:
      return superellipsoid(half, 1.0);
    case ShapeFamily::Superellipsoid:
      return superellipsoid(half, roundness);
    case ShapeFamily::Cylinder:
      return cylinder(half);
  }
  return {};
}

}  // namespace granucount
