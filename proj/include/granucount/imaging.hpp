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

// Pixel-level analysis shared by the reference inspector and the blob
// counter.

#include <cstdint>
#include <vector>

#include "granucount/render.hpp"

namespace granucount {

inline Rgb8 pixel(const Image& img, int x, int y) {
  const auto* p = img.at(x, y);
  return {p[0], p[1], p[2]};
}

inline int max_channel_diff(Rgb8 a, Rgb8 b) {
  return std::max({std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b)});
}

/// Best fit of a colour as `shade * palette[index]`.
struct PaletteMatch {
  Color color = Color::Red;
  double shade = 0.0;
  double residual = 0.0;  // Euclidean RGB distance to the fitted colour
};

PaletteMatch match_palette(Rgb8 c);

/// True for colours a lit palette surface can produce.
bool palette_like(Rgb8 c, double max_residual, double min_shade = 0.4, double max_shade = 1.15);

/// One colour per row. From an id map: the first background pixel of the
/// row, with rows lacking one filled from the nearest row that has one.
/// Without an id map: the per-row modal colour.
std::vector<Rgb8> row_background(const Image& image, const InstanceIdMap& ids);
std::vector<Rgb8> row_background(const Image& image);

struct Component {
  std::uint32_t area = 0;
  double mean_r = 0.0, mean_g = 0.0, mean_b = 0.0;
  Box2i bbox;
  double cx = 0.0, cy = 0.0;

  Rgb8 mean() const;
};

/// 4-connected components over `mask` (row-major, nonzero = set). `labels`,
/// when given, receives 1-based component indices (0 = unset).
std::vector<Component> connected_components(const std::vector<std::uint8_t>& mask, const Image& image,
                                            std::vector<std::uint32_t>* labels = nullptr);

}  // namespace granucount
