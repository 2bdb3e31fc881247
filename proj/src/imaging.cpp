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

#include "granucount/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace granucount {

PaletteMatch match_palette(Rgb8 c) {
  struct Entry {
    Color color;
    double r, g, b, inv_norm2;
  };
  static const auto table = [] {
    std::array<Entry, kPaletteSize> t{};
    for (std::size_t i = 0; i < kPaletteSize; ++i) {
      const auto& e = kPalette[i];
      const double r = e.rgb.r, g = e.rgb.g, b = e.rgb.b;
      t[i] = {e.color, r, g, b, 1.0 / (r * r + g * g + b * b)};
    }
    return t;
  }();
  const double cr = c.r, cg = c.g, cb = c.b;
  const double c2 = cr * cr + cg * cg + cb * cb;
  std::size_t best = 0;
  double best_s = 0.0, best_res2 = 1e300;
  for (std::size_t i = 0; i < kPaletteSize; ++i) {
    const auto& e = table[i];
    const double dot = cr * e.r + cg * e.g + cb * e.b;
    const double s = std::max(0.0, dot * e.inv_norm2);
    // |c - s p|^2 = |c|^2 - 2 s c.p + s^2 |p|^2
    const double res2 = std::max(0.0, c2 - 2.0 * s * dot + s * s / e.inv_norm2);
    if (res2 < best_res2) {
      best = i;
      best_s = s;
      best_res2 = res2;
    }
  }
  return {table[best].color, best_s, std::sqrt(best_res2)};
}

bool palette_like(Rgb8 c, double max_residual, double min_shade, double max_shade) {
  const auto m = match_palette(c);
  return m.residual <= max_residual && m.shade >= min_shade && m.shade <= max_shade;
}

std::vector<Rgb8> row_background(const Image& image, const InstanceIdMap& ids) {
  std::vector<Rgb8> rows(static_cast<std::size_t>(image.height));
  std::vector<bool> have(rows.size(), false);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      if (ids.at(x, y) == 0) {
        rows[y] = pixel(image, x, y);
        have[y] = true;
        break;
      }
    }
  }
  if (std::none_of(have.begin(), have.end(), [](bool b) { return b; })) return row_background(image);
  for (int y = 0; y < image.height; ++y) {
    if (have[y]) continue;
    for (int d = 1;; ++d) {
      if (y - d >= 0 && have[y - d]) {
        rows[y] = rows[y - d];
        break;
      }
      if (y + d < image.height && have[y + d]) {
        rows[y] = rows[y + d];
        break;
      }
    }
  }
  return rows;
}

std::vector<Rgb8> row_background(const Image& image) {
  std::vector<Rgb8> rows(static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y) {
    std::map<std::uint32_t, int> hist;
    for (int x = 0; x < image.width; ++x) {
      const auto c = pixel(image, x, y);
      ++hist[(std::uint32_t{c.r} << 16) | (std::uint32_t{c.g} << 8) | c.b];
    }
    const auto mode = std::max_element(hist.begin(), hist.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    rows[y] = {static_cast<std::uint8_t>(mode->first >> 16), static_cast<std::uint8_t>(mode->first >> 8),
               static_cast<std::uint8_t>(mode->first)};
  }
  return rows;
}

Rgb8 Component::mean() const {
  auto ch = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); };
  return {ch(mean_r), ch(mean_g), ch(mean_b)};
}

std::vector<Component> connected_components(const std::vector<std::uint8_t>& mask, const Image& image,
                                            std::vector<std::uint32_t>* labels) {
  const int W = image.width, H = image.height;
  std::vector<std::uint32_t> local;
  auto& lab = labels ? *labels : local;
  lab.assign(mask.size(), 0);
  std::vector<Component> out;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || lab[start]) continue;
    const auto id = static_cast<std::uint32_t>(out.size() + 1);
    Component c;
    c.bbox = {W, H, -1, -1};
    lab[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(k % W), y = static_cast<int>(k / W);
      const auto col = pixel(image, x, y);
      ++c.area;
      c.mean_r += col.r;
      c.mean_g += col.g;
      c.mean_b += col.b;
      c.cx += x;
      c.cy += y;
      c.bbox = {std::min(c.bbox.xmin, x), std::min(c.bbox.ymin, y), std::max(c.bbox.xmax, x), std::max(c.bbox.ymax, y)};
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= W || ny >= H) return;
        const std::size_t nk = static_cast<std::size_t>(ny) * W + nx;
        if (mask[nk] && !lab[nk]) {
          lab[nk] = id;
          stack.push_back(nk);
        }
      };
      visit(x - 1, y);
      visit(x + 1, y);
      visit(x, y - 1);
      visit(x, y + 1);
    }
    c.mean_r /= c.area;
    c.mean_g /= c.area;
    c.mean_b /= c.area;
    c.cx /= c.area;
    c.cy /= c.area;
    out.push_back(c);
  }
  return out;
}

}  // namespace granucount
