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

#include "granucount/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "granucount/error.hpp"

namespace granucount {
namespace {

constexpr double kNear = 1e-3;
constexpr double kAmbient = 0.55;
constexpr double kDiffuse = 0.45;
constexpr double kTextureJitter = 0.06;

struct CamVert {
  double x, y, z;
};

struct Frame {
  Vec3 eye, fwd, right, up;
  double f, cx, cy;

  explicit Frame(const CameraPose& c)
      : eye(c.eye),
        fwd(normalize(c.look_at - c.eye)),
        right(normalize(cross(fwd, {0.0, 1.0, 0.0}))),
        up(cross(right, fwd)),
        f(c.focal_pixels()),
        cx(c.image.width / 2.0),
        cy(c.image.height / 2.0) {}

  CamVert to_camera(const Vec3& p) const {
    const Vec3 d = p - eye;
    return {dot(d, right), dot(d, up), dot(d, fwd)};
  }
};

std::uint8_t channel(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Rgb8 lerp(const Rgb8& a, const Rgb8& b, double t) {
  return {channel(a.r + (b.r - a.r) * t), channel(a.g + (b.g - a.g) * t), channel(a.b + (b.b - a.b) * t)};
}

struct Target {
  Image& image;
  InstanceIdMap& ids;
  std::vector<double>& inv_depth;
};

void raster_triangle(const Frame& fr, const std::array<CamVert, 3>& v, Rgb8 color, std::uint16_t id, Target& t) {
  std::array<double, 3> sx{}, sy{}, w{};
  for (int i = 0; i < 3; ++i) {
    w[i] = 1.0 / v[i].z;
    sx[i] = fr.cx + fr.f * v[i].x * w[i];
    sy[i] = fr.cy - fr.f * v[i].y * w[i];
  }
  const double area = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sx[2] - sx[0]) * (sy[1] - sy[0]);
  if (std::abs(area) < 1e-12) return;
  const int W = t.image.width, H = t.image.height;
  const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({sx[0], sx[1], sx[2]}) - 0.5)));
  const int x1 = std::min(W - 1, static_cast<int>(std::floor(std::max({sx[0], sx[1], sx[2]}) - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({sy[0], sy[1], sy[2]}) - 0.5)));
  const int y1 = std::min(H - 1, static_cast<int>(std::floor(std::max({sy[0], sy[1], sy[2]}) - 0.5)));
  const double inv_area = 1.0 / area;
  for (int py = y0; py <= y1; ++py) {
    const double y = py + 0.5;
    for (int px = x0; px <= x1; ++px) {
      const double x = px + 0.5;
      const double b0 = ((sx[1] - x) * (sy[2] - y) - (sx[2] - x) * (sy[1] - y)) * inv_area;
      const double b1 = ((sx[2] - x) * (sy[0] - y) - (sx[0] - x) * (sy[2] - y)) * inv_area;
      const double b2 = 1.0 - b0 - b1;
      if (b0 < 0.0 || b1 < 0.0 || b2 < 0.0) continue;
      const double iz = b0 * w[0] + b1 * w[1] + b2 * w[2];
      const std::size_t k = static_cast<std::size_t>(py) * W + px;
      if (iz <= t.inv_depth[k]) continue;
      t.inv_depth[k] = iz;
      t.ids.ids[k] = id;
      auto* p = t.image.at(px, py);
      p[0] = color.r;
      p[1] = color.g;
      p[2] = color.b;
    }
  }
}

/// Sutherland-Hodgman against z = kNear, then a fan.
void clip_and_raster(const Frame& fr, const std::array<CamVert, 3>& tri, Rgb8 color, std::uint16_t id, Target& t) {
  std::vector<CamVert> poly;
  for (int i = 0; i < 3; ++i) {
    const auto& a = tri[i];
    const auto& b = tri[(i + 1) % 3];
    const bool ain = a.z >= kNear, bin = b.z >= kNear;
    if (ain) poly.push_back(a);
    if (ain != bin) {
      const double s = (kNear - a.z) / (b.z - a.z);
      poly.push_back({a.x + (b.x - a.x) * s, a.y + (b.y - a.y) * s, kNear});
    }
  }
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) raster_triangle(fr, {poly[0], poly[i], poly[i + 1]}, color, id, t);
}

template <class T>
T read_header_int(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return static_cast<T>(std::stol(tok));
  }
  throw Error("image header truncated");
}

}  // namespace

Rgb8 background_color(const Background& bg, const CameraPose& camera, int row) {
  const Frame fr(camera);
  const double v = (row + 0.5 - fr.cy) / fr.f;
  const Vec3 dir = fr.fwd - fr.up * v;
  const double elev = std::asin(std::clamp(dir.y / norm(dir), -1.0, 1.0));
  const double t = std::abs(elev) / (std::numbers::pi / 2);
  return elev >= 0.0 ? lerp(bg.sky_horizon, bg.sky_zenith, t) : lerp(bg.ground_horizon, bg.ground_near, t);
}

RenderResult render(const SceneGraph& scene, const CameraPose& camera) {
  const int W = camera.image.width, H = camera.image.height;
  RenderResult out{Image(W, H), InstanceIdMap(W, H)};
  for (int y = 0; y < H; ++y) {
    const Rgb8 c = background_color(scene.background, camera, y);
    for (int x = 0; x < W; ++x) {
      auto* p = out.image.at(x, y);
      p[0] = c.r;
      p[1] = c.g;
      p[2] = c.b;
    }
  }
  std::vector<double> inv_depth(static_cast<std::size_t>(W) * H, 0.0);
  Target target{out.image, out.ids, inv_depth};
  const Frame fr(camera);
  const double el = scene.background.light_elevation, az = scene.background.light_azimuth;
  const Vec3 light{std::cos(el) * std::cos(az), std::sin(el), std::cos(el) * std::sin(az)};

  for (const auto& inst : scene.instances) {
    const Mesh mesh = inst.world_mesh();
    const Rgb8 base = palette_entry(inst.attributes.color).rgb;
    const Vec3 centre = inst.placement.position;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      const Vec3 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
      const Vec3 cr = cross(b - a, c - a);
      const double len = norm(cr);
      if (len < 1e-15) continue;
      Vec3 n = cr / len;
      if (dot(n, (a + b + c) / 3.0 - centre) < 0.0) n = n * -1.0;
      const double u = static_cast<double>(derive_seed({inst.texture_seed, t}) >> 11) * 0x1.0p-53;
      const double jitter = 1.0 + kTextureJitter * (2.0 * u - 1.0);
      const double shade = (kAmbient + kDiffuse * std::max(0.0, dot(n, light))) * jitter;
      const Rgb8 color{channel(base.r * shade), channel(base.g * shade), channel(base.b * shade)};
      clip_and_raster(fr, {fr.to_camera(a), fr.to_camera(b), fr.to_camera(c)}, color, inst.instance_id, target);
    }
  }
  return out;
}

PixelCounts pixel_counts(const InstanceIdMap& ids, std::size_t n_instances) {
  PixelCounts counts(n_instances + 1, 0);
  for (auto id : ids.ids) {
    if (id >= counts.size()) counts.resize(id + 1, 0);
    ++counts[id];
  }
  return counts;
}

std::vector<InstanceRecord> AnnotationSet::records() const {
  std::vector<InstanceRecord> out;
  out.reserve(instances.size());
  for (const auto& a : instances) {
    out.push_back({a.instance_id, a.role, a.category, a.instance_type, a.attributes, a.bbox2d, a.visible_pixels});
  }
  return out;
}

AnnotationSet derive_annotations(const InstanceIdMap& ids, const SceneGraph& scene, const CameraPose& camera) {
  (void)camera;
  const std::size_t n = scene.instances.size();
  const int W = ids.width, H = ids.height;
  struct Acc {
    std::uint32_t count = 0;
    double sx = 0.0, sy = 0.0;
    Box2i box{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), -1, -1};
    std::vector<std::uint32_t> runs;
    std::size_t fg_end = 0;  // one past the last foreground pixel
  };
  std::vector<Acc> acc(n + 1);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const auto id = ids.at(x, y);
      if (id == 0) continue;
      if (id > n) throw Error("derive_annotations: id map holds id " + std::to_string(id) + " beyond scene size");
      auto& a = acc[id];
      ++a.count;
      a.sx += x;
      a.sy += y;
      a.box = {std::min(a.box.xmin, x), std::min(a.box.ymin, y), std::max(a.box.xmax, x), std::max(a.box.ymax, y)};
      const std::size_t k = static_cast<std::size_t>(y) * W + x;
      if (!a.runs.empty() && a.fg_end == k) {
        ++a.runs.back();
      } else {
        a.runs.push_back(static_cast<std::uint32_t>(k - a.fg_end));
        a.runs.push_back(1);
      }
      a.fg_end = k + 1;
    }
  }
  const std::size_t total = static_cast<std::size_t>(W) * H;
  AnnotationSet out;
  out.width = W;
  out.height = H;
  for (const auto& inst : scene.instances) {
    auto& a = acc.at(inst.instance_id);
    if (a.count == 0) {
      throw Error("derive_annotations: instance " + std::to_string(inst.instance_id) + " has no visible pixel");
    }
    if (a.fg_end < total) a.runs.push_back(static_cast<std::uint32_t>(total - a.fg_end));
    InstanceAnnotation ann;
    ann.instance_id = inst.instance_id;
    ann.asset = inst.asset;
    ann.role = inst.role;
    ann.category = inst.category;
    ann.instance_type = inst.instance_type;
    ann.attributes = inst.attributes;
    ann.center = {a.sx / a.count, a.sy / a.count};
    ann.bbox2d = a.box;
    ann.bbox3d = inst.box_corners();
    ann.mask_rle = std::move(a.runs);
    ann.visible_pixels = a.count;
    out.instances.push_back(std::move(ann));
  }
  return out;
}

std::vector<std::uint32_t> encode_rle(std::span<const std::uint8_t> mask) {
  std::vector<std::uint32_t> runs;
  bool cur = false;
  std::uint32_t len = 0;
  for (auto v : mask) {
    if ((v != 0) == cur) {
      ++len;
    } else {
      runs.push_back(len);
      cur = !cur;
      len = 1;
    }
  }
  runs.push_back(len);
  return runs;
}

std::vector<std::uint8_t> decode_rle(std::span<const std::uint32_t> runs, int width, int height) {
  const std::size_t total = static_cast<std::size_t>(width) * height;
  std::vector<std::uint8_t> mask;
  mask.reserve(total);
  std::uint8_t v = 0;
  for (auto r : runs) {
    if (mask.size() + r > total) throw Error("decode_rle: runs exceed " + std::to_string(total) + " pixels");
    mask.insert(mask.end(), r, v);
    v ^= 1;
  }
  if (mask.size() != total) {
    throw Error("decode_rle: runs cover " + std::to_string(mask.size()) + " of " + std::to_string(total) + " pixels");
  }
  return mask;
}

nlohmann::json to_json(const AnnotationSet& set) {
  auto instances = nlohmann::json::array();
  for (const auto& a : set.instances) {
    auto corners = nlohmann::json::array();
    for (const auto& c : a.bbox3d) corners.push_back({c.x, c.y, c.z});
    instances.push_back({{"instance_id", a.instance_id},
                         {"asset_id", a.asset.value},
                         {"role", to_string(a.role)},
                         {"category_id", a.category.value},
                         {"instance_type_id", a.instance_type.value},
                         {"size", to_string(a.attributes.size)},
                         {"color", to_string(a.attributes.color)},
                         {"center_point", a.center},
                         {"bbox2d", {a.bbox2d.xmin, a.bbox2d.ymin, a.bbox2d.xmax, a.bbox2d.ymax}},
                         {"bbox3d", corners},
                         {"mask_rle", a.mask_rle},
                         {"visible_pixels", a.visible_pixels}});
  }
  return {{"width", set.width}, {"height", set.height}, {"instances", instances}};
}

AnnotationSet annotations_from_json(const nlohmann::json& doc) {
  AnnotationSet set;
  try {
    set.width = doc.at("width").get<int>();
    set.height = doc.at("height").get<int>();
    for (const auto& j : doc.at("instances")) {
      InstanceAnnotation a;
      a.instance_id = j.at("instance_id").get<std::uint16_t>();
      a.asset = AssetId(j.at("asset_id").get<std::uint32_t>());
      a.role = role_from_string(j.at("role").get<std::string>());
      a.category = CategoryId(j.at("category_id").get<std::uint32_t>());
      a.instance_type = InstanceTypeId(j.at("instance_type_id").get<std::uint32_t>());
      a.attributes = {size_mode_from_string(j.at("size").get<std::string>()),
                      color_from_string(j.at("color").get<std::string>())};
      a.center = j.at("center_point").get<std::array<double, 2>>();
      const auto b = j.at("bbox2d").get<std::array<int, 4>>();
      a.bbox2d = {b[0], b[1], b[2], b[3]};
      const auto& corners = j.at("bbox3d");
      for (std::size_t i = 0; i < 8; ++i) {
        a.bbox3d[i] = {corners.at(i).at(0).get<double>(), corners.at(i).at(1).get<double>(),
                       corners.at(i).at(2).get<double>()};
      }
      a.mask_rle = j.at("mask_rle").get<std::vector<std::uint32_t>>();
      a.visible_pixels = j.at("visible_pixels").get<std::uint32_t>();
      set.instances.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("annotations: ") + e.what());
  }
  return set;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
  if (!out) throw Error("short write to " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6") throw Error(path.string() + ": not a binary PPM");
  const int w = read_header_int<int>(in), h = read_header_int<int>(in), maxval = read_header_int<int>(in);
  if (maxval != 255 || w <= 0 || h <= 0) throw Error(path.string() + ": unsupported PPM header");
  in.get();
  Image img(w, h);
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (!in) throw Error(path.string() + ": truncated pixel data");
  return img;
}

void write_pgm16(const std::filesystem::path& path, const InstanceIdMap& ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << ids.width << " " << ids.height << "\n65535\n";
  std::vector<char> buf(ids.ids.size() * 2);
  for (std::size_t i = 0; i < ids.ids.size(); ++i) {
    buf[2 * i] = static_cast<char>(ids.ids[i] >> 8);
    buf[2 * i + 1] = static_cast<char>(ids.ids[i] & 0xff);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("short write to " + path.string());
}

InstanceIdMap read_pgm16(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error(path.string() + ": not a binary PGM");
  const int w = read_header_int<int>(in), h = read_header_int<int>(in), maxval = read_header_int<int>(in);
  if (maxval != 65535 || w <= 0 || h <= 0) throw Error(path.string() + ": unsupported PGM header");
  in.get();
  InstanceIdMap ids(w, h);
  std::vector<unsigned char> buf(ids.ids.size() * 2);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw Error(path.string() + ": truncated pixel data");
  for (std::size_t i = 0; i < ids.ids.size(); ++i) {
    ids.ids[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
  }
  return ids;
}

}  // namespace granucount
