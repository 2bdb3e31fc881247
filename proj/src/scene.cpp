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

#include "granucount/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "granucount/error.hpp"

namespace granucount {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kDistanceSteps = 24;
constexpr int kFocalSteps = 8;

nlohmann::json vec_json(const Vec3& v) { return {v.x, v.y, v.z}; }
Vec3 vec_from_json(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

nlohmann::json rgb_json(const Rgb8& c) { return {c.r, c.g, c.b}; }
Rgb8 rgb_from(const nlohmann::json& j) {
  return {j.at(0).get<std::uint8_t>(), j.at(1).get<std::uint8_t>(), j.at(2).get<std::uint8_t>()};
}

bool spaced(const SceneInstance& a, const SceneInstance& b, double ratio) {
  const double dx = a.placement.position.x - b.placement.position.x;
  const double dz = a.placement.position.z - b.placement.position.z;
  const double need = ratio * (a.radius() + b.radius());
  return dx * dx + dz * dz >= need * need;
}

}  // namespace

Mesh SceneInstance::world_mesh() const {
  Mesh m = tessellate(family, half(), shape.roundness());
  for (auto& v : m.vertices) v = rotate_yaw(v, placement.yaw) + placement.position;
  return m;
}

std::array<Vec3, 8> SceneInstance::box_corners() const {
  const Vec3 h = half();
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Vec3 local{(i & 1) ? h.x : -h.x, (i & 2) ? h.y : -h.y, (i & 4) ? h.z : -h.z};
    out[i] = rotate_yaw(local, placement.yaw) + placement.position;
  }
  return out;
}

double CameraPose::depression_deg() const {
  const Vec3 d = look_at - eye;
  return std::asin(std::clamp(-d.y / norm(d), -1.0, 1.0)) / kDeg;
}

std::optional<std::array<double, 2>> project(const CameraPose& camera, const Vec3& world) {
  const Vec3 fwd = normalize(camera.look_at - camera.eye);
  const Vec3 right = normalize(cross(fwd, {0.0, 1.0, 0.0}));
  const Vec3 up = cross(right, fwd);
  const Vec3 p = world - camera.eye;
  const double z = dot(p, fwd);
  if (z <= 1e-9) return std::nullopt;
  const double f = camera.focal_pixels();
  return std::array<double, 2>{camera.image.width / 2.0 + f * dot(p, right) / z,
                               camera.image.height / 2.0 - f * dot(p, up) / z};
}

Range size_band(SizeMode mode, const ProfileDraw& draw) {
  const double lo = draw[ProfileKey::ObjectSizeMin];
  const double hi = draw[ProfileKey::ObjectSizeMax];
  if (mode == SizeMode::Small) return {lo, hi};
  return {std::max(1.6 * lo, 1.05 * hi), 1.6 * hi};
}

SceneGraph place_objects(const SceneRecipe& recipe, const AssetBank& bank, const ProfileDraw& draw, Rng& rng) {
  if (recipe.total_count() > kMaxInstances) {
    throw Error("place_objects: recipe demands " + std::to_string(recipe.total_count()) + " instances; cap is " +
                std::to_string(kMaxInstances));
  }
  SceneGraph scene;
  scene.background = bank.background(recipe.background);

  std::vector<GroupRole> roles{GroupRole::Target};
  if (recipe.distractor) roles.push_back(GroupRole::Distractor);
  for (auto role : roles) {
    const auto& g = recipe.group(role);
    for (auto asset : recipe.asset_choices[static_cast<std::size_t>(role)]) {
      SceneInstance inst;
      inst.asset = asset;
      inst.role = role;
      inst.category = g.category;
      inst.instance_type = bank.asset(asset).instance_type;
      inst.attributes.size = g.attributes.size ? *g.attributes.size : (rng.bernoulli(0.5) ? SizeMode::Large : SizeMode::Small);
      inst.attributes.color = g.attributes.color ? *g.attributes.color : static_cast<Color>(rng.index(kPaletteSize));
      const auto resolved = resolve_asset(bank, asset);
      inst.family = resolved.family;
      inst.shape = resolved.params;
      inst.texture_seed = resolved.texture_seed;
      const auto band = size_band(inst.attributes.size, draw);
      inst.placement.scale = rng.uniform(band.lo, band.hi);
      scene.instances.push_back(inst);
    }
  }
  rng.shuffle(std::span(scene.instances));
  for (std::size_t i = 0; i < scene.instances.size(); ++i) scene.instances[i].instance_id = static_cast<std::uint16_t>(i + 1);

  // Footprint: the ground disk the spacing rule reserves for each object.
  const double density = draw[ProfileKey::DensityFactor];
  const double ratio = draw[ProfileKey::MinDistanceRatio];
  double footprint = 0.0;
  for (const auto& inst : scene.instances) footprint += std::numbers::pi * std::pow(ratio * inst.radius(), 2);
  scene.region_half = std::sqrt(footprint / density);

  // Largest first.
  std::vector<std::size_t> order(scene.instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scene.instances[a].radius() > scene.instances[b].radius();
  });

  std::size_t worst = 0;
  for (int retry = 0; retry < kSceneRetries; ++retry) {
    std::size_t placed = 0;
    for (; placed < order.size(); ++placed) {
      auto& inst = scene.instances[order[placed]];
      bool ok = false;
      for (int k = 0; k < kPlacementAttempts && !ok; ++k) {
        inst.placement.position = {rng.uniform(-scene.region_half, scene.region_half), inst.half().y,
                                   rng.uniform(-scene.region_half, scene.region_half)};
        ok = std::all_of(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(placed),
                         [&](std::size_t other) { return spaced(inst, scene.instances[other], ratio); });
      }
      if (!ok) break;
      inst.placement.yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    if (placed == scene.instances.size()) return scene;
    worst = std::max(worst, placed);
  }
  throw Error("place_objects: min_distance_ratio spacing unsatisfiable: placed at most " + std::to_string(worst) +
              " of " + std::to_string(scene.instances.size()) + " instances in a region of side " +
              std::to_string(2.0 * scene.region_half) + " after " + std::to_string(kSceneRetries) + " retries");
}

namespace {

struct FrameStats {
  std::size_t inside = 0;  // projected box fully in frame
  bool all_touch = true;   // every projected box overlaps the frame by kMinOverlap
};

constexpr double kMinOverlap = 2.0;

FrameStats frame_stats(const std::vector<Mesh>& meshes, const CameraPose& camera) {
  FrameStats st;
  const double W = camera.image.width, H = camera.image.height;
  for (const auto& m : meshes) {
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    bool behind = false;
    for (const auto& v : m.vertices) {
      const auto p = project(camera, v);
      if (!p) {
        behind = true;
        break;
      }
      x0 = std::min(x0, (*p)[0]);
      x1 = std::max(x1, (*p)[0]);
      y0 = std::min(y0, (*p)[1]);
      y1 = std::max(y1, (*p)[1]);
    }
    if (behind) {
      st.all_touch = false;
      continue;
    }
    if (x0 >= 0.0 && y0 >= 0.0 && x1 <= W && y1 <= H) ++st.inside;
    if (std::min(x1, W) - std::max(x0, 0.0) < kMinOverlap || std::min(y1, H) - std::max(y0, 0.0) < kMinOverlap) {
      st.all_touch = false;
    }
  }
  return st;
}

std::vector<Mesh> world_meshes(const SceneGraph& scene) {
  std::vector<Mesh> out;
  out.reserve(scene.instances.size());
  for (const auto& inst : scene.instances) out.push_back(inst.world_mesh());
  return out;
}

}  // namespace

double coverage(const SceneGraph& scene, const CameraPose& camera) {
  if (scene.instances.empty()) return 1.0;
  return static_cast<double>(frame_stats(world_meshes(scene), camera).inside) /
         static_cast<double>(scene.instances.size());
}

double nearest_feasible_coverage(std::size_t n, double lo, double hi) {
  double best = 1.0, gap = 2.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(n);
    const double d = f < lo ? lo - f : (f > hi ? f - hi : 0.0);
    if (d < gap - 1e-12) {
      gap = d;
      best = f;
    }
    if (d == 0.0) return f;
  }
  return best;
}

CameraPose sample_camera(const ProfileDraw& draw, const SceneGraph& scene, ImageSize image, Rng& rng,
                         int max_retries) {
  if (scene.instances.empty()) throw Error("sample_camera: empty scene");
  using K = ProfileKey;
  CameraPose pose;
  pose.image = image;
  for (const auto& inst : scene.instances) pose.look_at = pose.look_at + inst.placement.position;
  pose.look_at = pose.look_at / static_cast<double>(scene.instances.size());

  const std::size_t n = scene.instances.size();
  double cov_lo = draw[K::CoverageMin], cov_hi = draw[K::CoverageMax];
  if (const double f = nearest_feasible_coverage(n, cov_lo, cov_hi); f < cov_lo || f > cov_hi) cov_lo = cov_hi = f;
  const double eps = 1e-12;
  const double dmin = draw[K::CameraDistanceMin], dmax = draw[K::CameraDistanceMax];
  const double hmin = draw[K::CameraHeightMin], hmax = draw[K::CameraHeightMax];
  const double fmin = draw[K::FocalLengthMin], fmax = draw[K::FocalLengthMax];

  const auto meshes = world_meshes(scene);
  int height_misses = 0;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const double theta = rng.uniform(draw[K::CameraAngleMin], draw[K::CameraAngleMax]) * kDeg;
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Vec3 dir{std::cos(theta) * std::cos(phi), std::sin(theta), std::cos(theta) * std::sin(phi)};
    const double dj = rng.uniform(), fj = rng.uniform();
    std::vector<std::pair<double, double>> accepted;  // (distance, focal)
    for (int k = 0; k < kDistanceSteps; ++k) {
      const double d = dmin + (dmax - dmin) * (k + dj) / kDistanceSteps;
      pose.eye = pose.look_at + dir * d;
      if (pose.eye.y < hmin || pose.eye.y > hmax) {
        ++height_misses;
        continue;
      }
      for (int m = 0; m < kFocalSteps; ++m) {
        pose.focal_length = fmin + (fmax - fmin) * (m + fj) / kFocalSteps;
        const auto st = frame_stats(meshes, pose);
        const double c = static_cast<double>(st.inside) / static_cast<double>(n);
        if (st.all_touch && c >= cov_lo - eps && c <= cov_hi + eps) accepted.emplace_back(d, pose.focal_length);
      }
    }
    if (!accepted.empty()) {
      const auto [d, f] = accepted[rng.index(accepted.size())];
      pose.eye = pose.look_at + dir * d;
      pose.focal_length = f;
      return pose;
    }
  }
  throw Error("sample_camera: coverage in [" + std::to_string(cov_lo) + ", " + std::to_string(cov_hi) +
              "] not met within " + std::to_string(max_retries) + " retries (" + std::to_string(height_misses) +
              " candidate poses violated camera_height)");
}

bool enforce_visibility(const SceneGraph& scene, const CameraPose& camera, const RenderIdsFn& render_fn,
                        int min_pixels) {
  if (min_pixels <= 0) return true;
  const auto counts = render_fn(scene, camera);
  for (const auto& inst : scene.instances) {
    if (inst.instance_id >= counts.size() || counts[inst.instance_id] < static_cast<std::uint32_t>(min_pixels)) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> check_scene(const SceneGraph& scene, double min_distance_ratio) {
  std::vector<std::string> out;
  const auto& xs = scene.instances;
  if (xs.size() > static_cast<std::size_t>(kMaxInstances)) out.push_back("instance count exceeds cap");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].instance_id != i + 1) out.push_back("instance ids are not 1..N in order");
    double lowest = xs[i].world_mesh().vertices.front().y;
    for (const auto& v : xs[i].world_mesh().vertices) lowest = std::min(lowest, v.y);
    if (std::abs(lowest) > 1e-9) out.push_back("instance " + std::to_string(i + 1) + " does not rest on the ground");
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      if (!spaced(xs[i], xs[j], min_distance_ratio)) {
        out.push_back("instances " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " violate spacing");
      }
    }
  }
  return out;
}

nlohmann::json to_json(const SceneGraph& scene) {
  auto instances = nlohmann::json::array();
  for (const auto& i : scene.instances) {
    instances.push_back({{"instance_id", i.instance_id},
                         {"asset_id", i.asset.value},
                         {"role", to_string(i.role)},
                         {"category_id", i.category.value},
                         {"instance_type_id", i.instance_type.value},
                         {"size", to_string(i.attributes.size)},
                         {"color", to_string(i.attributes.color)},
                         {"family", to_string(i.family)},
                         {"shape", i.shape.v},
                         {"texture_seed", i.texture_seed},
                         {"position", vec_json(i.placement.position)},
                         {"yaw", i.placement.yaw},
                         {"scale", i.placement.scale}});
  }
  const auto& b = scene.background;
  return {{"instances", instances},
          {"background",
           {{"id", b.id.value},
            {"sky_zenith", rgb_json(b.sky_zenith)},
            {"sky_horizon", rgb_json(b.sky_horizon)},
            {"ground_horizon", rgb_json(b.ground_horizon)},
            {"ground_near", rgb_json(b.ground_near)},
            {"light_azimuth", b.light_azimuth},
            {"light_elevation", b.light_elevation}}},
          {"region_half", scene.region_half}};
}

SceneGraph scene_from_json(const nlohmann::json& doc) {
  SceneGraph s;
  try {
    for (const auto& j : doc.at("instances")) {
      SceneInstance i;
      i.instance_id = j.at("instance_id").get<std::uint16_t>();
      i.asset = AssetId(j.at("asset_id").get<std::uint32_t>());
      i.role = role_from_string(j.at("role").get<std::string>());
      i.category = CategoryId(j.at("category_id").get<std::uint32_t>());
      i.instance_type = InstanceTypeId(j.at("instance_type_id").get<std::uint32_t>());
      i.attributes = {size_mode_from_string(j.at("size").get<std::string>()),
                      color_from_string(j.at("color").get<std::string>())};
      i.family = shape_family_from_string(j.at("family").get<std::string>());
      i.shape.v = j.at("shape").get<std::array<double, 4>>();
      i.texture_seed = j.at("texture_seed").get<std::uint64_t>();
      i.placement = {vec_from_json(j.at("position")), j.at("yaw").get<double>(), j.at("scale").get<double>()};
      s.instances.push_back(i);
    }
    const auto& b = doc.at("background");
    s.background = {BackgroundId(b.at("id").get<std::uint32_t>()), rgb_from(b.at("sky_zenith")),
                    rgb_from(b.at("sky_horizon")),                  rgb_from(b.at("ground_horizon")),
                    rgb_from(b.at("ground_near")),                  b.at("light_azimuth").get<double>(),
                    b.at("light_elevation").get<double>()};
    s.region_half = doc.at("region_half").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("scene: ") + e.what());
  }
  return s;
}

nlohmann::json to_json(const CameraPose& c) {
  return {{"eye", vec_json(c.eye)},
          {"look_at", vec_json(c.look_at)},
          {"focal_length_mm", c.focal_length},
          {"image_size", {c.image.width, c.image.height}}};
}

CameraPose camera_from_json(const nlohmann::json& doc) {
  CameraPose c;
  try {
    c.eye = vec_from_json(doc.at("eye"));
    c.look_at = vec_from_json(doc.at("look_at"));
    c.focal_length = doc.at("focal_length_mm").get<double>();
    c.image = {doc.at("image_size").at(0).get<int>(), doc.at("image_size").at(1).get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("camera: ") + e.what());
  }
  return c;
}

}  // namespace granucount
