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

#include "granucount/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "granucount/error.hpp"

namespace granucount {
namespace {

using K = ProfileKey;

[[noreturn]] void reject(K key, const std::string& why) {
  throw Error("profile key '" + std::string(key_name(key)) + "': " + why);
}

void check(const ConfigProfile& p) {
  for (std::size_t i = 0; i < kProfileKeyCount; ++i) {
    const auto key = static_cast<K>(i);
    const auto& r = p[key];
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) reject(key, "non-finite value");
    if (r.lo > r.hi) reject(key, "inverted range [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
  }
  auto positive = [&](K k) {
    if (p[k].lo <= 0.0) reject(k, "must be positive");
  };
  for (K k : {K::ObjectSizeMin, K::DensityFactor, K::MinDistanceRatio, K::CameraDistanceMin, K::CameraHeightMin,
              K::FocalLengthMin}) {
    positive(k);
  }
  if (p[K::MinObjectsPerGroup].lo < 1.0) reject(K::MinObjectsPerGroup, "must be at least 1");
  if (p[K::MaxTotalObjects].lo < 1.0) reject(K::MaxTotalObjects, "must be at least 1");
  if (!(p[K::ObjectSizeMin].hi < p[K::ObjectSizeMax].lo)) {
    reject(K::ObjectSizeMin, "range must lie strictly below object_size_max");
  }
  for (K k : {K::CameraAngleMin, K::CameraAngleMax}) {
    if (p[k].lo < 0.0 || p[k].hi > 90.0) reject(k, "angles must lie in [0, 90] degrees");
  }
  for (K k : {K::CoverageMin, K::CoverageMax}) {
    if (p[k].lo < 0.0 || p[k].hi > 1.0) reject(k, "coverage must lie in [0, 1]");
  }
  const std::pair<K, K> ordered[] = {{K::CameraDistanceMin, K::CameraDistanceMax},
                                     {K::CameraHeightMin, K::CameraHeightMax},
                                     {K::CameraAngleMin, K::CameraAngleMax},
                                     {K::FocalLengthMin, K::FocalLengthMax},
                                     {K::CoverageMin, K::CoverageMax}};
  for (auto [lo, hi] : ordered) {
    if (p[lo].hi > p[hi].lo) reject(lo, "range overlaps " + std::string(key_name(hi)));
  }
}

}  // namespace

int ProfileDraw::min_objects_per_group() const {
  return static_cast<int>(std::lround((*this)[K::MinObjectsPerGroup]));
}

int ProfileDraw::max_total_objects() const { return static_cast<int>(std::lround((*this)[K::MaxTotalObjects])); }

ConfigProfile default_profile() {
  ConfigProfile p;
  p[K::MinObjectsPerGroup] = {3, 6};
  p[K::MaxTotalObjects] = {8, 16};
  p[K::ObjectSizeMin] = {1.00, 1.20};
  p[K::ObjectSizeMax] = {1.40, 1.70};
  p[K::DensityFactor] = {1.00, 1.10};
  p[K::MinDistanceRatio] = {0.86, 0.94};
  p[K::CameraDistanceMin] = {4.8, 6.0};
  p[K::CameraDistanceMax] = {10.0, 13.5};
  p[K::CameraHeightMin] = {1.0, 2.0};
  p[K::CameraHeightMax] = {8.0, 12.0};
  p[K::CameraAngleMin] = {10.0, 16.0};
  p[K::CameraAngleMax] = {50.0, 65.0};
  p[K::FocalLengthMin] = {24.0, 32.0};
  p[K::FocalLengthMax] = {60.0, 78.0};
  p[K::CoverageMin] = {0.78, 0.82};
  p[K::CoverageMax] = {0.92, 0.94};
  return p;
}

ConfigProfile load_profile(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error("profile: document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kProfileKeyNames.begin(), kProfileKeyNames.end(), key) == kProfileKeyNames.end()) {
      throw Error("profile key '" + key + "': unknown key");
    }
  }
  ConfigProfile p;
  for (std::size_t i = 0; i < kProfileKeyCount; ++i) {
    const auto key = static_cast<K>(i);
    const auto name = std::string(key_name(key));
    if (!doc.contains(name)) reject(key, "missing");
    const auto& v = doc.at(name);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      reject(key, "expected a two-element numeric array");
    }
    p[key] = {v[0].get<double>(), v[1].get<double>()};
  }
  check(p);
  return p;
}

nlohmann::json to_json(const ConfigProfile& profile) {
  nlohmann::json doc = nlohmann::json::object();
  for (std::size_t i = 0; i < kProfileKeyCount; ++i) {
    const auto& r = profile.ranges[i];
    doc[std::string(kProfileKeyNames[i])] = {r.lo, r.hi};
  }
  return doc;
}

ProfileDraw draw(const ConfigProfile& profile, std::uint64_t seed) {
  Rng rng(seed);
  ProfileDraw d;
  d.seed = seed;
  for (std::size_t i = 0; i < kProfileKeyCount; ++i) {
    const auto& r = profile.ranges[i];
    d.values[i] = r.lo == r.hi ? r.lo : std::clamp(rng.uniform(r.lo, r.hi), r.lo, r.hi);
  }
  return d;
}

ConfigProfile dense_variant(const ConfigProfile& profile, const DenseScaling& scaling) {
  ConfigProfile p = profile;
  const double cap = kMaxInstances;
  auto& total = p[K::MaxTotalObjects];
  total = {std::min(cap, total.lo * scaling.count), std::min(cap, total.hi * scaling.count)};
  auto& spacing = p[K::MinDistanceRatio];
  spacing = {spacing.lo * scaling.spacing, spacing.hi * scaling.spacing};
  auto& density = p[K::DensityFactor];
  density = {density.lo * scaling.density, density.hi * scaling.density};
  check(p);
  return p;
}

}  // namespace granucount
