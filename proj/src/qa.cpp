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

#include "granucount/qa.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <omp.h>

#include "granucount/error.hpp"
#include "granucount/imaging.hpp"

namespace granucount {
namespace {

constexpr std::array<std::string_view, 5> kReasonNames{"LayoutDrift", "CountChange", "IdentityCorruption",
                                                       "BackgroundHallucination", "SevereArtifact"};
constexpr std::array<std::string_view, 5> kFaultNames{"None", "Erase", "Insert", "Shift", "Recolor"};

constexpr int kBlobRadius = 5;
constexpr int kBlobMinArea = 64;
constexpr int kBlobTries = 400;
constexpr double kShiftMin = 6.0;
constexpr double kShiftMax = 10.0;

struct InstancePixels {
  std::vector<std::size_t> at;  // row-major indices
  Box2i box{1 << 30, 1 << 30, -1, -1};
};

std::vector<InstancePixels> gather(const InstanceIdMap& ids) {
  std::vector<InstancePixels> out;
  for (int y = 0; y < ids.height; ++y) {
    for (int x = 0; x < ids.width; ++x) {
      const auto id = ids.at(x, y);
      if (id == 0) continue;
      if (id >= out.size()) out.resize(id + 1);
      auto& p = out[id];
      p.at.push_back(static_cast<std::size_t>(y) * ids.width + x);
      p.box = {std::min(p.box.xmin, x), std::min(p.box.ymin, y), std::max(p.box.xmax, x), std::max(p.box.ymax, y)};
    }
  }
  return out;
}

Rgb8 px(const Image& img, std::size_t k) {
  const auto* p = img.rgb.data() + 3 * k;
  return {p[0], p[1], p[2]};
}

void put(Image& img, std::size_t k, Rgb8 c) {
  auto* p = img.rgb.data() + 3 * k;
  p[0] = c.r;
  p[1] = c.g;
  p[2] = c.b;
}

std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

/// Majority palette colour over the palette-like pixels of a set.
std::optional<Color> majority_color(const Image& img, const std::vector<std::size_t>& pixels, double residual) {
  std::array<std::size_t, kPaletteSize> votes{};
  std::size_t any = 0;
  for (auto k : pixels) {
    const auto c = px(img, k);
    const auto m = match_palette(c);
    if (m.residual <= residual && m.shade >= 0.4 && m.shade <= 1.15) {
      ++votes[static_cast<std::size_t>(m.color)];
      ++any;
    }
  }
  if (any == 0) return std::nullopt;
  return static_cast<Color>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string_view to_string(Decision d) { return d == Decision::Pass ? "PASS" : "FAIL"; }
std::string_view to_string(ReasonCode r) { return kReasonNames[static_cast<std::size_t>(r)]; }
std::string_view to_string(FaultKind f) { return kFaultNames[static_cast<std::size_t>(f)]; }

ReasonCode reason_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kReasonNames.size(); ++i) {
    if (kReasonNames[i] == s) return static_cast<ReasonCode>(i);
  }
  throw Error("unknown reason code '" + std::string(s) + "'");
}

nlohmann::json to_json(const Verdict& v) {
  auto reasons = nlohmann::json::array();
  for (auto r : v.reasons) reasons.push_back(to_string(r));
  return {{"decision", to_string(v.decision)}, {"reason_codes", reasons}};
}

Verdict verdict_from_json(const nlohmann::json& doc) {
  Verdict v;
  try {
    const auto d = doc.at("decision").get<std::string>();
    if (d != "PASS" && d != "FAIL") throw Error("verdict: decision must be PASS or FAIL");
    for (const auto& r : doc.at("reason_codes")) v.reasons.insert(reason_from_string(r.get<std::string>()));
    v.decision = d == "PASS" ? Decision::Pass : Decision::Fail;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("verdict: ") + e.what());
  }
  if ((v.decision == Decision::Fail) == v.reasons.empty()) throw Error("verdict: FAIL needs reasons and PASS none");
  return v;
}

Verdict reference_inspector(const Image& prototype, const InstanceIdMap& ids, const Image& edited,
                            const QaTolerances& tol) {
  if (prototype.width != edited.width || prototype.height != edited.height || ids.width != prototype.width ||
      ids.height != prototype.height) {
    throw Error("reference_inspector: image dimensions differ");
  }
  Verdict v;
  const int W = prototype.width, H = prototype.height;
  const std::size_t total = static_cast<std::size_t>(W) * H;
  const auto bg = row_background(prototype, ids);
  auto bg_like = [&](std::size_t k) { return max_channel_diff(px(edited, k), bg[k / W]) <= tol.background_match; };
  // Palette fits are computed on first use.
  std::vector<PaletteMatch> fit_edit_cache(total), fit_proto_cache(total);
  std::vector<std::uint8_t> have_edit(total, 0), have_proto(total, 0);
  auto fit_edit = [&](std::size_t k) -> const PaletteMatch& {
    if (!have_edit[k]) {
      fit_edit_cache[k] = match_palette(px(edited, k));
      have_edit[k] = 1;
    }
    return fit_edit_cache[k];
  };
  auto fit_proto = [&](std::size_t k) -> const PaletteMatch& {
    if (!have_proto[k]) {
      fit_proto_cache[k] = match_palette(px(prototype, k));
      have_proto[k] = 1;
    }
    return fit_proto_cache[k];
  };
  auto lit = [&](const PaletteMatch& m) { return m.residual <= tol.palette_residual && m.shade >= 0.4 && m.shade <= 1.15; };

  std::size_t heavy = 0;
  for (std::size_t k = 0; k < total; ++k) heavy += max_channel_diff(px(edited, k), px(prototype, k)) > tol.severe_delta;
  if (static_cast<double>(heavy) > tol.severe_fraction * static_cast<double>(total)) v.fail(ReasonCode::SevereArtifact);

  std::vector<std::uint8_t> stray(total, 0);
  for (std::size_t k = 0; k < total; ++k) stray[k] = ids.ids[k] == 0 && !bg_like(k) && lit(fit_edit(k));
  for (const auto& c : connected_components(stray, edited)) {
    if (c.area >= static_cast<std::uint32_t>(tol.blob_min_area)) {
      v.fail(ReasonCode::BackgroundHallucination);
      break;
    }
  }

  const auto instances = gather(ids);
  for (std::size_t id = 1; id < instances.size(); ++id) {
    const auto& inst = instances[id];
    if (inst.at.empty()) continue;
    std::size_t background = 0, visible = 0;
    for (auto k : inst.at) {
      background += bg_like(k);
      visible += lit(fit_edit(k));
    }
    const auto need = std::min<std::size_t>(static_cast<std::size_t>(tol.min_visible), inst.at.size());
    if (static_cast<double>(background) > tol.erased_fraction * static_cast<double>(inst.at.size()) || visible < need) {
      v.fail(ReasonCode::CountChange);
      continue;
    }
    auto majority = [&](auto&& fit) -> std::optional<Color> {
      std::array<std::size_t, kPaletteSize> votes{};
      std::size_t any = 0;
      for (auto k : inst.at) {
        const auto& m = fit(k);
        if (!lit(m)) continue;
        ++votes[static_cast<std::size_t>(m.color)];
        ++any;
      }
      if (any == 0) return std::nullopt;
      return static_cast<Color>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    };
    const auto before = majority(fit_proto);
    const auto after = majority(fit_edit);
    if (!before) continue;
    if (after != before) {
      v.fail(ReasonCode::IdentityCorruption);
      continue;
    }
    // Centroid of the instance's colour over pixels it or the background owned.
    double px0 = 0, py0 = 0, px1 = 0, py1 = 0;
    std::size_t n0 = 0, n1 = 0;
    const int x0 = std::max(0, inst.box.xmin - tol.drift_margin), x1 = std::min(W - 1, inst.box.xmax + tol.drift_margin);
    const int y0 = std::max(0, inst.box.ymin - tol.drift_margin), y1 = std::min(H - 1, inst.box.ymax + tol.drift_margin);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const std::size_t k = static_cast<std::size_t>(y) * W + x;
        const auto owner = ids.ids[k];
        if (owner != 0 && owner != id) continue;
        auto same = [&](const PaletteMatch& m) { return m.color == *before && lit(m); };
        if (owner == id && same(fit_proto(k))) {
          px0 += x;
          py0 += y;
          ++n0;
        }
        if (same(fit_edit(k))) {
          px1 += x;
          py1 += y;
          ++n1;
        }
      }
    }
    if (n0 == 0) continue;
    if (n1 == 0) {
      v.fail(ReasonCode::CountChange);
      continue;
    }
    if (std::hypot(px1 / n1 - px0 / n0, py1 / n1 - py0 / n0) > tol.drift_pixels) v.fail(ReasonCode::LayoutDrift);
  }
  return v;
}

EditResult perturbation_editor(const QaSample& sample, const FaultSpec& fault, Rng& rng, const QaTolerances& tol) {
  const auto& proto = sample.prototype;
  const auto& ids = sample.ids;
  const int W = proto.width, H = proto.height;
  EditResult out{proto, fault};
  Image& img = out.edited;
  const auto bg = row_background(proto, ids);
  const auto instances = gather(ids);

  auto target = [&]() -> const InstancePixels& {
    if (fault.instance == 0 || fault.instance >= instances.size() || instances[fault.instance].at.empty()) {
      throw Error("perturbation_editor: " + std::string(to_string(fault.kind)) + " references instance " +
                  std::to_string(fault.instance) + ", absent from the id map");
    }
    return instances[fault.instance];
  };

  switch (fault.kind) {
    case FaultKind::None:
      break;
    case FaultKind::Erase:
      for (auto k : target().at) put(img, k, bg[k / W]);
      break;
    case FaultKind::Shift: {
      const auto& inst = target();
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double mag = rng.uniform(kShiftMin, kShiftMax);
      int dx = static_cast<int>(std::lround(mag * std::cos(angle)));
      int dy = static_cast<int>(std::lround(mag * std::sin(angle)));
      while (std::hypot(dx, dy) < kShiftMin) dx += dx >= 0 ? 1 : -1;
      for (auto k : inst.at) put(img, k, bg[k / W]);
      for (auto k : inst.at) {
        const int x = static_cast<int>(k % W) + dx, y = static_cast<int>(k / W) + dy;
        if (x < 0 || y < 0 || x >= W || y >= H) continue;
        const std::size_t q = static_cast<std::size_t>(y) * W + x;
        if (ids.ids[q] == 0 || ids.ids[q] == fault.instance) put(img, q, px(proto, k));
      }
      break;
    }
    case FaultKind::Recolor: {
      const auto& inst = target();
      const auto current = majority_color(proto, inst.at, tol.palette_residual).value_or(Color::Red);
      auto next = static_cast<Color>(rng.index(kPaletteSize - 1));
      if (next >= current) next = static_cast<Color>(static_cast<int>(next) + 1);
      const auto base = palette_entry(next).rgb;
      for (auto k : inst.at) {
        const double s = match_palette(px(proto, k)).shade;
        put(img, k, {clamp8(base.r * s), clamp8(base.g * s), clamp8(base.b * s)});
      }
      break;
    }
    case FaultKind::Insert: {
      const auto base = palette_entry(static_cast<Color>(rng.index(kPaletteSize))).rgb;
      const double s = rng.uniform(0.65, 1.0);
      const Rgb8 c{clamp8(base.r * s), clamp8(base.g * s), clamp8(base.b * s)};
      bool placed = false;
      for (int t = 0; t < kBlobTries && !placed; ++t) {
        const int cx = static_cast<int>(rng.uniform_int(kBlobRadius, W - 1 - kBlobRadius));
        const int cy = static_cast<int>(rng.uniform_int(kBlobRadius, H - 1 - kBlobRadius));
        std::vector<std::size_t> disc;
        bool clear = true;
        for (int y = cy - kBlobRadius; y <= cy + kBlobRadius && clear; ++y) {
          for (int x = cx - kBlobRadius; x <= cx + kBlobRadius; ++x) {
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) > kBlobRadius * kBlobRadius) continue;
            const std::size_t k = static_cast<std::size_t>(y) * W + x;
            if (ids.ids[k] != 0) {
              clear = false;
              break;
            }
            disc.push_back(k);
          }
        }
        if (!clear || disc.size() < static_cast<std::size_t>(kBlobMinArea)) continue;
        for (auto k : disc) put(img, k, c);
        placed = true;
      }
      if (!placed) throw Error("perturbation_editor: no background region holds a " + std::to_string(kBlobMinArea) + " px blob");
      break;
    }
  }

  const int a = tol.noise_bound;
  for (auto& ch : img.rgb) ch = clamp8(ch + static_cast<double>(rng.uniform_int(-a, a)));
  return out;
}

EditResult PerturbationEditor::edit(const QaSample& sample, int, std::uint64_t seed) const {
  Rng rng(seed);
  FaultSpec spec;
  if (rng.bernoulli(rate_)) {
    spec.kind = static_cast<FaultKind>(1 + rng.index(4));
    if (spec.kind != FaultKind::Insert) {
      std::vector<std::uint16_t> present;
      std::vector<bool> seen;
      for (auto id : sample.ids.ids) {
        if (id == 0) continue;
        if (id >= seen.size()) seen.resize(id + 1, false);
        if (!seen[id]) {
          seen[id] = true;
          present.push_back(id);
        }
      }
      if (present.empty()) {
        spec.kind = FaultKind::Insert;
      } else {
        std::sort(present.begin(), present.end());
        spec.instance = present[rng.index(present.size())];
      }
    }
  }
  return perturbation_editor(sample, spec, rng, tol_);
}

std::uint64_t edit_seed(const std::string& sample_id, int iteration) {
  return derive_seed({fnv1a(sample_id), static_cast<std::uint64_t>(iteration)});
}

nlohmann::json to_json(const QaReport& r) {
  auto iters = nlohmann::json::array();
  for (const auto& s : r.iterations) {
    iters.push_back({{"iteration", s.iteration}, {"inspected", s.inspected}, {"passed", s.passed}, {"failed", s.failed}});
  }
  auto quarantined = nlohmann::json::array();
  for (const auto& [id, why] : r.quarantined) quarantined.push_back({{"sample_id", id}, {"diagnostic", why}});
  return {{"iterations", iters}, {"accepted", r.accepted}, {"discarded", r.discarded}, {"quarantined", quarantined}};
}

std::pair<std::vector<QaOutcome>, QaReport> run_edit_filter_loop(const std::vector<QaSample>& samples,
                                                                 const Editor& editor, const Inspector& inspector,
                                                                 int max_iters, int jobs) {
  if (max_iters < 1) throw Error("run_edit_filter_loop: max_iters must be at least 1");
  std::vector<QaOutcome> outcomes(samples.size());
  const auto n = static_cast<std::int64_t>(samples.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs)) if (jobs > 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    auto& o = outcomes[static_cast<std::size_t>(i)];
    o.sample_id = s.sample_id;
    try {
      for (int it = 1; it <= max_iters; ++it) {
        auto r = editor.edit(s, it, edit_seed(s.sample_id, it));
        o.faults.push_back(r.fault);
        o.verdicts.push_back(inspector.inspect(s, r.edited));
        if (o.verdicts.back().passed()) {
          o.accepted_at = it;
          o.edited = std::move(r.edited);
          break;
        }
      }
    } catch (const std::exception& e) {
      o.accepted_at = 0;
      o.quarantine = e.what();
    }
  }

  QaReport report;
  for (int it = 1; it <= max_iters; ++it) {
    IterationStats st{it, 0, 0, 0};
    for (const auto& o : outcomes) {
      if (static_cast<int>(o.verdicts.size()) < it) continue;
      ++st.inspected;
      (o.verdicts[static_cast<std::size_t>(it - 1)].passed() ? st.passed : st.failed) += 1;
    }
    report.iterations.push_back(st);
  }
  for (const auto& o : outcomes) {
    if (o.accepted_at > 0) {
      report.accepted.push_back(o.sample_id);
    } else {
      report.discarded.push_back(o.sample_id);
      if (o.quarantine) report.quarantined.emplace_back(o.sample_id, *o.quarantine);
    }
  }
  return {std::move(outcomes), std::move(report)};
}

}  // namespace granucount
