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

// Edit-filter loop with pluggable editor and inspector, a pixel-rule
// reference inspector and a fault-injecting editor.

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "granucount/render.hpp"

namespace granucount {

enum class Decision : std::uint8_t { Pass, Fail };

enum class ReasonCode : std::uint8_t {
  LayoutDrift,
  CountChange,
  IdentityCorruption,
  BackgroundHallucination,
  SevereArtifact,
};

std::string_view to_string(Decision d);
std::string_view to_string(ReasonCode r);
ReasonCode reason_from_string(std::string_view s);

struct Verdict {
  Decision decision = Decision::Pass;
  std::set<ReasonCode> reasons;

  static Verdict pass() { return {}; }
  void fail(ReasonCode r) {
    decision = Decision::Fail;
    reasons.insert(r);
  }
  bool passed() const { return decision == Decision::Pass; }
};

nlohmann::json to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& doc);

/// Every numeric rule of the reference inspector and the fault editor.
struct QaTolerances {
  int background_match = 20;          // max-channel distance to the row background
  double erased_fraction = 0.5;       // share of background-like mask pixels that counts as erasure
  int min_visible = 8;                // palette-like pixels an instance must keep
  double palette_residual = 40.0;     // RGB distance to the nearest shaded palette colour
  int blob_min_area = 32;             // palette-like background component that counts as an insertion
  double drift_pixels = 3.0;          // centroid shift
  int drift_margin = 12;              // window around the prototype box
  int severe_delta = 64;              // max-channel change that counts as heavy damage
  double severe_fraction = 0.25;      // share of heavily changed pixels
  int noise_bound = 8;                // benign editor noise, per channel
};

/// Prototype render plus what the inspector may look at.
struct QaSample {
  std::string sample_id;
  Image prototype;
  InstanceIdMap ids;
};

Verdict reference_inspector(const Image& prototype, const InstanceIdMap& ids, const Image& edited,
                            const QaTolerances& tol = {});

enum class FaultKind : std::uint8_t { None, Erase, Insert, Shift, Recolor };
std::string_view to_string(FaultKind f);

struct FaultSpec {
  FaultKind kind = FaultKind::None;
  std::uint16_t instance = 0;  // Erase, Shift, Recolor
};

struct EditResult {
  Image edited;
  FaultSpec fault;
};

/// Applies the fault plus bounded noise. Throws Error for an instance id
/// absent from the id map, or when no background region can hold a blob.
EditResult perturbation_editor(const QaSample& sample, const FaultSpec& fault, Rng& rng, const QaTolerances& tol = {});

class Editor {
 public:
  virtual ~Editor() = default;
  /// Deterministic in (sample, iteration, seed).
  virtual EditResult edit(const QaSample& sample, int iteration, std::uint64_t seed) const = 0;
};

class Inspector {
 public:
  virtual ~Inspector() = default;
  virtual Verdict inspect(const QaSample& sample, const Image& edited) const = 0;
};

class IdentityEditor final : public Editor {
 public:
  EditResult edit(const QaSample& sample, int, std::uint64_t) const override { return {sample.prototype, {}}; }
};

/// Injects one uniformly chosen fault with probability `fault_rate`, else
/// benign noise.
class PerturbationEditor final : public Editor {
 public:
  explicit PerturbationEditor(double fault_rate = 0.2, QaTolerances tol = {}) : rate_(fault_rate), tol_(tol) {}
  EditResult edit(const QaSample& sample, int iteration, std::uint64_t seed) const override;

 private:
  double rate_;
  QaTolerances tol_;
};

class ReferenceInspector final : public Inspector {
 public:
  explicit ReferenceInspector(QaTolerances tol = {}) : tol_(tol) {}
  Verdict inspect(const QaSample& s, const Image& edited) const override {
    return reference_inspector(s.prototype, s.ids, edited, tol_);
  }

 private:
  QaTolerances tol_;
};

/// Editor seed for a sample at an iteration (1-based).
std::uint64_t edit_seed(const std::string& sample_id, int iteration);

struct IterationStats {
  int iteration = 0;
  std::size_t inspected = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
};

struct QaOutcome {
  std::string sample_id;
  int accepted_at = 0;  // 0 when discarded
  Image edited;
  std::vector<FaultSpec> faults;  // one per iteration run
  std::vector<Verdict> verdicts;
  std::optional<std::string> quarantine;  // editor/inspector error
};

struct QaReport {
  std::vector<IterationStats> iterations;
  std::vector<std::string> accepted;
  std::vector<std::string> discarded;
  std::vector<std::pair<std::string, std::string>> quarantined;  // id, diagnostic (also in discarded)
};

nlohmann::json to_json(const QaReport& r);

/// Per-sample outcomes in input order plus the reduced report. `jobs` <= 1
/// runs serially.
std::pair<std::vector<QaOutcome>, QaReport> run_edit_filter_loop(const std::vector<QaSample>& samples,
                                                                 const Editor& editor, const Inspector& inspector,
                                                                 int max_iters = 3, int jobs = 1);

}  // namespace granucount
