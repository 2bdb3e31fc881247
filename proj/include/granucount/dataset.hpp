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

// On-disk dataset: job planning, parallel scene execution, validation,
// statistics and scoring.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "granucount/eval.hpp"
#include "granucount/levels.hpp"
#include "granucount/profiles.hpp"
#include "granucount/scene.hpp"
#include "granucount/splits.hpp"
#include "granucount/taxonomy.hpp"

namespace granucount {

/// Scenes per (Train-Normal, Train-Dense, TestA, TestB).
struct LevelCounts {
  std::array<int, 4> v{0, 0, 0, 0};

  int train_normal() const { return v[0]; }
  int train_dense() const { return v[1]; }
  int test_a() const { return v[2]; }
  int test_b() const { return v[3]; }
  int total() const { return v[0] + v[1] + v[2] + v[3]; }
  bool operator==(const LevelCounts&) const = default;
};

/// The reference per-level image table.
const std::map<LevelTag, LevelCounts>& reference_level_counts();

/// ceil(n * factor) per cell of the reference table.
std::map<LevelTag, LevelCounts> scaled_reference_counts(double factor);

/// Train total split at `normal_per_dense`:1, rounded to nearest.
LevelCounts counts_from_train(int train, int test_a, int test_b, double normal_per_dense = 4.0);

struct GenerationJob {
  std::uint64_t global_seed = 0;
  BankParams bank;
  double asset_holdout = 0.10;
  double category_holdout = 0.10;
  std::map<LevelTag, LevelCounts> counts;
  ConfigProfile profile = default_profile();
  DenseScaling dense;
  ImageSize image;
  int placement_attempts = 8;
  int replacement_recipes = 2;
  double max_failure_rate = 0.05;
};

/// Job echo stored in the manifest; output paths and thread counts are not
/// part of it.
nlohmann::json to_json(const GenerationJob& job);
GenerationJob job_from_json(const nlohmann::json& doc);

inline constexpr std::string_view kManifestName = "manifest.json";
inline constexpr std::string_view kQueriesName = "queries.jsonl";

struct SceneEntry {
  std::string scene_id;
  LevelTag level = LevelTag::L1;
  Split split = Split::Train;
  SceneConfig config = SceneConfig::Normal;
  std::string recipe_hash;
  int replacement = 0;  // 0 = planned recipe
  std::size_t instances = 0;
  std::string dir;  // relative to the root
  std::vector<std::string> query_ids;
};

struct FailedScene {
  std::string scene_id;
  std::string diagnostic;
};

struct DatasetManifest {
  nlohmann::json job;
  std::vector<SceneEntry> scenes;
  std::vector<FailedScene> failed;
  std::size_t queries = 0;
  std::map<std::string, std::string> files;  // relative path -> sha256
  std::string content_hash;

  /// Manifest JSON without content_hash; the hash covers exactly this text.
  nlohmann::json body() const;
};

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& doc);
DatasetManifest read_manifest(const std::filesystem::path& root);

/// Scene files and queries are written before manifest.json, which is
/// renamed into place last. Throws Error when more than
/// job.max_failure_rate of the scenes fail. `log`, when set, receives one
/// line per failed scene.
DatasetManifest cmd_generate(const GenerationJob& job, const std::filesystem::path& root, int jobs = 1,
                             std::ostream* log = nullptr);

struct Violation {
  std::string kind;  // "recipe", "split", "mask", "bbox", "cap", "queries", "gt", "file", "manifest"
  std::string where;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  /// Files whose bytes differ from the manifest digest.
  std::vector<std::string> modified_files;
  bool ok() const { return violations.empty(); }
};

nlohmann::json to_json(const ValidationReport& r);

ValidationReport cmd_validate(const std::filesystem::path& root);

nlohmann::json cmd_stats(const std::filesystem::path& root);

std::vector<CountQuery> read_queries(const std::filesystem::path& root);

enum class Baseline : std::uint8_t { Oracle, Naive, Blob };
Baseline baseline_from_string(std::string_view s);

std::vector<PredictionRecord> baseline_predictions(const std::filesystem::path& root, Baseline b, int jobs = 1);

EvalReport cmd_eval(const std::filesystem::path& root, std::span<const PredictionRecord> predictions,
                    MissingPolicy policy);

}  // namespace granucount
