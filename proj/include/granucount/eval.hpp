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

// Count metrics, the weighted evaluation report, reference predictors and
// prompt rendering.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "granucount/levels.hpp"
#include "granucount/render.hpp"

namespace granucount {

struct CountPair {
  double gt = 0.0;
  double pred = 0.0;
};

/// Neumaier-compensated sums over fixed blocks, blocks reduced in order, so
/// the result does not depend on the thread count.
double mae(std::span<const CountPair> pairs);
double rmse(std::span<const CountPair> pairs);

/// Single-threaded references for the kernels above.
double mae_serial(std::span<const CountPair> pairs);
double rmse_serial(std::span<const CountPair> pairs);

struct PredictionRecord {
  std::string query_id;
  std::int64_t count = 0;
};

/// JSONL, one {"query_id", "count"} object per non-blank line. Errors name
/// the 1-based line.
std::vector<PredictionRecord> parse_predictions(std::istream& in);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, std::span<const PredictionRecord> preds);

enum class MissingPolicy : std::uint8_t { Error, CountZero };
std::string_view to_string(MissingPolicy p);
MissingPolicy missing_policy_from_string(std::string_view s);

struct LevelMetrics {
  std::size_t queries = 0;
  double mae = 0.0;
  double rmse = 0.0;
};

struct EvalReport {
  /// L1, L2Size, L2Color, L3, L4, L5 plus the pooled "L2"; levels without
  /// queries are absent.
  std::map<std::string, LevelMetrics> per_level;
  LevelMetrics overall;  // L1 pairs counted twice; `queries` is the unweighted count
  double coverage = 0.0;
  std::size_t missing = 0;
  MissingPolicy policy = MissingPolicy::Error;
};

nlohmann::json to_json(const EvalReport& r);

EvalReport evaluate(std::span<const CountQuery> queries, std::span<const PredictionRecord> predictions,
                    MissingPolicy policy = MissingPolicy::Error);

/// Ground truth echoed back.
std::vector<PredictionRecord> oracle_predictions(std::span<const CountQuery> queries);

/// |S+| + |S-|: every annotated instance.
std::int64_t naive_all_objects_predictor(const AnnotationSet& annotations);

struct BlobTolerances {
  int background_match = 20;  // max-channel distance to the row background
  int min_area = 8;
  double color_distance = 60.0;  // RGB distance between component means
  double area_ratio = 4.0;       // max of a/b and b/a
};

/// Counts foreground components whose (mean colour, area) lies within
/// tolerance of some exemplar's component. Throws Error with no exemplars or
/// an exemplar box holding no foreground.
std::int64_t blob_match_predictor(const Image& image, std::span<const Box2i> exemplars,
                                  const BlobTolerances& tol = {});

/// Evaluation prompt for a query. Throws Error for an L4 query without a
/// positive and a negative exemplar box.
std::string emit_prompt(const CountQuery& query);

}  // namespace granucount
