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

#include "granucount/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <omp.h>

#include "granucount/error.hpp"
#include "granucount/imaging.hpp"

namespace granucount {
namespace {

constexpr std::size_t kBlock = 4096;

struct Neumaier {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

template <class F>
double blocked_mean(std::span<const CountPair> pairs, F term) {
  if (pairs.empty()) throw Error("metric over an empty pair set");
  const std::size_t blocks = (pairs.size() + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks);
#pragma omp parallel for schedule(static) if (blocks > 1)
  for (std::size_t b = 0; b < blocks; ++b) {
    Neumaier acc;
    const std::size_t end = std::min(pairs.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) acc.add(term(pairs[i]));
    partial[b] = acc.value();
  }
  Neumaier total;
  for (double p : partial) total.add(p);
  return total.value() / static_cast<double>(pairs.size());
}

template <class F>
double serial_mean(std::span<const CountPair> pairs, F term) {
  if (pairs.empty()) throw Error("metric over an empty pair set");
  Neumaier acc;
  for (const auto& p : pairs) acc.add(term(p));
  return acc.value() / static_cast<double>(pairs.size());
}

double abs_err(const CountPair& p) { return std::abs(p.pred - p.gt); }
double sq_err(const CountPair& p) { return (p.pred - p.gt) * (p.pred - p.gt); }

constexpr std::array<std::string_view, 2> kPolicyNames{"error", "count-zero"};

nlohmann::json metrics_json(const LevelMetrics& m) {
  return {{"queries", m.queries}, {"mae", m.mae}, {"rmse", m.rmse}};
}

LevelMetrics metrics(const std::vector<CountPair>& pairs, std::size_t queries) {
  return {queries, mae(pairs), rmse(pairs)};
}

std::string box_text(const Box2i& b) {
  return "[" + std::to_string(b.xmin) + ", " + std::to_string(b.ymin) + ", " + std::to_string(b.xmax) + ", " +
         std::to_string(b.ymax) + "]";
}

constexpr std::string_view kAnswerRule =
    " Directly output the total number as an integer only. Do not output any other words. If unsure, guess a number.";

}  // namespace

double mae(std::span<const CountPair> pairs) { return blocked_mean(pairs, abs_err); }
double rmse(std::span<const CountPair> pairs) { return std::sqrt(blocked_mean(pairs, sq_err)); }
double mae_serial(std::span<const CountPair> pairs) { return serial_mean(pairs, abs_err); }
double rmse_serial(std::span<const CountPair> pairs) { return std::sqrt(serial_mean(pairs, sq_err)); }

std::vector<PredictionRecord> parse_predictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& what) {
      return Error("predictions line " + std::to_string(lineno) + ": " + what);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw fail("not valid JSON");
    }
    if (!j.is_object() || !j.contains("query_id") || !j.contains("count")) throw fail("expected {query_id, count}");
    if (!j["query_id"].is_string()) throw fail("query_id must be a string");
    const auto& c = j["count"];
    if (!c.is_number_integer()) throw fail("count must be an integer");
    if (c.is_number_unsigned()) {
      out.push_back({j["query_id"].get<std::string>(), static_cast<std::int64_t>(c.get<std::uint64_t>())});
    } else {
      const auto v = c.get<std::int64_t>();
      if (v < 0) throw fail("count must be non-negative");
      out.push_back({j["query_id"].get<std::string>(), v});
    }
  }
  return out;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open predictions file " + path.string());
  return parse_predictions(in);
}

void write_predictions(std::ostream& out, std::span<const PredictionRecord> preds) {
  for (const auto& p : preds) out << nlohmann::json{{"query_id", p.query_id}, {"count", p.count}}.dump() << '\n';
}

std::string_view to_string(MissingPolicy p) { return kPolicyNames[static_cast<std::size_t>(p)]; }

MissingPolicy missing_policy_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kPolicyNames.size(); ++i) {
    if (kPolicyNames[i] == s) return static_cast<MissingPolicy>(i);
  }
  throw Error("unknown missing policy '" + std::string(s) + "' (expected error or count-zero)");
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json levels = nlohmann::json::object();
  for (const auto& [k, m] : r.per_level) levels[k] = metrics_json(m);
  return {{"per_level", levels},
          {"overall", metrics_json(r.overall)},
          {"coverage", r.coverage},
          {"missing", r.missing},
          {"missing_policy", to_string(r.policy)}};
}

EvalReport evaluate(std::span<const CountQuery> queries, std::span<const PredictionRecord> predictions,
                    MissingPolicy policy) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (!index.emplace(queries[i].query_id, i).second) {
      throw Error("duplicate query_id '" + queries[i].query_id + "' in the query manifest");
    }
  }
  std::vector<const PredictionRecord*> matched(queries.size(), nullptr);
  for (const auto& p : predictions) {
    const auto it = index.find(p.query_id);
    if (it == index.end()) throw Error("prediction for unknown query_id '" + p.query_id + "'");
    if (matched[it->second]) throw Error("duplicate prediction for query_id '" + p.query_id + "'");
    matched[it->second] = &p;
  }

  EvalReport report;
  report.policy = policy;
  std::map<std::string, std::vector<CountPair>> by_level;
  std::vector<CountPair> flat;
  std::size_t l1 = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    double pred = 0.0;
    if (matched[i]) {
      pred = static_cast<double>(matched[i]->count);
    } else {
      ++report.missing;
      if (policy == MissingPolicy::Error) throw Error("no prediction for query_id '" + q.query_id + "'");
    }
    const CountPair pair{static_cast<double>(q.gt_count), pred};
    by_level[std::string(to_string(q.level))].push_back(pair);
    if (q.level == LevelTag::L2Size || q.level == LevelTag::L2Color) by_level["L2"].push_back(pair);
    flat.push_back(pair);
    if (q.level == LevelTag::L1) {
      flat.push_back(pair);
      ++l1;
    }
  }
  for (const auto& [k, pairs] : by_level) report.per_level[k] = metrics(pairs, pairs.size());
  if (!flat.empty()) report.overall = metrics(flat, flat.size() - l1);
  report.coverage = queries.empty()
                        ? 0.0
                        : static_cast<double>(queries.size() - report.missing) / static_cast<double>(queries.size());
  return report;
}

std::vector<PredictionRecord> oracle_predictions(std::span<const CountQuery> queries) {
  std::vector<PredictionRecord> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back({q.query_id, q.gt_count});
  return out;
}

std::int64_t naive_all_objects_predictor(const AnnotationSet& annotations) {
  return static_cast<std::int64_t>(annotations.instances.size());
}

std::int64_t blob_match_predictor(const Image& image, std::span<const Box2i> exemplars, const BlobTolerances& tol) {
  if (exemplars.empty()) throw Error("blob_match_predictor: at least one exemplar box is required");
  const int W = image.width, H = image.height;
  const auto bg = row_background(image);
  std::vector<std::uint8_t> fg(static_cast<std::size_t>(W) * H, 0);
  bool any = false;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const bool on = max_channel_diff(pixel(image, x, y), bg[y]) > tol.background_match;
      fg[static_cast<std::size_t>(y) * W + x] = on;
      any = any || on;
    }
  }
  if (!any) return 0;
  std::vector<std::uint32_t> labels;
  const auto comps = connected_components(fg, image, &labels);

  std::vector<const Component*> signatures;
  for (const auto& b : exemplars) {
    std::unordered_map<std::uint32_t, std::size_t> votes;
    for (int y = std::max(0, b.ymin); y <= std::min(H - 1, b.ymax); ++y) {
      for (int x = std::max(0, b.xmin); x <= std::min(W - 1, b.xmax); ++x) {
        const auto l = labels[static_cast<std::size_t>(y) * W + x];
        if (l) ++votes[l];
      }
    }
    if (votes.empty()) throw Error("blob_match_predictor: exemplar box " + box_text(b) + " holds no foreground");
    const auto best = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& c) {
      return a.second < c.second || (a.second == c.second && a.first > c.first);
    });
    signatures.push_back(&comps[best->first - 1]);
  }

  std::int64_t count = 0;
  for (const auto& c : comps) {
    if (c.area < static_cast<std::uint32_t>(tol.min_area)) continue;
    const bool match = std::any_of(signatures.begin(), signatures.end(), [&](const Component* s) {
      const double dr = c.mean_r - s->mean_r, dg = c.mean_g - s->mean_g, db = c.mean_b - s->mean_b;
      const double ratio = static_cast<double>(std::max(c.area, s->area)) / std::min(c.area, s->area);
      return std::sqrt(dr * dr + dg * dg + db * db) <= tol.color_distance && ratio <= tol.area_ratio;
    });
    count += match;
  }
  return count;
}

std::string emit_prompt(const CountQuery& q) {
  if (q.level == LevelTag::L1) {
    return "Please count all objects of category '" + q.positive_text + "' in the image." + std::string(kAnswerRule);
  }
  if (q.level == LevelTag::L4) {
    if (q.exemplar_boxes_positive.empty() || q.exemplar_boxes_negative.empty()) {
      throw Error(q.query_id + ": L4 prompt needs one positive and one negative exemplar box");
    }
    return "In the image there are two different types of objects that share the same category name '" +
           q.category + "'. Type A has an example bounding box " + box_text(q.exemplar_boxes_positive.front()) +
           ". Type B has an example bounding box " + box_text(q.exemplar_boxes_negative.front()) +
           ". Please count ONLY Type A objects and ignore Type B objects." + std::string(kAnswerRule);
  }
  if (!q.negative_text) throw Error(q.query_id + ": query at " + std::string(to_string(q.level)) + " has no negative group");
  return "Please count all objects of category '" + q.positive_text + "' in the image, and ignore objects of category '" +
         *q.negative_text + "'." + std::string(kAnswerRule);
}

}  // namespace granucount
