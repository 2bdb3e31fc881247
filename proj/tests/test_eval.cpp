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

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "granucount/error.hpp"
#include "granucount/eval.hpp"
#include "support.hpp"

using namespace granucount;

namespace {

// Mean via long double accumulation in reverse order.
long double reference_mean(std::span<const CountPair> pairs, bool squared) {
  long double s = 0;
  for (std::size_t i = pairs.size(); i-- > 0;) {
    const long double d = static_cast<long double>(pairs[i].pred) - pairs[i].gt;
    s += squared ? d * d : (d < 0 ? -d : d);
  }
  return s / pairs.size();
}

CountQuery query(std::string id, LevelTag level, int gt) {
  CountQuery q;
  q.query_id = std::move(id);
  q.scene_id = "scene";
  q.level = level;
  q.gt_count = gt;
  q.category = "c";
  q.positive_text = "c";
  return q;
}

}  // namespace

TEST_CASE("metric examples") {
  const std::vector<CountPair> pairs{{10, 12}, {20, 16}};
  CHECK(mae(pairs) == doctest::Approx(3.0));
  CHECK(rmse(pairs) == doctest::Approx(std::sqrt(10.0)));
  CHECK(mae_serial(pairs) == doctest::Approx(3.0));
  const std::vector<CountPair> exact{{5, 5}, {7, 7}};
  CHECK(mae(exact) == 0.0);
  CHECK(rmse(exact) == 0.0);
  CHECK_THROWS_AS(mae(std::vector<CountPair>{}), Error);
}

TEST_CASE("metrics agree with an independent accumulator") {
  Rng rng(1);
  for (std::size_t n : {1u, 7u, 4096u, 4097u, 100000u}) {
    std::vector<CountPair> pairs(n);
    for (auto& p : pairs) {
      p.gt = static_cast<double>(rng.uniform_int(0, 250));
      p.pred = static_cast<double>(rng.uniform_int(0, 100000));
    }
    const double m = mae(pairs), r = rmse(pairs);
    const long double rm = reference_mean(pairs, false), rr = std::sqrt(reference_mean(pairs, true));
    CHECK(std::abs(m - static_cast<double>(rm)) <= 1e-12 * static_cast<double>(rm));
    CHECK(std::abs(r - static_cast<double>(rr)) <= 1e-12 * static_cast<double>(rr));
    CHECK(m == mae_serial(pairs));
    CHECK(std::abs(r - rmse_serial(pairs)) <= 1e-15 * r);
    CHECK(r >= m);
  }
}

TEST_CASE("pooled MAE weights each query once") {
  std::vector<CountPair> pairs;
  for (int i = 0; i < 6; ++i) pairs.push_back({0, 4});
  for (int i = 0; i < 2; ++i) pairs.push_back({4, 4});
  // 6 of 8 queries off by 4 with the remaining 2 exact: 24 / 8.
  CHECK(mae(pairs) == doctest::Approx(3.0));
  pairs.resize(6);
  CHECK(mae(pairs) == doctest::Approx(4.0));
}

TEST_CASE("evaluate: per-level, pooled L2 and overall") {
  const std::vector<CountQuery> qs{query("a", LevelTag::L1, 10), query("b", LevelTag::L2Size, 4),
                                   query("c", LevelTag::L2Color, 6), query("d", LevelTag::L3, 3)};
  const std::vector<PredictionRecord> ps{{"a", 12}, {"b", 4}, {"c", 2}, {"d", 4}};
  const auto r = evaluate(qs, ps, MissingPolicy::Error);
  CHECK(r.per_level.at("L1").mae == doctest::Approx(2.0));
  CHECK(r.per_level.at("L2").mae == doctest::Approx(2.0));
  CHECK(r.per_level.at("L2").queries == 2);
  CHECK(r.per_level.at("L2Color").rmse == doctest::Approx(4.0));
  CHECK(r.overall.queries == 4);
  // L1 counts twice: (2 + 2 + 0 + 4 + 1) / 5.
  CHECK(r.overall.mae == doctest::Approx(9.0 / 5.0));
  CHECK(r.coverage == 1.0);
  CHECK(r.missing == 0);
  const auto j = to_json(r);
  CHECK(j["missing_policy"] == "error");
  CHECK(j["per_level"]["L3"]["queries"] == 1);
}

TEST_CASE("evaluate: error cases") {
  const std::vector<CountQuery> qs{query("a", LevelTag::L1, 1), query("b", LevelTag::L4, 2)};
  CHECK_THROWS_WITH_AS(evaluate(qs, std::vector<PredictionRecord>{{"a", 1}, {"a", 2}, {"b", 1}}, MissingPolicy::Error),
                       doctest::Contains("duplicate prediction"), Error);
  CHECK_THROWS_WITH_AS(evaluate(qs, std::vector<PredictionRecord>{{"a", 1}, {"z", 2}, {"b", 1}}, MissingPolicy::Error),
                       doctest::Contains("unknown query_id 'z'"), Error);
  CHECK_THROWS_WITH_AS(evaluate(qs, std::vector<PredictionRecord>{{"a", 1}}, MissingPolicy::Error),
                       doctest::Contains("no prediction for query_id 'b'"), Error);
  const std::vector<CountQuery> dup{query("a", LevelTag::L1, 1), query("a", LevelTag::L1, 1)};
  CHECK_THROWS_AS(evaluate(dup, std::vector<PredictionRecord>{}, MissingPolicy::CountZero), Error);
}

TEST_CASE("evaluate: count-zero policy") {
  const std::vector<CountQuery> qs{query("a", LevelTag::L3, 5), query("b", LevelTag::L3, 3)};
  const auto r = evaluate(qs, std::vector<PredictionRecord>{{"a", 5}}, MissingPolicy::CountZero);
  CHECK(r.missing == 1);
  CHECK(r.coverage == doctest::Approx(0.5));
  CHECK(r.per_level.at("L3").mae == doctest::Approx(1.5));
  CHECK(to_json(r)["missing_policy"] == "count-zero");
  CHECK(missing_policy_from_string("count-zero") == MissingPolicy::CountZero);
  CHECK_THROWS_AS(missing_policy_from_string("skip"), Error);
}

TEST_CASE("oracle predictions score zero") {
  std::vector<CountQuery> qs;
  for (int i = 0; i < 50; ++i) qs.push_back(query("q" + std::to_string(i), kAllLevels[i % 6], i));
  const auto r = evaluate(qs, oracle_predictions(qs), MissingPolicy::Error);
  CHECK(r.overall.mae == 0.0);
  CHECK(r.overall.rmse == 0.0);
}

TEST_CASE("prediction parsing reports line numbers") {
  std::istringstream ok("{\"query_id\": \"a\", \"count\": 3}\n\n{\"query_id\": \"b\", \"count\": 0}\n");
  const auto ps = parse_predictions(ok);
  REQUIRE(ps.size() == 2);
  CHECK(ps[1].query_id == "b");
  auto fails = [](const std::string& text, const std::string& what) {
    std::istringstream in(text);
    CHECK_THROWS_WITH_AS(parse_predictions(in), doctest::Contains(what.c_str()), Error);
  };
  fails("{\"query_id\": \"a\", \"count\": 3}\n{\"query_id\": \"b\", \"count\": 2.5}\n", "line 2");
  fails("{\"query_id\": \"a\", \"count\": -1}\n", "line 1: count must be non-negative");
  fails("{\"query_id\": \"a\", \"count\": 1}\n\nnot json\n", "line 3");
  fails("{\"count\": 1}\n", "line 1");
  std::stringstream round;
  write_predictions(round, ps);
  const auto back = parse_predictions(round);
  REQUIRE(back.size() == 2);
  CHECK(back[0].count == 3);
}

TEST_CASE("prompts follow the templates") {
  auto q = query("x", LevelTag::L1, 3);
  q.positive_text = "mug";
  CHECK(emit_prompt(q) ==
        "Please count all objects of category 'mug' in the image. Directly output the total number as an integer only. "
        "Do not output any other words. If unsure, guess a number.");
  q.level = LevelTag::L2Color;
  q.positive_text = "red mug";
  CHECK_THROWS_AS(emit_prompt(q), Error);
  q.negative_text = "blue mug";
  CHECK(emit_prompt(q).find("Please count all objects of category 'red mug' in the image, and ignore objects of "
                            "category 'blue mug'.") == 0);
  q.level = LevelTag::L4;
  q.category = "mug";
  CHECK_THROWS_AS(emit_prompt(q), Error);
  q.exemplar_boxes_positive = {{1, 2, 3, 4}};
  q.exemplar_boxes_negative = {{5, 6, 7, 8}};
  const auto p = emit_prompt(q);
  CHECK(p.find("share the same category name 'mug'") != std::string::npos);
  CHECK(p.find("Type A has an example bounding box [1, 2, 3, 4]") != std::string::npos);
  CHECK(p.find("Type B has an example bounding box [5, 6, 7, 8]") != std::string::npos);
}

TEST_CASE("naive predictor counts every annotated object") {
  AnnotationSet a;
  a.instances.resize(9);
  CHECK(naive_all_objects_predictor(a) == 9);
}

TEST_CASE("blob predictor on a constructed image") {
  Image img(64, 48);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      auto* p = img.at(x, y);
      p[0] = p[1] = p[2] = static_cast<std::uint8_t>(40 + y);  // row gradient
    }
  }
  auto square = [&](int x0, int y0, int side, Rgb8 c) {
    for (int y = y0; y < y0 + side; ++y) {
      for (int x = x0; x < x0 + side; ++x) {
        auto* p = img.at(x, y);
        p[0] = c.r, p[1] = c.g, p[2] = c.b;
      }
    }
  };
  CHECK(blob_match_predictor(img, std::vector<Box2i>{{0, 0, 5, 5}}) == 0);
  const Rgb8 red{220, 30, 30}, blue{30, 30, 220};
  square(2, 2, 6, red);
  square(20, 2, 7, red);
  square(40, 20, 6, red);
  square(2, 30, 6, blue);
  square(50, 5, 2, red);  // below the minimum area
  CHECK(blob_match_predictor(img, std::vector<Box2i>{{2, 2, 7, 7}}) == 3);
  CHECK(blob_match_predictor(img, std::vector<Box2i>{{2, 30, 7, 35}}) == 1);
  CHECK(blob_match_predictor(img, std::vector<Box2i>{{2, 2, 7, 7}, {2, 30, 7, 35}}) == 4);
  CHECK_THROWS_AS(blob_match_predictor(img, std::vector<Box2i>{}), Error);
  CHECK_THROWS_AS(blob_match_predictor(img, std::vector<Box2i>{{30, 40, 33, 44}}), Error);
}
