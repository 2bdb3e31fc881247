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

#include <fstream>
#include <map>
#include <sstream>

#include "granucount/dataset.hpp"
#include "granucount/error.hpp"
#include "granucount/hash.hpp"
#include "support.hpp"

using namespace granucount;
namespace fs = std::filesystem;

namespace {

GenerationJob small_job(std::uint64_t seed) {
  GenerationJob job;
  job.global_seed = seed;
  job.bank = {derive_seed({seed, 0}), 3, 4, 2, 6, 12};
  for (auto l : kAllLevels) job.counts[l] = {{2, 1, 1, 1}};
  job.image = {128, 128};
  return job;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p);
  for (const auto& l : lines) out << l << '\n';
}

// Per scene: instances per role, read straight from annotations.json.
std::map<std::string, std::array<int, 2>> role_counts(const fs::path& root) {
  std::map<std::string, std::array<int, 2>> out;
  const auto manifest = nlohmann::json::parse(std::ifstream(root / "manifest.json"));
  for (const auto& s : manifest.at("scenes")) {
    const auto ann = nlohmann::json::parse(std::ifstream(root / s.at("dir").get<std::string>() / "annotations.json"));
    std::array<int, 2> c{0, 0};
    for (const auto& a : ann.at("instances")) ++c[a.at("role") == "target" ? 0 : 1];
    out[s.at("scene_id").get<std::string>()] = c;
  }
  return out;
}

std::size_t count_kind(const ValidationReport& r, const std::string& kind) {
  return static_cast<std::size_t>(
      std::count_if(r.violations.begin(), r.violations.end(), [&](const Violation& v) { return v.kind == kind; }));
}

}  // namespace

TEST_CASE("reference table matches its totals") {
  const auto& t = reference_level_counts();
  std::array<int, 4> col{0, 0, 0, 0};
  int total = 0, queries = 0;
  for (const auto& [level, c] : t) {
    for (std::size_t i = 0; i < 4; ++i) col[i] += c.v[i];
    total += c.total();
    queries += c.total() * (has_distractor(level) ? 2 : 1);
  }
  CHECK(col == std::array<int, 4>{79508, 20131, 5462, 5406});
  CHECK(total == 110507);
  CHECK(col[0] + col[1] == 99639);
  CHECK(queries == 198702);
  CHECK(t.at(LevelTag::L1).total() == 22312);
}

TEST_CASE("scaled reference counts round up per cell") {
  const auto s = scaled_reference_counts(0.01);
  CHECK(s.at(LevelTag::L1) == LevelCounts{{162, 40, 11, 11}});
  CHECK(s.at(LevelTag::L2Size) == LevelCounts{{76, 25, 6, 6}});
  CHECK(scaled_reference_counts(1.0) == reference_level_counts());
  CHECK_THROWS_AS(scaled_reference_counts(0.0), Error);
  CHECK(counts_from_train(100, 5, 6) == LevelCounts{{80, 20, 5, 6}});
  CHECK(counts_from_train(101, 0, 0, 4.0).train_dense() == 20);
  CHECK_THROWS_AS(counts_from_train(-1, 0, 0), Error);
}

TEST_CASE("job JSON round trip") {
  const auto job = small_job(3);
  CHECK(to_json(job_from_json(to_json(job))) == to_json(job));
  auto bad = to_json(job);
  bad["image_size"] = {8, 8};
  CHECK_THROWS_AS(job_from_json(bad), Error);
}

TEST_CASE("generate then validate") {
  testing::TempDir dir("gen");
  const auto root = dir.path() / "ds";
  const auto m = cmd_generate(small_job(1), root);
  CHECK(m.scenes.size() + m.failed.size() == 30);
  CHECK(m.failed.size() <= 1);
  std::size_t expected = 0;
  for (const auto& e : m.scenes) expected += has_distractor(e.level) ? 2 : 1;
  CHECK(m.queries == expected);
  CHECK(read_queries(root).size() == expected);
  CHECK(!fs::exists(root / "manifest.json.tmp"));
  CHECK(fs::exists(root / "manifest.json"));
  CHECK(read_manifest(root).content_hash == m.content_hash);
  CHECK(sha256_hex(m.body().dump()) == m.content_hash);
  const auto rep = cmd_validate(root);
  for (const auto& v : rep.violations) MESSAGE(v.kind << " " << v.where << " " << v.message);
  CHECK(rep.ok());
  CHECK(rep.modified_files.empty());
  for (const auto& e : m.scenes) {
    CHECK(fs::exists(root / e.dir / "rgb.ppm"));
    CHECK(e.dir == std::string(to_string(e.level)) + "/" + std::string(to_string(e.split)) + "/" + e.scene_id);
    if (e.split != Split::Train) CHECK(e.config == SceneConfig::Normal);
  }

  SUBCASE("oracle scores zero and naive is exact on L1") {
    const auto report = cmd_eval(root, baseline_predictions(root, Baseline::Oracle), MissingPolicy::Error);
    CHECK(report.overall.mae == 0.0);
    const auto naive = cmd_eval(root, baseline_predictions(root, Baseline::Naive, 2), MissingPolicy::Error);
    CHECK(naive.per_level.at("L1").mae == 0.0);
    CHECK(naive.per_level.at("L3").mae > 0.0);
    const auto blob = baseline_predictions(root, Baseline::Blob);
    CHECK(blob.size() == m.queries);
  }

  SUBCASE("stats") {
    const auto s = cmd_stats(root);
    CHECK(s["scenes"] == m.scenes.size());
    CHECK(s["queries"] == m.queries);
    CHECK(s["max_instances"].get<int>() <= kMaxInstances);
  }

  SUBCASE("hand-edited gt_count is exactly one violation") {
    auto lines = read_lines(root / "queries.jsonl");
    auto q = nlohmann::json::parse(lines[3]);
    q["gt_count"] = q["gt_count"].get<int>() + 1;
    lines[3] = q.dump();
    write_lines(root / "queries.jsonl", lines);
    const auto r = cmd_validate(root);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].kind == "gt");
    CHECK(r.violations[0].where == q["query_id"]);
    CHECK(r.modified_files == std::vector<std::string>{"queries.jsonl"});
  }

  SUBCASE("deleted query") {
    auto lines = read_lines(root / "queries.jsonl");
    lines.erase(lines.begin());
    write_lines(root / "queries.jsonl", lines);
    const auto r = cmd_validate(root);
    CHECK(count_kind(r, "queries") >= 1);
  }

  SUBCASE("id map pixel moved to another instance") {
    const auto& e = m.scenes.front();
    auto ids = read_pgm16(root / e.dir / "ids.pgm");
    const auto it = std::find_if(ids.ids.begin(), ids.ids.end(), [](std::uint16_t v) { return v != 0; });
    REQUIRE(it != ids.ids.end());
    *it = 0;
    write_pgm16(root / e.dir / "ids.pgm", ids);
    CHECK(count_kind(cmd_validate(root), "mask") >= 1);
  }

  SUBCASE("missing file") {
    fs::remove(root / m.scenes.back().dir / "annotations.json");
    const auto r = cmd_validate(root);
    CHECK(count_kind(r, "file") >= 1);
  }

  SUBCASE("manifest tampering") {
    auto doc = nlohmann::json::parse(std::ifstream(root / "manifest.json"));
    doc["queries"] = doc["queries"].get<int>() + 1;
    std::ofstream(root / "manifest.json") << doc.dump();
    CHECK(count_kind(cmd_validate(root), "manifest") == 1);
  }

  SUBCASE("leaked split") {
    auto doc = nlohmann::json::parse(std::ifstream(root / "splits.json"));
    for (auto& [k, v] : doc["asset_split"].items()) {
      if (v == "TestB") {
        v = "Train";
        break;
      }
    }
    std::ofstream(root / "splits.json") << doc.dump();
    CHECK(count_kind(cmd_validate(root), "split") == 1);
  }

  SUBCASE("corrupted gt counts agree with an independent recount") {
    const auto truth = role_counts(root);
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      auto lines = read_lines(root / "queries.jsonl");
      std::size_t expected_bad = 0;
      for (auto& line : lines) {
        auto q = nlohmann::json::parse(line);
        if (rng.bernoulli(0.3)) q["gt_count"] = q["gt_count"].get<int>() + static_cast<int>(rng.uniform_int(-1, 1));
        const auto& c = truth.at(q["scene_id"].get<std::string>());
        expected_bad += q["gt_count"].get<int>() != c[q["role"] == "target" ? 0 : 1];
        line = q.dump();
      }
      write_lines(root / "queries.jsonl", lines);
      const auto r = cmd_validate(root);
      REQUIRE(count_kind(r, "gt") == expected_bad);
      REQUIRE(r.violations.size() == expected_bad);
    }
  }

  SUBCASE("output directory must be empty") {
    CHECK_THROWS_WITH_AS(cmd_generate(small_job(1), root), doctest::Contains("not empty"), Error);
  }
}

TEST_CASE("generation is identical across thread counts") {
  testing::TempDir dir("det");
  const auto a = cmd_generate(small_job(9), dir.path() / "a", 1);
  const auto b = cmd_generate(small_job(9), dir.path() / "b", 3);
  CHECK(a.content_hash == b.content_hash);
  CHECK(a.files == b.files);
  const auto c = cmd_generate(small_job(10), dir.path() / "c", 1);
  CHECK(a.content_hash != c.content_hash);
}

TEST_CASE("an empty job yields an empty, valid dataset") {
  testing::TempDir dir("empty");
  auto job = small_job(2);
  for (auto& [l, c] : job.counts) c = {};
  const auto m = cmd_generate(job, dir.path() / "ds");
  CHECK(m.scenes.empty());
  CHECK(cmd_validate(dir.path() / "ds").ok());
  const auto s = cmd_stats(dir.path() / "ds");
  CHECK(s["scenes"] == 0);
  CHECK(s["category_max_min_ratio"] == 0.0);
}

TEST_CASE("too many failed scenes abort without a manifest") {
  testing::TempDir dir("fail");
  auto job = small_job(4);
  job.profile[ProfileKey::CameraHeightMin] = {100, 100};
  job.profile[ProfileKey::CameraHeightMax] = {101, 101};
  job.placement_attempts = 1;
  job.replacement_recipes = 0;
  std::ostringstream log;
  CHECK_THROWS_WITH_AS(cmd_generate(job, dir.path() / "ds", 1, &log), doctest::Contains("above the allowed rate"), Error);
  CHECK(!fs::exists(dir.path() / "ds" / "manifest.json"));
  CHECK(!fs::exists(dir.path() / "ds" / "manifest.json.tmp"));
  CHECK(log.str().find("camera_height") != std::string::npos);
}

TEST_CASE("validate reports an unreadable manifest") {
  testing::TempDir dir("nomanifest");
  const auto r = cmd_validate(dir.path());
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].kind == "manifest");
}

TEST_CASE("baseline names") {
  CHECK(baseline_from_string("blob") == Baseline::Blob);
  CHECK_THROWS_AS(baseline_from_string("vlm"), Error);
}
