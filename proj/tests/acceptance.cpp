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

// Acceptance runner: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "granucount/dataset.hpp"
#include "granucount/error.hpp"
#include "granucount/hash.hpp"
#include "granucount/qa.hpp"
#include "oracles.hpp"

namespace gc = granucount;
namespace fs = std::filesystem;
using gc::LevelTag;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int n, const std::string& title, Outcome& o) {
  std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << "  " << title << " |" << o.detail.str()
            << std::endl;
  failures += !o.pass;
}

template <class F>
void run(int n, const std::string& title, F body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  report(n, title, o);
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(std::ifstream(p)); }

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Instances per role per scene, from annotations.json alone.
std::map<std::string, std::array<int, 2>> role_counts(const fs::path& root, const gc::DatasetManifest& m) {
  std::map<std::string, std::array<int, 2>> out;
  for (const auto& e : m.scenes) {
    std::array<int, 2> c{0, 0};
    const auto ann = read_json(root / e.dir / "annotations.json");
    for (const auto& a : ann.at("instances")) {
      ++c[a.at("role") == "target" ? 0 : 1];
    }
    out[e.scene_id] = c;
  }
  return out;
}

// Pinhole camera with no roll, written from the yaw/pitch of the view ray.
std::array<double, 2> pinhole(const gc::CameraPose& c, const gc::Vec3& w) {
  const double dx = c.look_at.x - c.eye.x, dy = c.look_at.y - c.eye.y, dz = c.look_at.z - c.eye.z;
  const double yaw = std::atan2(dx, dz), pitch = std::atan2(dy, std::hypot(dx, dz));
  const double px = w.x - c.eye.x, py = w.y - c.eye.y, pz = w.z - c.eye.z;
  const double x1 = std::cos(yaw) * px - std::sin(yaw) * pz;
  const double z1 = std::sin(yaw) * px + std::cos(yaw) * pz;
  const double y2 = std::cos(pitch) * py - std::sin(pitch) * z1;
  const double z2 = std::sin(pitch) * py + std::cos(pitch) * z1;
  const double f = c.focal_length / 36.0 * c.image.width;
  return {c.image.width / 2.0 - f * x1 / z2, c.image.height / 2.0 - f * y2 / z2};
}

gc::QaSample load_sample(const fs::path& root, const gc::SceneEntry& e) {
  return {e.scene_id, gc::read_ppm(root / e.dir / "rgb.ppm"), gc::read_pgm16(root / e.dir / "ids.pgm")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"granucount acceptance criteria"};
  std::string workdir;
  int jobs = 4;
  double scale = 0.01;
  app.add_option("--workdir", workdir, "Keep generated datasets here (default: a temporary directory)");
  app.add_option("--jobs", jobs, "Threads for the second determinism run")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  bool cleanup = false;
  if (workdir.empty()) {
    workdir = (fs::temp_directory_path() / ("granucount-acceptance-" + std::to_string(std::random_device{}()))).string();
    cleanup = true;
  }
  fs::create_directories(workdir);
  const fs::path root_a = fs::path(workdir) / "run-a", root_b = fs::path(workdir) / "run-b";
  fs::remove_all(root_a);
  fs::remove_all(root_b);

  // The job file shared by criteria 1, 2, 6, 7, 8 and 9.
  gc::GenerationJob job;
  job.global_seed = 2024;
  job.bank.seed = gc::derive_seed({job.global_seed, 0});
  job.counts = gc::scaled_reference_counts(scale);
  const fs::path job_path = fs::path(workdir) / "job.json";
  std::ofstream(job_path) << gc::to_json(job).dump(2);

  gc::DatasetManifest manifest;
  bool have_dataset = false;

  run(1, "shape reproduction at 1/100 scale", [&](Outcome& o) {
    const auto loaded = gc::job_from_json(read_json(job_path));
    const auto t0 = std::chrono::steady_clock::now();
    manifest = gc::cmd_generate(loaded, root_a, 1);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    have_dataset = true;
    std::map<LevelTag, std::array<int, 4>> got;
    for (const auto& e : manifest.scenes) {
      const std::size_t b = e.split == gc::Split::Train ? (e.config == gc::SceneConfig::Normal ? 0 : 1)
                                                        : (e.split == gc::Split::TestA ? 2 : 3);
      ++got[e.level][b];
    }
    o.detail << " " << std::fixed << std::setprecision(1) << secs << " s, " << manifest.scenes.size() << " scenes, "
             << manifest.failed.size() << " failed;";
    for (const auto& [level, ref] : gc::reference_level_counts()) {
      const auto& g = got[level];
      o.detail << " " << gc::to_string(level) << " " << g[0] << ":" << g[1] << ":" << g[2] << ":" << g[3];
      for (std::size_t i = 0; i < 4; ++i) {
        const double exact = ref.v[i] * scale;
        o.require(g[i] >= std::floor(exact + 1e-9) && g[i] <= std::ceil(exact - 1e-9),
                  std::string(gc::to_string(level)) + " cell " + std::to_string(i));
      }
      const double normal_dense = static_cast<double>(g[0]) / g[1];
      const double ref_nd = static_cast<double>(ref.v[0]) / ref.v[1];
      o.detail << " (N:D " << std::setprecision(2) << normal_dense << " vs " << ref_nd << ")";
    }
    o.require(secs < 600.0, "runtime under 10 minutes");
  });

  run(2, "query arithmetic", [&](Outcome& o) {
    const auto& ref = gc::reference_level_counts();
    int l1 = 0, rest = 0;
    for (const auto& [level, c] : ref) (level == LevelTag::L1 ? l1 : rest) += c.total();
    o.require(l1 == 22312 && rest == 88195 && l1 + 2 * rest == 198702, "reference identity");
    o.detail << " reference " << l1 << " + 2x" << rest << " = " << l1 + 2 * rest << ";";
    if (!have_dataset) return o.require(false, "no dataset");
    std::size_t n1 = 0, n2 = 0;
    for (const auto& e : manifest.scenes) (e.level == LevelTag::L1 ? n1 : n2) += 1;
    const auto queries = gc::read_queries(root_a);
    o.detail << " generated " << n1 << " + 2x" << n2 << " = " << n1 + 2 * n2 << ", queries.jsonl " << queries.size()
             << ", manifest " << manifest.queries;
    o.require(queries.size() == n1 + 2 * n2, "queries.jsonl total");
    o.require(manifest.queries == n1 + 2 * n2, "manifest total");
  });

  run(3, "level validity of 1,000 recipes per level", [&](Outcome& o) {
    const auto bank = gc::build_bank(gc::BankParams{});
    const auto splits = gc::assign_splits(bank, 3);
    std::size_t total = 0, bad = 0;
    for (auto level : gc::kAllLevels) {
      gc::Rng rng(gc::derive_seed({77, static_cast<std::uint64_t>(level)}));
      gc::CategoryUsage usage(bank.categories.size(), 0);
      for (int i = 0; i < 1000; ++i) {
        const auto split = static_cast<gc::Split>(i % 3);
        const auto config = (split == gc::Split::Train && i % 5 == 0) ? gc::SceneConfig::Dense : gc::SceneConfig::Normal;
        const auto r = gc::compose_recipe(level, bank, splits, split, config, gc::default_profile(), rng, &usage);
        ++total;
        bad += !testing::oracle_valid(r, bank, splits) || !gc::recipe_valid(r, bank, splits).ok;
      }
    }
    o.detail << " " << total << " recipes, " << bad << " rejected";
    o.require(bad == 0, "every recipe valid");
  });

  run(4, "cap and split disjointness over 10,000 scenes", [&](Outcome& o) {
    const auto bank = gc::build_bank(gc::BankParams{});
    const auto splits = gc::assign_splits(bank, 4);
    auto crowded = gc::default_profile();
    crowded[gc::ProfileKey::MaxTotalObjects] = {200, 250};
    crowded[gc::ProfileKey::MinObjectsPerGroup] = {60, 100};
    std::map<gc::Split, std::set<std::uint32_t>> assets, cats;
    gc::Rng rng(44);
    std::size_t placed = 0, max_instances = 0, placement_errors = 0;
    for (int i = 0; placed < 10000; ++i) {
      const auto level = gc::kAllLevels[static_cast<std::size_t>(i) % gc::kAllLevels.size()];
      const auto split = static_cast<gc::Split>((i / 6) % 3);
      const auto config = (split == gc::Split::Train && i % 5 == 0) ? gc::SceneConfig::Dense : gc::SceneConfig::Normal;
      const auto& profile = i % 50 == 0 ? crowded : gc::default_profile();
      const auto r = gc::compose_recipe(level, bank, splits, split, config, profile, rng);
      const auto d = gc::draw(gc::effective_profile(profile, config), r.profile_draw_seed);
      gc::Rng srng(r.scene_seed);
      gc::SceneGraph s;
      try {
        s = gc::place_objects(r, bank, d, srng);
      } catch (const gc::Error&) {
        ++placement_errors;
        continue;
      }
      ++placed;
      max_instances = std::max(max_instances, s.instances.size());
      for (const auto& inst : s.instances) {
        assets[split].insert(inst.asset.value);
        cats[split].insert(bank.category_of(inst.asset).value);
      }
    }
    auto disjoint = [](const std::set<std::uint32_t>& a, const std::set<std::uint32_t>& b) {
      return std::none_of(a.begin(), a.end(), [&](std::uint32_t x) { return b.count(x) > 0; });
    };
    const bool subset = std::all_of(cats[gc::Split::TestA].begin(), cats[gc::Split::TestA].end(),
                                    [&](std::uint32_t c) { return cats[gc::Split::Train].count(c) > 0; });
    o.detail << " " << placed << " scenes (" << placement_errors << " layouts rejected), max instances " << max_instances
             << ", TestB categories " << cats[gc::Split::TestB].size() << ", TestA assets "
             << assets[gc::Split::TestA].size();
    o.require(max_instances <= 250, "cap");
    o.require(disjoint(cats[gc::Split::TestB], cats[gc::Split::Train]), "TestB categories disjoint from Train");
    o.require(disjoint(assets[gc::Split::TestA], assets[gc::Split::Train]), "TestA assets disjoint from Train");
    o.require(subset, "TestA categories are Train categories");
    o.require(disjoint(assets[gc::Split::TestA], assets[gc::Split::TestB]), "TestA and TestB assets disjoint");
  });

  run(5, "metric fidelity", [&](Outcome& o) {
    gc::Rng rng(5);
    std::vector<gc::CountPair> pairs(100000);
    for (auto& p : pairs) {
      p.gt = static_cast<double>(rng.uniform_int(0, 250));
      p.pred = static_cast<double>(rng.uniform_int(0, 1000)) + (rng.bernoulli(0.1) ? 1e6 : 0.0);
    }
    long double sa = 0, ss = 0;
    for (std::size_t i = pairs.size(); i-- > 0;) {
      const long double d = static_cast<long double>(pairs[i].pred) - pairs[i].gt;
      sa += d < 0 ? -d : d;
      ss += d * d;
    }
    const double ref_mae = static_cast<double>(sa / pairs.size());
    const double ref_rmse = static_cast<double>(std::sqrt(ss / pairs.size()));
    const double e1 = std::abs(gc::mae(pairs) - ref_mae) / ref_mae;
    const double e2 = std::abs(gc::rmse(pairs) - ref_rmse) / ref_rmse;
    o.detail << " relative error mae " << std::scientific << std::setprecision(2) << e1 << ", rmse " << e2 << ";";
    o.require(e1 <= 1e-12 && e2 <= 1e-12, "1e-12 agreement");
    int violations = 0;
    for (int t = 0; t < 2000; ++t) {
      std::vector<gc::CountPair> v(1 + rng.index(200));
      for (auto& p : v) p = {static_cast<double>(rng.uniform_int(0, 250)), static_cast<double>(rng.uniform_int(0, 250))};
      violations += gc::rmse(v) < gc::mae(v);
    }
    o.require(violations == 0, "RMSE >= MAE");
    gc::CountQuery a, b;
    a.query_id = "a", a.level = LevelTag::L1, a.gt_count = 10;
    b.query_id = "b", b.level = LevelTag::L3, b.gt_count = 7;
    const std::vector<gc::CountQuery> qs{a, b};
    const auto r = gc::evaluate(qs, std::vector<gc::PredictionRecord>{{"a", 16}, {"b", 7}}, gc::MissingPolicy::Error);
    o.detail << " weighted example MAE " << std::fixed << r.overall.mae;
    o.require(r.overall.mae == 4.0, "L1 weighting example");
  });

  run(6, "predictor sanity", [&](Outcome& o) {
    if (!have_dataset) return o.require(false, "no dataset");
    const auto oracle = gc::cmd_eval(root_a, gc::baseline_predictions(root_a, gc::Baseline::Oracle), gc::MissingPolicy::Error);
    for (const auto& [level, m] : oracle.per_level) o.require(m.mae == 0.0 && m.rmse == 0.0, "oracle " + level);
    o.require(oracle.overall.mae == 0.0 && oracle.overall.rmse == 0.0, "oracle overall");
    const auto naive = gc::cmd_eval(root_a, gc::baseline_predictions(root_a, gc::Baseline::Naive), gc::MissingPolicy::Error);
    const auto roles = role_counts(root_a, manifest);
    double sum = 0;
    std::size_t n = 0;
    for (const auto& q : gc::read_queries(root_a)) {
      if (q.level != LevelTag::L3) continue;
      sum += roles.at(q.scene_id)[q.role == gc::GroupRole::Target ? 1 : 0];
      ++n;
    }
    const double mean_neg = sum / static_cast<double>(n);
    const double got = naive.per_level.at("L3").mae;
    o.detail << " oracle MAE/RMSE 0 at " << oracle.per_level.size() << " level keys; naive L3 MAE " << std::setprecision(6)
             << got << " vs mean |S-| " << mean_neg << " over " << n << " queries";
    o.require(std::abs(got - mean_neg) <= 1e-9, "naive L3 identity");
  });

  run(7, "renderer correctness", [&](Outcome& o) {
    if (!have_dataset) return o.require(false, "no dataset");
    std::size_t scenes = 0, bad_partition = 0, bad_box = 0;
    for (const auto& e : manifest.scenes) {
      const auto ids = gc::read_pgm16(root_a / e.dir / "ids.pgm");
      const auto ann = gc::annotations_from_json(read_json(root_a / e.dir / "annotations.json"));
      std::vector<std::uint16_t> owner(ids.ids.size(), 0);
      bool partition = true;
      for (const auto& a : ann.instances) {
        const auto mask = gc::decode_rle(a.mask_rle, ids.width, ids.height);
        gc::Box2i box{1 << 30, 1 << 30, -1, -1};
        for (std::size_t p = 0; p < mask.size(); ++p) {
          if (!mask[p]) continue;
          if (owner[p]) partition = false;
          owner[p] = a.instance_id;
          const int x = static_cast<int>(p % ids.width), y = static_cast<int>(p / ids.width);
          box = {std::min(box.xmin, x), std::min(box.ymin, y), std::max(box.xmax, x), std::max(box.ymax, y)};
        }
        bad_box += !(box == a.bbox2d);
      }
      partition = partition && owner == ids.ids;
      bad_partition += !partition;
      ++scenes;
    }
    o.detail << " " << scenes << " scenes: " << bad_partition << " partition and " << bad_box << " bbox failures;";
    o.require(bad_partition == 0, "mask partition");
    o.require(bad_box == 0, "bbox tightness");

    // Cube with vertical edges seen from its own height: x extremes are edges.
    gc::Rng rng(7);
    double worst = 0.0;
    for (int t = 0; t < 300; ++t) {
      gc::SceneInstance cube;
      cube.instance_id = 1;
      cube.family = gc::ShapeFamily::Box;
      cube.shape.v = {1, 1, 1, 1};
      cube.placement.scale = std::sqrt(3.0);
      cube.placement.position = {rng.uniform(-1, 1), 0.5, rng.uniform(-1, 1)};
      const bool head_on = t % 3 == 0;
      cube.placement.yaw = head_on ? 0.0 : rng.uniform(0, 6.283);
      gc::SceneGraph s;
      s.instances.push_back(cube);
      gc::CameraPose cam;
      cam.image = {256, 256};
      cam.focal_length = rng.uniform(20, 60);
      const double az = head_on ? 0.0 : rng.uniform(0, 6.283), dist = rng.uniform(4, 9);
      cam.look_at = cube.placement.position;
      cam.eye = cam.look_at + gc::Vec3{std::sin(az), 0.0, std::cos(az)} * dist;
      const auto out = gc::render(s, cam);
      const auto ann = gc::derive_annotations(out.ids, s, cam);
      double x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9;
      for (const auto& c : cube.box_corners()) {
        const auto p = pinhole(cam, c);
        x0 = std::min(x0, p[0]), x1 = std::max(x1, p[0]), y0 = std::min(y0, p[1]), y1 = std::max(y1, p[1]);
      }
      const auto& b = ann.instances.at(0).bbox2d;
      worst = std::max({worst, std::abs(b.xmin - x0), std::abs(b.xmax + 1 - x1)});
      if (head_on) worst = std::max({worst, std::abs(b.ymin - y0), std::abs(b.ymax + 1 - y1)});
    }
    o.detail << " cube extents worst deviation " << std::setprecision(3) << worst << " px;";
    o.require(worst <= 0.5, "cube within 0.5 px");

    std::size_t rle_bad = 0;
    for (int t = 0; t < 10000; ++t) {
      const int w = 1 + static_cast<int>(rng.index(64)), h = 1 + static_cast<int>(rng.index(64));
      std::vector<std::uint8_t> m(static_cast<std::size_t>(w) * h);
      const double density = rng.uniform();
      for (auto& v : m) v = rng.bernoulli(density);
      rle_bad += gc::decode_rle(gc::encode_rle(m), w, h) != m;
    }
    o.detail << " RLE round trip failures " << rle_bad << "/10000";
    o.require(rle_bad == 0, "RLE round trip");
  });

  run(8, "QA recall and edit-filter loop", [&](Outcome& o) {
    if (!have_dataset) return o.require(false, "no dataset");
    std::vector<gc::QaSample> samples;
    for (const auto& e : manifest.scenes) samples.push_back(load_sample(root_a, e));
    gc::Rng rng(8);
    std::size_t erase_caught = 0, insert_caught = 0, clean_rejected = 0;
    for (const auto& s : samples) {
      const auto n = *std::max_element(s.ids.ids.begin(), s.ids.ids.end());
      const auto er = gc::perturbation_editor(s, {gc::FaultKind::Erase, static_cast<std::uint16_t>(1 + rng.index(n))}, rng);
      erase_caught += !gc::reference_inspector(s.prototype, s.ids, er.edited).passed();
      const auto in = gc::perturbation_editor(s, {gc::FaultKind::Insert, 0}, rng);
      insert_caught += !gc::reference_inspector(s.prototype, s.ids, in.edited).passed();
      const auto clean = gc::perturbation_editor(s, {gc::FaultKind::None, 0}, rng);
      clean_rejected += !gc::reference_inspector(s.prototype, s.ids, clean.edited).passed();
    }
    o.detail << " recall erase " << erase_caught << "/" << samples.size() << ", insert " << insert_caught << "/"
             << samples.size() << ", false positives " << clean_rejected << "/" << samples.size() << ";";
    o.require(erase_caught == samples.size(), "erase recall 100%");
    o.require(insert_caught == samples.size(), "insert recall 100%");

    const auto [outcomes, rep] =
        gc::run_edit_filter_loop(samples, gc::PerturbationEditor(0.2), gc::ReferenceInspector{}, 3, jobs);
    bool monotone = true;
    for (std::size_t i = 1; i < rep.iterations.size(); ++i) {
      monotone = monotone && rep.iterations[i].inspected == rep.iterations[i - 1].failed &&
                 rep.iterations[i].failed <= rep.iterations[i - 1].failed;
    }
    std::size_t missed = 0;
    for (const auto& oc : outcomes) {
      for (std::size_t k = 0; k < oc.faults.size(); ++k) {
        const auto kind = oc.faults[k].kind;
        if ((kind == gc::FaultKind::Erase || kind == gc::FaultKind::Insert) && oc.verdicts[k].passed()) ++missed;
      }
    }
    const double n = static_cast<double>(samples.size()), p = 0.2 * 0.2 * 0.2;
    const double sigma = std::sqrt(n * p * (1 - p));
    const double discarded = static_cast<double>(rep.discarded.size());
    o.detail << " loop failed per iteration";
    for (const auto& st : rep.iterations) o.detail << " " << st.failed << "/" << st.inspected;
    o.detail << ", discarded " << rep.discarded.size() << " (" << std::setprecision(2) << 100.0 * discarded / n
             << "%), expected " << n * p << " +- " << 3 * sigma;
    o.require(rep.accepted.size() + rep.discarded.size() == samples.size(), "conservation");
    o.require(monotone, "monotone surviving failures");
    o.require(missed == 0, "no missed Erase/Insert inside the loop");
    o.require(std::abs(discarded - n * p) <= 3 * sigma, "final rejection within 3 sigma");
  });

  run(9, "determinism across --jobs", [&](Outcome& o) {
    if (!have_dataset) return o.require(false, "no dataset");
    const auto again = gc::cmd_generate(gc::job_from_json(read_json(job_path)), root_b, jobs);
    o.detail << " jobs=1 " << manifest.content_hash.substr(0, 16) << ", jobs=" << jobs << " "
             << again.content_hash.substr(0, 16);
    o.require(again.content_hash == manifest.content_hash, "content hash");
    o.require(read_bytes(root_a / "manifest.json") == read_bytes(root_b / "manifest.json"), "manifest bytes");
  });

  if (cleanup) fs::remove_all(workdir);
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << std::endl;
  return failures == 0 ? 0 : 1;
}
