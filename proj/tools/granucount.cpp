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

// granucount command-line front end.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "granucount/dataset.hpp"
#include "granucount/error.hpp"
#include "granucount/eval.hpp"
#include "granucount/qa.hpp"

namespace gc = granucount;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int effective_jobs(int flag) {
  if (const char* env = std::getenv("GRANUCOUNT_JOBS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
    throw gc::Error("GRANUCOUNT_JOBS must be a positive integer");
  }
  return std::max(1, flag);
}

gc::ImageSize parse_image_size(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) {
      const int n = std::stoi(s);
      return {n, n};
    }
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw gc::Error("--image-size expects N or WxH, got '" + s + "'");
  }
}

/// "ref:F" scales the reference table; otherwise 4 values (train-normal,
/// train-dense, testA, testB) or 3 (train, testA, testB) split by the dense
/// ratio.
std::map<gc::LevelTag, gc::LevelCounts> parse_counts(const std::string& spec, const std::vector<std::string>& levels,
                                                     double dense_ratio) {
  std::vector<gc::LevelTag> tags;
  bool pooled_l2 = false;
  for (const auto& l : levels) {
    if (l == "L2") {
      pooled_l2 = true;
      tags.push_back(gc::LevelTag::L2Size);
      tags.push_back(gc::LevelTag::L2Color);
    } else {
      tags.push_back(gc::level_from_string(l));
    }
  }
  std::map<gc::LevelTag, gc::LevelCounts> out;
  if (spec.rfind("ref:", 0) == 0) {
    const auto table = gc::scaled_reference_counts(std::stod(spec.substr(4)));
    for (auto t : tags) out[t] = table.at(t);
    return out;
  }
  std::vector<int> v;
  for (const auto& item : split_list(spec)) v.push_back(std::stoi(item));
  gc::LevelCounts c;
  if (v.size() == 4) {
    c.v = {v[0], v[1], v[2], v[3]};
  } else if (v.size() == 3) {
    c = gc::counts_from_train(v[0], v[1], v[2], dense_ratio);
  } else {
    throw gc::Error("--counts expects ref:F, or 3 or 4 comma-separated integers");
  }
  for (auto t : tags) {
    auto cell = c;
    if (pooled_l2 && (t == gc::LevelTag::L2Size || t == gc::LevelTag::L2Color)) {
      // A pooled L2 count is shared between the size and colour variants.
      for (auto& n : cell.v) n = t == gc::LevelTag::L2Size ? (n + 1) / 2 : n / 2;
    }
    out[t] = cell;
  }
  return out;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gc::Error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw gc::Error(path + ": " + e.what());
  }
}

void write_or_print(const nlohmann::json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  f << doc.dump(2) << '\n';
  if (!f) throw gc::Error("cannot write " + out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-grained counting dataset generator and benchmark harness"};
  app.require_subcommand(1);
  app.fallthrough();
  int jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads (GRANUCOUNT_JOBS overrides)")->check(CLI::PositiveNumber);

  // generate
  auto* gen = app.add_subcommand("generate", "Synthesize a dataset");
  std::uint64_t seed = 0;
  std::string levels = "L1,L2,L3,L4,L5", counts = "ref:0.01", profile_path, image_size = "512", out, job_path;
  double dense_ratio = 4.0;
  gen->add_option("--seed", seed, "Global seed");
  gen->add_option("--levels", levels, "Comma list of L1, L2 (both variants), L2Size, L2Color, L3, L4, L5");
  gen->add_option("--counts", counts, "ref:F, or train-normal,train-dense,testA,testB, or train,testA,testB");
  gen->add_option("--profile", profile_path, "Profile JSON (default: built-in reference profile)");
  gen->add_option("--image-size", image_size, "N or WxH");
  gen->add_option("--dense-ratio", dense_ratio, "Train normal:dense ratio used with 3-value counts");
  gen->add_option("--job", job_path, "Job JSON; replaces the other job flags");
  gen->add_option("--out", out, "Output directory (must be empty)")->required();

  // validate / stats
  std::string root;
  auto* val = app.add_subcommand("validate", "Check a dataset against every invariant");
  val->add_option("root", root, "Dataset directory")->required();
  auto* stats = app.add_subcommand("stats", "Distribution statistics of a dataset");
  stats->add_option("root", root, "Dataset directory")->required();
  std::string stats_out;
  stats->add_option("--out", stats_out, "Write JSON here instead of stdout");

  // eval
  auto* ev = app.add_subcommand("eval", "Score predictions against a dataset");
  std::string predictions, baseline, policy = "error", eval_out;
  ev->add_option("root", root, "Dataset directory")->required();
  auto* pred_opt = ev->add_option("--predictions", predictions, "JSONL predictions");
  ev->add_option("--baseline", baseline, "oracle, naive or blob")->excludes(pred_opt);
  ev->add_option("--missing-policy", policy, "error or count-zero");
  ev->add_option("--out", eval_out, "Write the report here as well");

  // inspect
  auto* insp = app.add_subcommand("inspect", "Reference inspector verdict for one edited image");
  std::string prototype, ids_path, edited;
  insp->add_option("--prototype", prototype, "Prototype PPM")->required();
  insp->add_option("--ids", ids_path, "Instance id PGM")->required();
  insp->add_option("--edited", edited, "Edited PPM")->required();

  // qa
  auto* qa = app.add_subcommand("qa", "Edit-filter loop with the perturbation editor over a dataset");
  double fault_rate = 0.2;
  int iters = 3;
  std::size_t limit = 0;
  std::string qa_out;
  qa->add_option("root", root, "Dataset directory")->required();
  qa->add_option("--fault-rate", fault_rate, "Per-pass fault probability")->check(CLI::Range(0.0, 1.0));
  qa->add_option("--iters", iters, "Edit-filter iterations")->check(CLI::PositiveNumber);
  qa->add_option("--limit", limit, "Use at most this many scenes (0 = all)");
  qa->add_option("--out", qa_out, "Write the report here instead of stdout");

  // prompts
  auto* pr = app.add_subcommand("prompts", "Evaluation prompts as JSONL");
  pr->add_option("root", root, "Dataset directory")->required();

  auto* prof = app.add_subcommand("profile", "Print the built-in reference profile");

  CLI11_PARSE(app, argc, argv);

  try {
    const int workers = effective_jobs(jobs);
    if (*gen) {
      gc::GenerationJob job;
      if (!job_path.empty()) {
        job = gc::job_from_json(read_json_file(job_path));
      } else {
        job.global_seed = seed;
        job.bank.seed = gc::derive_seed({seed, 0});
        job.counts = parse_counts(counts, split_list(levels), dense_ratio);
        if (!profile_path.empty()) job.profile = gc::load_profile(read_json_file(profile_path));
        job.image = parse_image_size(image_size);
      }
      const auto m = gc::cmd_generate(job, out, workers, &std::cerr);
      std::cout << "scenes " << m.scenes.size() << ", failed " << m.failed.size() << ", queries " << m.queries
                << "\ncontent_hash " << m.content_hash << '\n';
      return 0;
    }
    if (*val) {
      const auto rep = gc::cmd_validate(root);
      std::cout << gc::to_json(rep).dump(2) << '\n';
      return rep.ok() ? 0 : 1;
    }
    if (*stats) {
      write_or_print(gc::cmd_stats(root), stats_out);
      return 0;
    }
    if (*ev) {
      std::vector<gc::PredictionRecord> preds;
      if (!baseline.empty()) {
        preds = gc::baseline_predictions(root, gc::baseline_from_string(baseline), workers);
      } else if (!predictions.empty()) {
        preds = gc::read_predictions(predictions);
      } else {
        throw gc::Error("eval needs --predictions or --baseline");
      }
      const auto report = gc::cmd_eval(root, preds, gc::missing_policy_from_string(policy));
      const auto doc = gc::to_json(report);
      std::cout << doc.dump(2) << '\n';
      if (!eval_out.empty()) write_or_print(doc, eval_out);
      return 0;
    }
    if (*insp) {
      const auto verdict = gc::reference_inspector(gc::read_ppm(prototype), gc::read_pgm16(ids_path), gc::read_ppm(edited));
      std::cout << gc::to_json(verdict).dump() << '\n';
      return 0;
    }
    if (*qa) {
      const auto m = gc::read_manifest(root);
      std::vector<gc::QaSample> samples;
      for (const auto& e : m.scenes) {
        if (limit && samples.size() >= limit) break;
        samples.push_back({e.scene_id, gc::read_ppm(fs::path(root) / e.dir / "rgb.ppm"),
                           gc::read_pgm16(fs::path(root) / e.dir / "ids.pgm")});
      }
      gc::PerturbationEditor editor(fault_rate);
      gc::ReferenceInspector inspector;
      const auto result = gc::run_edit_filter_loop(samples, editor, inspector, iters, workers);
      write_or_print(gc::to_json(result.second), qa_out);
      return 0;
    }
    if (*prof) {
      std::cout << gc::to_json(gc::default_profile()).dump(2) << '\n';
      return 0;
    }
    if (*pr) {
      for (const auto& q : gc::read_queries(root)) {
        std::cout << nlohmann::json{{"query_id", q.query_id}, {"prompt", gc::emit_prompt(q)}}.dump() << '\n';
      }
      return 0;
    }
  } catch (const gc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
