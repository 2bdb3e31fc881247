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

// Serial reference paths against their OpenMP counterparts.

#include <random>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "granucount/dataset.hpp"
#include "granucount/qa.hpp"

namespace gc = granucount;
namespace fs = std::filesystem;

namespace {

std::vector<gc::CountPair> random_pairs(std::size_t n) {
  gc::Rng rng(1);
  std::vector<gc::CountPair> v(n);
  for (auto& p : v) p = {static_cast<double>(rng.uniform_int(0, 250)), static_cast<double>(rng.uniform_int(0, 250))};
  return v;
}

void BM_MaeSerial(benchmark::State& state) {
  const auto pairs = random_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gc::mae_serial(pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MaeParallel(benchmark::State& state) {
  const auto pairs = random_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gc::mae(pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

gc::GenerationJob bench_job() {
  gc::GenerationJob job;
  job.global_seed = 5;
  job.bank = {gc::derive_seed({5, 0}), 4, 4, 2, 6, 12};
  for (auto l : gc::kAllLevels) job.counts[l] = {{4, 1, 1, 1}};
  job.image = {256, 256};
  return job;
}

fs::path scratch(const std::string& tag) {
  return fs::temp_directory_path() / ("granucount-bench-" + tag + "-" + std::to_string(std::random_device{}()));
}

void BM_Generate(benchmark::State& state) {
  const int jobs = static_cast<int>(state.range(0));
  const auto job = bench_job();
  for (auto _ : state) {
    const auto root = scratch("gen");
    benchmark::DoNotOptimize(gc::cmd_generate(job, root, jobs).content_hash);
    state.PauseTiming();
    fs::remove_all(root);
    state.ResumeTiming();
  }
}

const std::vector<gc::QaSample>& qa_samples() {
  static const auto samples = [] {
    const auto root = scratch("qa");
    const auto m = gc::cmd_generate(bench_job(), root, omp_get_max_threads());
    std::vector<gc::QaSample> out;
    for (const auto& e : m.scenes) {
      out.push_back({e.scene_id, gc::read_ppm(root / e.dir / "rgb.ppm"), gc::read_pgm16(root / e.dir / "ids.pgm")});
    }
    fs::remove_all(root);
    return out;
  }();
  return samples;
}

void BM_QaLoop(benchmark::State& state) {
  const int jobs = static_cast<int>(state.range(0));
  const auto& samples = qa_samples();
  const gc::PerturbationEditor editor(0.2);
  const gc::ReferenceInspector inspector;
  for (auto _ : state) benchmark::DoNotOptimize(gc::run_edit_filter_loop(samples, editor, inspector, 3, jobs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.size()));
}

const int kThreads = std::max(2, omp_get_num_procs());

}  // namespace

BENCHMARK(BM_MaeSerial)->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_MaeParallel)->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_Generate)->Arg(1)->Arg(kThreads)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(BM_QaLoop)->Arg(1)->Arg(kThreads)->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
