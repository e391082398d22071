//------------------------------------------------------------------------------
//
//   Copyright 2026 The flairnorm Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------
#include <benchmark/benchmark.h>

#include "flairnorm/preprocess.hpp"
#include "flairnorm/standardize.hpp"
#include "phantoms.hpp"

using namespace flairnorm;

namespace {

testing::Phantom phantom(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  return testing::make_brain_phantom({.dims = {n, n, n / 4}});
}

void count_voxels(benchmark::State &state, const Volume &v) {
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.voxels().size()));
}

}  // namespace

static void BM_Median3x3(benchmark::State &state) {
  auto p = phantom(state);
  for (auto _ : state) benchmark::DoNotOptimize(median_filter_3x3(p.volume));
  count_voxels(state, p.volume);
}
BENCHMARK(BM_Median3x3)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_BiasCorrect(benchmark::State &state) {
  auto p = phantom(state);
  for (auto _ : state) benchmark::DoNotOptimize(bias_correct(p.volume, p.brain));
  count_voxels(state, p.volume);
}
BENCHMARK(BM_BiasCorrect)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_Histogram(benchmark::State &state) {
  auto p = phantom(state);
  for (auto _ : state) benchmark::DoNotOptimize(compute_histogram(p.volume, p.brain));
  count_voxels(state, p.volume);
}
BENCHMARK(BM_Histogram)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_WhiteStripe(benchmark::State &state) {
  auto p = phantom(state);
  for (auto _ : state) benchmark::DoNotOptimize(whitestripe_normalize(p.volume, p.brain));
  count_voxels(state, p.volume);
}
BENCHMARK(BM_WhiteStripe)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_IamlabPipeline(benchmark::State &state) {
  auto p = phantom(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(run_pipeline(p.volume, p.brain, Method::Iamlab));
  count_voxels(state, p.volume);
}
BENCHMARK(BM_IamlabPipeline)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
