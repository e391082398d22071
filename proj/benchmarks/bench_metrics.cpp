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

#include <random>

#include "flairnorm/ensemble.hpp"
#include "flairnorm/metrics.hpp"
#include "phantoms.hpp"

using namespace flairnorm;

namespace {

Dims cube(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  return {n, n, n};
}

}  // namespace

static void BM_H95(benchmark::State &state) {
  std::mt19937_64 rng(1);
  const Dims d = cube(state);
  auto p = testing::random_blob_mask(d, 6, rng), g = testing::random_blob_mask(d, 6, rng);
  for (auto _ : state) benchmark::DoNotOptimize(h95(p, g, {1.0, 1.0, 3.0}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.count()));
}
BENCHMARK(BM_H95)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond);

static void BM_LesionDetection(benchmark::State &state) {
  std::mt19937_64 rng(2);
  const Dims d = cube(state);
  auto p = testing::random_mask(d, 0.05, rng), g = testing::random_mask(d, 0.05, rng);
  for (auto _ : state) benchmark::DoNotOptimize(lesion_detection(p, g));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.count()));
}
BENCHMARK(BM_LesionDetection)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond);

static void BM_MajorityVote(benchmark::State &state) {
  std::mt19937_64 rng(3);
  const Dims d = cube(state);
  std::vector<Mask> stack;
  for (int k = 0; k < 5; ++k) stack.push_back(testing::random_mask(d, 0.3, rng));
  for (auto _ : state) benchmark::DoNotOptimize(majority_vote(stack));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.count()));
}
BENCHMARK(BM_MajorityVote)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond);

static void BM_KlAlignment(benchmark::State &state) {
  std::vector<testing::Phantom> ps;
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(state.range(0)); ++i)
    ps.push_back(testing::make_brain_phantom({.gain = 0.6 + 0.1 * i, .seed = i + 1}));
  std::vector<AlignmentInput> in;
  for (std::size_t i = 0; i < ps.size(); ++i)
    in.push_back({"v" + std::to_string(i), ps[i].volume, ps[i].brain});
  for (auto _ : state) benchmark::DoNotOptimize(dataset_alignment_report(in, "original"));
}
BENCHMARK(BM_KlAlignment)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);
