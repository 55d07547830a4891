// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "codelm/eval.hpp"
#include "codelm/random.hpp"

namespace {

using namespace codelm;

std::vector<ScoredLabel> random_scores(std::size_t n) {
  Rng rng(3);
  std::vector<ScoredLabel> s(n);
  for (auto& x : s) x = {rng.uniform(0.0, 4.0), rng.chance(0.5)};
  return s;
}

void BM_Auc(benchmark::State& state) {
  const auto scores = random_scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(auc(scores));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auc)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity(benchmark::oNLogN);

void BM_Summarize(benchmark::State& state) {
  const auto scores = random_scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto report = summarize(scores);
    benchmark::DoNotOptimize(report.auc);
  }
}
BENCHMARK(BM_Summarize)->Arg(1 << 12)->Arg(1 << 16);

}  // namespace
