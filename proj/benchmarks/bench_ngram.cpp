// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "codelm/corpus.hpp"
#include "codelm/ngram.hpp"
#include "codelm/synth.hpp"

namespace {

using namespace codelm;

struct Fixture {
  Vocabulary vocab;
  TokenStream stream;
};

const Fixture& corpus() {
  static const Fixture f = [] {
    GeneratorConfig g;
    g.n_files = 20;
    std::string text;
    for (const auto& file : generate_corpus(g).global_files) text += file.text;
    Fixture out;
    out.vocab = Vocabulary::from_text(text);
    out.stream = encode(out.vocab, text);
    return out;
  }();
  return f;
}

void BM_NgramFit(benchmark::State& state) {
  const auto& f = corpus();
  const auto order = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto model = NgramModel::fit(std::span(&f.stream, 1), order, f.vocab.size());
    benchmark::DoNotOptimize(model.context_count());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * f.stream.size()));
}
BENCHMARK(BM_NgramFit)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_NgramPredict(benchmark::State& state) {
  const auto& f = corpus();
  const auto order = static_cast<std::size_t>(state.range(0));
  const auto model = NgramModel::fit(std::span(&f.stream, 1), order, f.vocab.size());
  std::vector<double> dist(f.vocab.size());
  std::size_t t = order;
  for (auto _ : state) {
    model.predict(std::span(f.stream.ids).subspan(t - order, order), dist);
    benchmark::DoNotOptimize(dist.data());
    if (++t >= f.stream.size()) t = order;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_NgramPredict)->Arg(3)->Arg(5);

}  // namespace
