// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "codelm/lstm.hpp"
#include "codelm/random.hpp"

namespace {

using namespace codelm;

ModelConfig config_for(const benchmark::State& state) {
  ModelConfig c;
  c.vocab_size = 96;
  c.hidden_dim = static_cast<std::size_t>(state.range(0));
  c.embed_dim = c.hidden_dim / 2;
  c.rng_seed = 1;
  return c;
}

std::vector<TokenId> window(const ModelConfig& c, std::size_t batch) {
  Rng rng(2);
  std::vector<TokenId> ids(c.bptt_len * batch);
  for (auto& id : ids) id = static_cast<TokenId>(rng.below(c.vocab_size));
  return ids;
}

void BM_Forward(benchmark::State& state) {
  const auto cfg = config_for(state);
  const auto batch = static_cast<std::size_t>(state.range(1));
  const auto params = init_params(cfg);
  const auto ids = window(cfg, batch);
  const auto initial = LstmState::zeros(cfg, batch);
  for (auto _ : state) {
    auto tape = forward(params, initial, ids, batch);
    benchmark::DoNotOptimize(tape.probs.back().flat().data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * ids.size()));
}
BENCHMARK(BM_Forward)->Args({64, 32})->Args({128, 32})->Args({128, 128})->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto cfg = config_for(state);
  const auto batch = static_cast<std::size_t>(state.range(1));
  const auto params = init_params(cfg);
  const auto ids = window(cfg, batch);
  std::vector<TokenId> targets(ids.begin() + 1, ids.end());
  targets.push_back(ids.front());
  const auto initial = LstmState::zeros(cfg, batch);
  for (auto _ : state) {
    const auto tape = forward(params, initial, ids, batch);
    auto grads = backward(params, tape, targets);
    benchmark::DoNotOptimize(grads.loss);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * ids.size()));
}
BENCHMARK(BM_ForwardBackward)->Args({64, 32})->Args({128, 32})->Args({128, 128})->Unit(benchmark::kMillisecond);

void BM_PredictorFeed(benchmark::State& state) {
  const auto cfg = config_for(state);
  const auto params = init_params(cfg);
  LstmPredictor predictor(params);
  TokenId token = 0;
  for (auto _ : state) {
    predictor.feed(token);
    token = static_cast<TokenId>((token + 7) % cfg.vocab_size);
    benchmark::DoNotOptimize(predictor.distribution().data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_PredictorFeed)->Args({64, 1})->Args({128, 1});

}  // namespace
