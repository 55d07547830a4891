// SPDX-License-Identifier: Apache-2.0
//
// Stateful truncated-BPTT training. The token stream is cut into batch_size
// equal contiguous lanes (the tail remainder is dropped); each step consumes
// the next bptt_len tokens of every lane, runs forward/backward, clips the
// global gradient norm and applies Adam. Recurrent state carries from one
// window to the next within a lane but gradients stop at window edges.

#pragma once

#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "codelm/adam.hpp"
#include "codelm/corpus.hpp"
#include "codelm/lstm.hpp"

namespace codelm {

struct TrainLogEntry {
  std::size_t step = 0;  // 1-based
  std::size_t tokens_seen = 0;
  double cross_entropy_bits = 0.0;  // mean over the step's batch, before the update
};

struct TrainOptions {
  /// Whole passes over the lanes; ignored when AdamConfig::max_steps > 0.
  std::size_t epochs = 1;
  /// Lanes processed per forward/backward call. Only affects memory use and
  /// speed; gradients are summed over chunks in a fixed order.
  std::size_t lane_chunk = 32;
  std::function<void(std::string_view)> on_warning;
  std::function<void(const TrainLogEntry&)> on_step;
};

struct TrainResult {
  LstmParams params;
  std::vector<TrainLogEntry> log;
  std::size_t batch_size = 0;  // after any reduction for short streams
};

/// Initializes parameters from `model` (seeded) and trains on `stream`.
/// Throws InputError for streams shorter than two tokens.
TrainResult train(const ModelConfig& model, const TokenStream& stream, const AdamConfig& adam,
                  const TrainOptions& options = {});
TrainResult train(LstmParams initial, const TokenStream& stream, const AdamConfig& adam,
                  const TrainOptions& options = {});

/// CSV with header `step,tokens_seen,cross_entropy_bits`.
void write_training_log(std::ostream& out, std::span<const TrainLogEntry> log);

}  // namespace codelm
