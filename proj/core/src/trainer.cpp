// SPDX-License-Identifier: Apache-2.0

#include "codelm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>

#include "codelm/error.hpp"

namespace codelm {

TrainResult train(const ModelConfig& model, const TokenStream& stream, const AdamConfig& adam,
                  const TrainOptions& options) {
  return train(init_params(model), stream, adam, options);
}

TrainResult train(LstmParams initial, const TokenStream& stream, const AdamConfig& adam, const TrainOptions& options) {
  adam.validate();
  const auto cfg = initial.config();
  const auto& ids = stream.ids;
  if (ids.size() < 2) throw InputError("train: empty stream (need at least two tokens)");

  // Inputs are ids[k], targets ids[k+1]; n_pairs such pairs exist.
  const std::size_t n_pairs = ids.size() - 1;
  std::size_t batch = adam.batch_size;
  if (n_pairs < batch * cfg.bptt_len) {
    batch = std::max<std::size_t>(1, n_pairs / cfg.bptt_len);
    if (options.on_warning) {
      options.on_warning("stream of " + std::to_string(ids.size()) + " tokens is shorter than batch_size x bptt_len; using batch size " +
                         std::to_string(batch));
    }
  }
  const std::size_t lane_len = n_pairs / batch;
  const std::size_t windows_per_epoch = (lane_len + cfg.bptt_len - 1) / cfg.bptt_len;
  const std::size_t total_steps = adam.max_steps > 0 ? adam.max_steps : options.epochs * windows_per_epoch;
  const std::size_t chunk = std::max<std::size_t>(1, std::min(options.lane_chunk, batch));

  struct Chunk {
    std::size_t first_lane;
    std::size_t lanes;
    LstmState state;
  };
  std::vector<Chunk> chunks;
  for (std::size_t b = 0; b < batch; b += chunk) {
    const std::size_t lanes = std::min(chunk, batch - b);
    chunks.push_back({b, lanes, LstmState::zeros(cfg, lanes)});
  }

  TrainResult result{std::move(initial), {}, batch};
  LstmParams& params = result.params;
  LstmParams grads(cfg);
  AdamState opt(params.size());
  std::vector<TokenId> inputs, targets;
  std::size_t tokens_seen = 0;
  std::size_t window = 0;

  for (std::size_t step = 1; step <= total_steps; ++step) {
    if (window == windows_per_epoch) {
      window = 0;
      for (auto& c : chunks) c.state = LstmState::zeros(cfg, c.lanes);
    }
    const std::size_t start = window * cfg.bptt_len;
    const std::size_t steps = std::min(cfg.bptt_len, lane_len - start);
    const double normalizer = static_cast<double>(steps * batch);

    grads.set_zero();
    double loss_nats = 0.0;
    for (auto& c : chunks) {
      inputs.resize(steps * c.lanes);
      targets.resize(steps * c.lanes);
      for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t j = 0; j < c.lanes; ++j) {
          const std::size_t pos = (c.first_lane + j) * lane_len + start + t;
          inputs[t * c.lanes + j] = ids[pos];
          targets[t * c.lanes + j] = ids[pos + 1];
        }
      }
      Tape tape = forward(params, c.state, inputs, c.lanes);
      loss_nats += accumulate_gradients(params, tape, targets, normalizer, grads, nullptr);
      c.state = std::move(tape.final_state);
    }

    clip_global_norm(grads.flat(), adam.clip_norm);
    adam_step(params.flat(), grads.flat(), opt, adam);

    tokens_seen += steps * batch;
    const TrainLogEntry entry{step, tokens_seen, loss_nats / normalizer / std::numbers::ln2};
    result.log.push_back(entry);
    if (options.on_step) options.on_step(entry);
    ++window;
  }

  for (double v : params.flat()) {
    if (!std::isfinite(v)) throw NumericError("train: parameters became non-finite");
  }
  return result;
}

void write_training_log(std::ostream& out, std::span<const TrainLogEntry> log) {
  out << "step,tokens_seen,cross_entropy_bits\n";
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(6);
  for (const auto& e : log) out << e.step << ',' << e.tokens_seen << ',' << e.cross_entropy_bits << '\n';
  out.flags(flags);
}

}  // namespace codelm
