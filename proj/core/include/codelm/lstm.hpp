// SPDX-License-Identifier: Apache-2.0
//
// Stacked LSTM character language model: embedding lookup, L layers of LSTM
// cells, a linear output projection and softmax. Forward and hand-derived
// backpropagation through time, all in double precision.
//
// Per layer and time step the cell computes
//
//   i = σ(W_i x + U_i h' + b_i)     f = σ(W_f x + U_f h' + b_f)
//   o = σ(W_o x + U_o h' + b_o)     g = tanh(W_g x + U_g h' + b_g)
//   c = f ⊙ c' + i ⊙ g              h = o ⊙ tanh(c)
//
// where h', c' are the previous step's values; layer l+1 takes layer l's h as
// its x. The output distribution is softmax(C h_top + d).

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "codelm/corpus.hpp"
#include "codelm/matrix.hpp"

namespace codelm {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 128;
  std::size_t num_layers = 2;
  std::size_t bptt_len = 50;
  std::uint64_t rng_seed = 0;

  /// Throws InputError listing the first violated constraint.
  void validate() const;
  std::size_t input_dim(std::size_t layer) const { return layer == 0 ? embed_dim : hidden_dim; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class Gate : std::size_t { input = 0, forget = 1, output = 2, cell = 3 };
inline constexpr std::size_t kGateCount = 4;

/// All learned arrays in one contiguous buffer. Declared order: embedding E,
/// then per layer W_i W_f W_o W_g, U_i U_f U_o U_g, b_i b_f b_o b_g, then the
/// output projection C and output bias d. The four per-gate arrays of a kind
/// are adjacent, so e.g. input_weights(l) is the (4·hidden × input) stack.
///
/// The same type holds gradients and optimizer moments.
class LstmParams {
 public:
  struct Block {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t size() const { return rows * cols; }
  };

  /// Zero-filled parameters shaped by `config`.
  explicit LstmParams(const ModelConfig& config);

  const ModelConfig& config() const noexcept { return config_; }
  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  /// Every array in declared order.
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  MatRef embedding() { return view(embedding_); }
  ConstMatRef embedding() const { return view(embedding_); }

  MatRef input_weights(std::size_t layer) { return view(layers_[layer].w); }
  ConstMatRef input_weights(std::size_t layer) const { return view(layers_[layer].w); }
  MatRef input_weights(std::size_t layer, Gate gate) { return gate_rows(input_weights(layer), gate); }
  ConstMatRef input_weights(std::size_t layer, Gate gate) const { return gate_rows(input_weights(layer), gate); }

  MatRef recurrent_weights(std::size_t layer) { return view(layers_[layer].u); }
  ConstMatRef recurrent_weights(std::size_t layer) const { return view(layers_[layer].u); }
  MatRef recurrent_weights(std::size_t layer, Gate gate) { return gate_rows(recurrent_weights(layer), gate); }
  ConstMatRef recurrent_weights(std::size_t layer, Gate gate) const {
    return gate_rows(recurrent_weights(layer), gate);
  }

  std::span<double> bias(std::size_t layer) { return view(layers_[layer].b).flat(); }
  std::span<const double> bias(std::size_t layer) const { return view(layers_[layer].b).flat(); }
  std::span<double> bias(std::size_t layer, Gate gate) { return gate_slice(bias(layer), gate); }
  std::span<const double> bias(std::size_t layer, Gate gate) const { return gate_slice(bias(layer), gate); }

  MatRef output_weights() { return view(output_w_); }
  ConstMatRef output_weights() const { return view(output_w_); }
  std::span<double> output_bias() { return view(output_b_).flat(); }
  std::span<const double> output_bias() const { return view(output_b_).flat(); }

  void set_zero();

  friend bool operator==(const LstmParams& a, const LstmParams& b) {
    return a.config_ == b.config_ && a.data_ == b.data_;
  }

 private:
  struct Range {
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
  };
  struct LayerRanges {
    Range w, u, b;
  };

  MatRef view(const Range& r) { return {data_.data() + r.offset, r.rows, r.cols}; }
  ConstMatRef view(const Range& r) const { return {data_.data() + r.offset, r.rows, r.cols}; }

  template <class T>
  MatrixView<T> gate_rows(MatrixView<T> stacked, Gate gate) const {
    const std::size_t h = config_.hidden_dim;
    return {stacked.data() + static_cast<std::size_t>(gate) * h * stacked.cols(), h, stacked.cols()};
  }
  template <class T>
  std::span<T> gate_slice(std::span<T> stacked, Gate gate) const {
    return stacked.subspan(static_cast<std::size_t>(gate) * config_.hidden_dim, config_.hidden_dim);
  }

  ModelConfig config_;
  std::vector<double> data_;
  std::vector<Block> blocks_;
  Range embedding_;
  std::vector<LayerRanges> layers_;
  Range output_w_;
  Range output_b_;
};

/// Weights uniform in [-0.08, 0.08] from `config.rng_seed`; biases zero
/// except the forget-gate biases, which are 1.
LstmParams init_params(const ModelConfig& config);

/// Recurrent carry: per layer a (batch × hidden) h and c.
struct LstmState {
  std::vector<Matrix> h;
  std::vector<Matrix> c;

  static LstmState zeros(const ModelConfig& config, std::size_t batch = 1);
  std::size_t batch() const noexcept { return h.empty() ? 0 : h.front().rows(); }

  friend bool operator==(const LstmState&, const LstmState&) = default;
};

struct StepResult {
  LstmState state;
  Matrix top_hidden;  // batch × hidden
};

/// Advances every layer one time step for a batch of input rows
/// (batch × embed_dim). Throws NumericError naming the layer and gate when a
/// gate pre-activation is not finite.
StepResult lstm_step(const LstmParams& params, const LstmState& state, ConstMatRef inputs);
StepResult lstm_step(const LstmParams& params, const LstmState& state, std::span<const double> input);

/// Row-wise softmax(C h + d), max-subtracted. `out` is batch × vocab_size.
void output_distribution(const LstmParams& params, ConstMatRef hidden, MatRef out);

/// Intermediates of a forward pass, consumed by backward. Token layout is
/// step-major: inputs[t * batch + b].
struct Tape {
  struct LayerStep {
    Matrix x;       // batch × input_dim
    Matrix gates;   // batch × 4·hidden, post-activation [i f o g]
    Matrix c;       // batch × hidden
    Matrix tanh_c;  // batch × hidden
    Matrix h;       // batch × hidden
  };

  std::size_t steps = 0;
  std::size_t batch = 0;
  std::size_t num_layers = 0;
  std::vector<TokenId> inputs;
  LstmState initial;
  LstmState final_state;
  std::vector<LayerStep> records;  // records[t * num_layers + l]
  std::vector<Matrix> probs;       // per step, batch × vocab

  const LayerStep& at(std::size_t t, std::size_t layer) const { return records[t * num_layers + layer]; }

  /// Distribution over the token after position t of lane b.
  std::span<const double> distribution(std::size_t t, std::size_t b = 0) const { return probs[t].row(b); }
};

/// Runs the model over `ids` (step-major, `batch` lanes) from `initial`.
/// Output t is the next-token distribution given inputs up to and including
/// t. Throws InputError on empty or ragged input or ids ≥ vocab_size.
Tape forward(const LstmParams& params, const LstmState& initial, std::span<const TokenId> ids,
             std::size_t batch = 1);

struct Gradients {
  LstmParams params;
  LstmState initial_state;  // d loss / d (h, c) carried into the window
  double loss = 0.0;        // mean cross-entropy in nats
};

/// Exact gradients of the mean per-token cross-entropy of `targets`
/// (same layout as the tape's inputs).
Gradients backward(const LstmParams& params, const Tape& tape, std::span<const TokenId> targets);

/// Accumulating form: adds d(sum of token cross-entropies / normalizer) into
/// `grads` (and into `initial_grad` when non-null). Returns the summed
/// cross-entropy in nats.
double accumulate_gradients(const LstmParams& params, const Tape& tape, std::span<const TokenId> targets,
                            double normalizer, LstmParams& grads, LstmState* initial_grad);

/// Single-lane incremental predictor used for scoring. Starts from the zero
/// state, whose prediction is softmax(d).
class LstmPredictor {
 public:
  explicit LstmPredictor(const LstmParams& params);

  /// Distribution over the next token given everything fed so far.
  std::span<const double> distribution() const { return probs_.row(0); }
  void feed(TokenId token);
  void reset();

 private:
  const LstmParams& params_;
  LstmState state_;
  Matrix input_;
  Matrix probs_;
};

/// Mean per-token cross-entropy (bits) of predicting stream[t+1] from
/// stream[0..t], carrying state over the whole stream.
double mean_cross_entropy_bits(const LstmParams& params, std::span<const TokenId> stream);

}  // namespace codelm
