// SPDX-License-Identifier: Apache-2.0

#include "codelm/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "codelm/error.hpp"
#include "codelm/random.hpp"

namespace codelm {

namespace {

constexpr const char* kGateNames[kGateCount] = {"input", "forget", "output", "cell"};
constexpr char kGateLetters[kGateCount] = {'i', 'f', 'o', 'g'};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One layer, one time step. `gates` receives post-activation values.
void layer_forward(const LstmParams& params, std::size_t layer, ConstMatRef x, ConstMatRef h_prev,
                   ConstMatRef c_prev, MatRef gates, MatRef c, MatRef tanh_c, MatRef h) {
  const std::size_t hidden = params.config().hidden_dim;
  const std::size_t batch = x.rows();

  std::fill(gates.flat().begin(), gates.flat().end(), 0.0);
  gemm_nt(x, params.input_weights(layer), gates);
  gemm_nt(h_prev, params.recurrent_weights(layer), gates);
  const auto bias = params.bias(layer);

  for (std::size_t b = 0; b < batch; ++b) {
    auto z = gates.row(b);
    for (std::size_t j = 0; j < 4 * hidden; ++j) {
      z[j] += bias[j];
      if (!std::isfinite(z[j])) {
        const std::size_t gate = j / hidden;
        throw NumericError("non-finite pre-activation in layer " + std::to_string(layer) + ", " +
                           kGateNames[gate] + " gate (unit " + std::to_string(j % hidden) + ")");
      }
    }
    for (std::size_t j = 0; j < 3 * hidden; ++j) z[j] = sigmoid(z[j]);
    for (std::size_t j = 3 * hidden; j < 4 * hidden; ++j) z[j] = std::tanh(z[j]);

    const double* ig = z.data();
    const double* fg = ig + hidden;
    const double* og = fg + hidden;
    const double* gg = og + hidden;
    const auto cp = c_prev.row(b);
    auto cr = c.row(b);
    auto tr = tanh_c.row(b);
    auto hr = h.row(b);
    for (std::size_t j = 0; j < hidden; ++j) {
      cr[j] = fg[j] * cp[j] + ig[j] * gg[j];
      tr[j] = std::tanh(cr[j]);
      hr[j] = og[j] * tr[j];
    }
  }
}

void check_tokens(std::span<const TokenId> ids, std::size_t vocab_size) {
  for (auto id : ids) {
    if (id >= vocab_size) {
      throw InputError("token id " + std::to_string(id) + " out of range for vocabulary of size " +
                       std::to_string(vocab_size));
    }
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < 1) throw InputError("model config: vocab_size must be >= 1");
  if (embed_dim < 1) throw InputError("model config: embed_dim must be >= 1");
  if (hidden_dim < 1) throw InputError("model config: hidden_dim must be >= 1");
  if (num_layers < 1) throw InputError("model config: num_layers must be >= 1");
  if (bptt_len < 1) throw InputError("model config: bptt_len must be >= 1");
}

LstmParams::LstmParams(const ModelConfig& config) : config_(config) {
  config_.validate();
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    Range r{offset, rows, cols};
    offset += rows * cols;
    return std::pair{r, std::move(name)};
  };
  auto record = [&](const Range& r, std::string name) { blocks_.push_back({std::move(name), r.offset, r.rows, r.cols}); };

  const std::size_t h = config_.hidden_dim;
  {
    auto [r, name] = add("E", config_.vocab_size, config_.embed_dim);
    embedding_ = r;
    record(r, name);
  }
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::string suffix = "[" + std::to_string(l) + "]";
    LayerRanges lr;
    lr.w = {offset, 4 * h, config_.input_dim(l)};
    for (std::size_t g = 0; g < kGateCount; ++g) {
      auto [r, name] = add(std::string("W_") + kGateLetters[g] + suffix, h, config_.input_dim(l));
      record(r, name);
    }
    lr.u = {offset, 4 * h, h};
    for (std::size_t g = 0; g < kGateCount; ++g) {
      auto [r, name] = add(std::string("U_") + kGateLetters[g] + suffix, h, h);
      record(r, name);
    }
    lr.b = {offset, 1, 4 * h};
    for (std::size_t g = 0; g < kGateCount; ++g) {
      auto [r, name] = add(std::string("b_") + kGateLetters[g] + suffix, 1, h);
      record(r, name);
    }
    layers_.push_back(lr);
  }
  {
    auto [r, name] = add("C", config_.vocab_size, h);
    output_w_ = r;
    record(r, name);
  }
  {
    auto [r, name] = add("d", 1, config_.vocab_size);
    output_b_ = r;
    record(r, name);
  }
  data_.assign(offset, 0.0);
}

void LstmParams::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

LstmParams init_params(const ModelConfig& config) {
  LstmParams params(config);
  Rng rng(config.rng_seed);
  auto fill = [&](std::span<double> values) {
    for (double& v : values) v = rng.uniform(-0.08, 0.08);
  };
  fill(params.embedding().flat());
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    fill(params.input_weights(l).flat());
    fill(params.recurrent_weights(l).flat());
    auto bf = params.bias(l, Gate::forget);
    std::fill(bf.begin(), bf.end(), 1.0);
  }
  fill(params.output_weights().flat());
  return params;
}

LstmState LstmState::zeros(const ModelConfig& config, std::size_t batch) {
  LstmState s;
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    s.h.emplace_back(batch, config.hidden_dim);
    s.c.emplace_back(batch, config.hidden_dim);
  }
  return s;
}

StepResult lstm_step(const LstmParams& params, const LstmState& state, ConstMatRef inputs) {
  const auto& cfg = params.config();
  if (inputs.cols() != cfg.embed_dim) throw InputError("lstm_step: input width does not match embed_dim");
  if (state.h.size() != cfg.num_layers || state.batch() != inputs.rows()) {
    throw InputError("lstm_step: state shape does not match config/batch");
  }
  const std::size_t batch = inputs.rows();
  StepResult out{LstmState::zeros(cfg, batch), Matrix{}};
  Matrix gates(batch, 4 * cfg.hidden_dim);
  Matrix tanh_c(batch, cfg.hidden_dim);
  ConstMatRef x = inputs;
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    layer_forward(params, l, x, state.h[l], state.c[l], gates, out.state.c[l], tanh_c, out.state.h[l]);
    x = out.state.h[l];
  }
  out.top_hidden = out.state.h.back();
  return out;
}

StepResult lstm_step(const LstmParams& params, const LstmState& state, std::span<const double> input) {
  return lstm_step(params, state, ConstMatRef(input.data(), 1, input.size()));
}

void output_distribution(const LstmParams& params, ConstMatRef hidden, MatRef out) {
  const auto bias = params.output_bias();
  for (std::size_t b = 0; b < out.rows(); ++b) {
    auto row = out.row(b);
    std::copy(bias.begin(), bias.end(), row.begin());
  }
  gemm_nt(hidden, params.output_weights(), out);
  for (std::size_t b = 0; b < out.rows(); ++b) {
    auto row = out.row(b);
    const double mx = *std::max_element(row.begin(), row.end());
    if (!std::isfinite(mx)) throw NumericError("non-finite output logits");
    double sum = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      sum += v;
    }
    const double inv = 1.0 / sum;
    for (double& v : row) v *= inv;
  }
}

Tape forward(const LstmParams& params, const LstmState& initial, std::span<const TokenId> ids,
             std::size_t batch) {
  const auto& cfg = params.config();
  if (batch == 0 || ids.empty()) throw InputError("forward: sequence must contain at least one token");
  if (ids.size() % batch != 0) throw InputError("forward: token count is not a multiple of the batch size");
  if (initial.h.size() != cfg.num_layers || initial.batch() != batch) {
    throw InputError("forward: initial state shape does not match config/batch");
  }
  check_tokens(ids, cfg.vocab_size);

  Tape tape;
  tape.steps = ids.size() / batch;
  tape.batch = batch;
  tape.num_layers = cfg.num_layers;
  tape.inputs.assign(ids.begin(), ids.end());
  tape.initial = initial;
  tape.records.reserve(tape.steps * cfg.num_layers);
  tape.probs.reserve(tape.steps);

  const auto embedding = params.embedding();
  for (std::size_t t = 0; t < tape.steps; ++t) {
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
      Tape::LayerStep rec{Matrix(batch, cfg.input_dim(l)), Matrix(batch, 4 * cfg.hidden_dim),
                          Matrix(batch, cfg.hidden_dim), Matrix(batch, cfg.hidden_dim),
                          Matrix(batch, cfg.hidden_dim)};
      if (l == 0) {
        for (std::size_t b = 0; b < batch; ++b) {
          auto src = embedding.row(ids[t * batch + b]);
          std::copy(src.begin(), src.end(), rec.x.row(b).begin());
        }
      } else {
        rec.x = tape.records.back().h;
      }
      ConstMatRef h_prev = t == 0 ? ConstMatRef(initial.h[l]) : ConstMatRef(tape.at(t - 1, l).h);
      ConstMatRef c_prev = t == 0 ? ConstMatRef(initial.c[l]) : ConstMatRef(tape.at(t - 1, l).c);
      layer_forward(params, l, rec.x, h_prev, c_prev, rec.gates, rec.c, rec.tanh_c, rec.h);
      tape.records.push_back(std::move(rec));
    }
    Matrix probs(batch, cfg.vocab_size);
    output_distribution(params, tape.records.back().h, probs);
    tape.probs.push_back(std::move(probs));
  }

  tape.final_state = LstmState::zeros(cfg, batch);
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    tape.final_state.h[l] = tape.at(tape.steps - 1, l).h;
    tape.final_state.c[l] = tape.at(tape.steps - 1, l).c;
  }
  return tape;
}

double accumulate_gradients(const LstmParams& params, const Tape& tape, std::span<const TokenId> targets,
                            double normalizer, LstmParams& grads, LstmState* initial_grad) {
  const auto& cfg = params.config();
  if (targets.size() != tape.inputs.size()) {
    throw InputError("backward: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(tape.inputs.size()) + " inputs");
  }
  if (!(grads.config() == cfg)) throw InputError("backward: gradient buffer shape mismatch");
  check_tokens(targets, cfg.vocab_size);

  const std::size_t batch = tape.batch;
  const std::size_t hidden = cfg.hidden_dim;
  const std::size_t layers = cfg.num_layers;
  const double scale = 1.0 / normalizer;

  // Carries from step t+1 into step t, per layer.
  std::vector<Matrix> dh_next, dc_next;
  for (std::size_t l = 0; l < layers; ++l) {
    dh_next.emplace_back(batch, hidden);
    dc_next.emplace_back(batch, hidden);
  }
  Matrix dlogits(batch, cfg.vocab_size);
  Matrix dh(batch, hidden);
  Matrix dz(batch, 4 * hidden);
  std::vector<Matrix> dx;
  for (std::size_t l = 0; l < layers; ++l) dx.emplace_back(batch, cfg.input_dim(l));

  auto d_out_w = grads.output_weights();
  auto d_out_b = grads.output_bias();
  auto d_embedding = grads.embedding();
  double loss = 0.0;

  for (std::size_t step = tape.steps; step-- > 0;) {
    // Softmax + cross-entropy.
    const Matrix& probs = tape.probs[step];
    for (std::size_t b = 0; b < batch; ++b) {
      const TokenId target = targets[step * batch + b];
      loss -= std::log(probs(b, target));
      auto src = probs.row(b);
      auto dst = dlogits.row(b);
      for (std::size_t v = 0; v < src.size(); ++v) dst[v] = src[v] * scale;
      dst[target] -= scale;
      for (std::size_t v = 0; v < src.size(); ++v) d_out_b[v] += dst[v];
    }
    const auto& top = tape.at(step, layers - 1);
    gemm_tn(dlogits, top.h, d_out_w);

    // dh for the top layer: from the output plus the recurrent carry.
    dh = dh_next[layers - 1];
    gemm_nn(dlogits, params.output_weights(), dh);

    for (std::size_t l = layers; l-- > 0;) {
      const auto& rec = tape.at(step, l);
      ConstMatRef c_prev = step == 0 ? ConstMatRef(tape.initial.c[l]) : ConstMatRef(tape.at(step - 1, l).c);
      ConstMatRef h_prev = step == 0 ? ConstMatRef(tape.initial.h[l]) : ConstMatRef(tape.at(step - 1, l).h);
      Matrix& dc = dc_next[l];

      for (std::size_t b = 0; b < batch; ++b) {
        const double* ig = rec.gates.row(b).data();
        const double* fg = ig + hidden;
        const double* og = fg + hidden;
        const double* gg = og + hidden;
        const auto tc = rec.tanh_c.row(b);
        const auto cp = c_prev.row(b);
        const auto dhr = dh.row(b);
        auto dcr = dc.row(b);
        double* dzi = dz.row(b).data();
        double* dzf = dzi + hidden;
        double* dzo = dzf + hidden;
        double* dzg = dzo + hidden;
        for (std::size_t j = 0; j < hidden; ++j) {
          const double d_o = dhr[j] * tc[j];
          const double dcj = dcr[j] + dhr[j] * og[j] * (1.0 - tc[j] * tc[j]);
          dzi[j] = dcj * gg[j] * ig[j] * (1.0 - ig[j]);
          dzf[j] = dcj * cp[j] * fg[j] * (1.0 - fg[j]);
          dzo[j] = d_o * og[j] * (1.0 - og[j]);
          dzg[j] = dcj * ig[j] * (1.0 - gg[j] * gg[j]);
          dcr[j] = dcj * fg[j];  // becomes dc for step-1
        }
      }

      gemm_tn(dz, rec.x, grads.input_weights(l));
      gemm_tn(dz, h_prev, grads.recurrent_weights(l));
      auto db = grads.bias(l);
      for (std::size_t b = 0; b < batch; ++b) {
        auto row = dz.row(b);
        for (std::size_t j = 0; j < row.size(); ++j) db[j] += row[j];
      }

      dx[l].set_zero();
      gemm_nn(dz, params.input_weights(l), dx[l]);
      dh_next[l].set_zero();
      gemm_nn(dz, params.recurrent_weights(l), dh_next[l]);

      if (l > 0) {
        // Next layer down receives dx as part of its dh.
        dh = dh_next[l - 1];
        auto src = dx[l].flat();
        auto dst = dh.flat();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      } else {
        for (std::size_t b = 0; b < batch; ++b) {
          auto row = d_embedding.row(tape.inputs[step * batch + b]);
          auto src = dx[0].row(b);
          for (std::size_t k = 0; k < row.size(); ++k) row[k] += src[k];
        }
      }
    }
  }

  if (initial_grad != nullptr) {
    for (std::size_t l = 0; l < layers; ++l) {
      auto add = [](Matrix& dst, const Matrix& src) {
        auto d = dst.flat();
        auto s = src.flat();
        for (std::size_t k = 0; k < d.size(); ++k) d[k] += s[k];
      };
      add(initial_grad->h[l], dh_next[l]);
      add(initial_grad->c[l], dc_next[l]);
    }
  }
  return loss;
}

Gradients backward(const LstmParams& params, const Tape& tape, std::span<const TokenId> targets) {
  Gradients g{LstmParams(params.config()), LstmState::zeros(params.config(), tape.batch), 0.0};
  const double n = static_cast<double>(targets.size());
  g.loss = accumulate_gradients(params, tape, targets, n, g.params, &g.initial_state) / n;
  return g;
}

LstmPredictor::LstmPredictor(const LstmParams& params)
    : params_(params),
      state_(LstmState::zeros(params.config(), 1)),
      input_(1, params.config().embed_dim),
      probs_(1, params.config().vocab_size) {
  reset();
}

void LstmPredictor::reset() {
  state_ = LstmState::zeros(params_.config(), 1);
  output_distribution(params_, state_.h.back(), probs_);
}

void LstmPredictor::feed(TokenId token) {
  if (token >= params_.config().vocab_size) check_tokens(std::span(&token, 1), params_.config().vocab_size);
  auto src = params_.embedding().row(token);
  std::copy(src.begin(), src.end(), input_.row(0).begin());
  auto step = lstm_step(params_, state_, input_);
  state_ = std::move(step.state);
  output_distribution(params_, state_.h.back(), probs_);
}

double mean_cross_entropy_bits(const LstmParams& params, std::span<const TokenId> stream) {
  if (stream.size() < 2) throw InputError("mean_cross_entropy_bits: need at least two tokens");
  LstmPredictor predictor(params);
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < stream.size(); ++t) {
    predictor.feed(stream[t]);
    total -= std::log2(predictor.distribution()[stream[t + 1]]);
  }
  return total / static_cast<double>(stream.size() - 1);
}

}  // namespace codelm
