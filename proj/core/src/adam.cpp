// SPDX-License-Identifier: Apache-2.0

#include "codelm/adam.hpp"

#include <cmath>
#include <string>

#include "codelm/error.hpp"

namespace codelm {

void AdamConfig::validate() const {
  if (!(alpha > 0.0)) throw InputError("adam: alpha must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw InputError("adam: beta1 must be in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw InputError("adam: beta2 must be in (0, 1)");
  if (!(eps > 0.0)) throw InputError("adam: eps must be > 0");
  if (batch_size < 1) throw InputError("adam: batch_size must be >= 1");
  if (std::isnan(clip_norm)) throw InputError("adam: clip_norm must be a number");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& config) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw InputError("adam_step: parameter, gradient and moment sizes differ");
  }
  for (std::size_t k = 0; k < grads.size(); ++k) {
    if (!std::isfinite(grads[k])) throw NumericError("adam_step: non-finite gradient at index " + std::to_string(k));
  }

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * g;
    state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[k] / correction1;
    const double v_hat = state.v[k] / correction2;
    params[k] -= config.alpha * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

double global_norm(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

double clip_global_norm(std::span<double> grads, double max_norm) {
  const double norm = global_norm(grads);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

}  // namespace codelm
