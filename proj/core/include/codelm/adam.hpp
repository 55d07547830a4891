// SPDX-License-Identifier: Apache-2.0
//
// Adam over flat parameter buffers, plus global-norm gradient clipping.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace codelm {

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 128;
  std::size_t max_steps = 0;  // 0: run whole epochs instead
  double clip_norm = 5.0;     // <= 0 disables clipping

  /// Throws InputError on the first violated constraint.
  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One Adam update of `params` in place. Throws NumericError if any gradient
/// entry is not finite (nothing is modified in that case).
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& config);

double global_norm(std::span<const double> values);

/// Rescales `grads` so its L2 norm is at most `max_norm`. Returns the norm
/// before clipping.
double clip_global_norm(std::span<double> grads, double max_norm);

}  // namespace codelm
