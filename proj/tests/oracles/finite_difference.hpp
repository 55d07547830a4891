// SPDX-License-Identifier: Apache-2.0
//
// Central finite differences of the mean cross-entropy, evaluated through the
// scalar oracle, compared against the analytic gradients from backward().

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "codelm/lstm.hpp"
#include "scalar_lstm.hpp"

namespace oracle {

struct GradientCheck {
  double max_relative_error = 0.0;
  std::string worst;  // "<array>[index]"
  std::size_t checked = 0;
};

/// |a − n| / max(|a|, |n|, floor). The floor keeps entries whose true value
/// is at the level of finite-difference noise from dominating.
inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline ScalarState to_scalar(const codelm::LstmState& s) {
  ScalarState out;
  for (std::size_t l = 0; l < s.h.size(); ++l) {
    out.h.emplace_back(s.h[l].row(0).begin(), s.h[l].row(0).end());
    out.c.emplace_back(s.c[l].row(0).begin(), s.c[l].row(0).end());
  }
  return out;
}

inline GradientCheck check_gradients(const codelm::LstmParams& params, const codelm::LstmState& initial,
                                     const std::vector<codelm::TokenId>& inputs,
                                     const std::vector<codelm::TokenId>& targets, double step, double floor) {
  const auto tape = codelm::forward(params, initial, inputs);
  const auto grads = codelm::backward(params, tape, targets);

  GradientCheck result;
  auto record = [&](double analytic, double numeric, const std::string& where) {
    const double err = relative_error(analytic, numeric, floor);
    ++result.checked;
    if (err > result.max_relative_error || result.worst.empty()) {
      result.max_relative_error = err;
      result.worst = where;
    }
  };

  codelm::LstmParams probe = params;
  const ScalarState s0 = to_scalar(initial);
  for (const auto& block : params.blocks()) {
    for (std::size_t k = 0; k < block.size(); ++k) {
      const std::size_t idx = block.offset + k;
      const double saved = probe.flat()[idx];
      probe.flat()[idx] = saved + step;
      const double up = mean_loss(probe, s0, inputs, targets);
      probe.flat()[idx] = saved - step;
      const double down = mean_loss(probe, s0, inputs, targets);
      probe.flat()[idx] = saved;
      record(grads.params.flat()[idx], (up - down) / (2.0 * step), block.name + "[" + std::to_string(k) + "]");
    }
  }

  for (std::size_t l = 0; l < s0.h.size(); ++l) {
    for (std::size_t j = 0; j < s0.h[l].size(); ++j) {
      for (int which = 0; which < 2; ++which) {
        ScalarState up = s0, down = s0;
        auto& u = which == 0 ? up.h[l][j] : up.c[l][j];
        auto& d = which == 0 ? down.h[l][j] : down.c[l][j];
        u += step;
        d -= step;
        const double numeric = (mean_loss(params, up, inputs, targets) - mean_loss(params, down, inputs, targets)) /
                               (2.0 * step);
        const auto& g = which == 0 ? grads.initial_state.h[l] : grads.initial_state.c[l];
        record(g(0, j), numeric, std::string(which == 0 ? "h0" : "c0") + "[" + std::to_string(l) + "][" +
                                     std::to_string(j) + "]");
      }
    }
  }
  return result;
}

}  // namespace oracle
