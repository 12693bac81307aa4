#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "schemabind/errors.hpp"
#include "schemabind/tensor.hpp"

namespace schemabind {

// Bias-corrected Adam over a flat parameter vector.
struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t t = 0;
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(size_t n_params = 0, double lr_ = 1e-4)
      : lr(lr_), m(n_params, 0.0), v(n_params, 0.0) {}
};

// Global-norm clip; returns the pre-clip norm.
inline double clip_global_norm(std::vector<double>& grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    double s = max_norm / norm;
    for (double& g : grads) g *= s;
  }
  return norm;
}

inline void adam_step(std::vector<double>& params, const std::vector<double>& grads,
                      AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw DimensionError("adam_step: parameter/gradient/state sizes disagree");
  state.t += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    double mhat = state.m[i] / bc1;
    double vhat = state.v[i] / bc2;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

}  // namespace schemabind
