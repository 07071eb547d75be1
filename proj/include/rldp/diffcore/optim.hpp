#pragma once

#include <rldp/diffcore/param_store.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

namespace rldp {

struct AdamState {
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double learning_rate = 1e-3;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;

  static AdamState with_lr(double lr) {
    AdamState s;
    s.learning_rate = lr;
    return s;
  }
};

namespace detail {

inline void check_finite_grads(const ParamStore& params) {
  for (const auto& [name, v] : params) {
    if (!v.requires_grad()) continue;
    for (double g : v.grad().values()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter '" + name + "'; step aborted");
    }
  }
}

}  // namespace detail

/// One bias-corrected Adam update over every trainable entry of `params`,
/// reading the gradients accumulated on the leaves. A non-finite gradient
/// aborts before anything is modified.
inline void adam_step(AdamState& state, ParamStore& params) {
  detail::check_finite_grads(params);
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (auto& [name, v] : params) {
    if (!v.requires_grad()) continue;
    Tensor& p = v.mutable_value();
    const Tensor& g = v.grad();
    auto [mit, fresh_m] = state.first_moment.try_emplace(name, p.shape(), 0.0);
    auto [vit, fresh_v] = state.second_moment.try_emplace(name, p.shape(), 0.0);
    Tensor& m = mit->second;
    Tensor& s = vit->second;
    if (m.shape() != p.shape() || s.shape() != p.shape()) throw DimensionError(name, "Adam moment shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      s[i] = state.beta2 * s[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double shat = s[i] / c2;
      p[i] -= state.learning_rate * mhat / (std::sqrt(shat) + state.eps);
    }
  }
}

/// Plain gradient descent, used by the tabular harnesses where a fixed
/// step makes the fixed-point iteration easy to reason about.
inline void sgd_step(ParamStore& params, double learning_rate) {
  detail::check_finite_grads(params);
  for (auto& [_, v] : params) {
    if (!v.requires_grad()) continue;
    v.mutable_value().mat() -= learning_rate * v.grad().mat();
  }
}

}  // namespace rldp
