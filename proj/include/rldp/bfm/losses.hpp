#pragma once

#include <rldp/bfm/model.hpp>
#include <rldp/envdata/sampling.hpp>

#include <cmath>
#include <optional>
#include <span>

namespace rldp {

/// Contrastive successor-measure loss on m(s, a, s+) = psi(s, a)^T phi(s+):
///   -mean_i psi_i . phi(s'_i)
///   + 1/2 mean_{i,j} (psi_i . phi(s+_j) - gamma nd_i target_psi'_i . target_phi(s+_j))^2
/// over all pairs of the batch and the s+ batch. nd_i = 0 cuts bootstrapping.
inline Var measure_loss(const Var& psi, const Var& phi_next, const Var& phi_plus, const Tensor& target_psi_next,
                        const Tensor& target_phi_plus, std::span<const double> not_done, double gamma) {
  const std::size_t b = psi.rows();
  if (phi_next.rows() != b || target_psi_next.rows() != b || not_done.size() != b) {
    throw DimensionError("measure_loss", "batch rows disagree");
  }
  Eigen::MatrixXd scaled = target_psi_next.mat();
  for (std::size_t i = 0; i < b; ++i) scaled.row(static_cast<Eigen::Index>(i)) *= gamma * not_done[i];
  Tensor target = Tensor::matrix(b, target_phi_plus.rows());
  target.mat() = scaled * target_phi_plus.mat().transpose();
  Var attract = scale(mean(rowwise_dot(psi, phi_next)), -1.0);
  Var td = scale(mean(square(sub(matmul_nt(psi, phi_plus), constant(std::move(target))))), 0.5);
  return add(attract, td);
}

/// Vector-valued TD loss: mean over batch and components of
/// (psi - [phi(s) + gamma nd target_psi'])^2.
inline Var usfa_loss(const Var& psi, const Tensor& phi_s, const Tensor& target_psi_next, std::span<const double> not_done,
                     double gamma) {
  const std::size_t b = psi.rows();
  if (phi_s.rows() != b || target_psi_next.rows() != b || not_done.size() != b) {
    throw DimensionError("usfa_loss", "batch rows disagree");
  }
  Tensor target = phi_s;
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t k = 0; k < target.cols(); ++k) target(i, k) += gamma * not_done[i] * target_psi_next(i, k);
  return mean(square(sub(psi, constant(std::move(target)))));
}

inline constexpr double kBcMinAbsQ = 1e-8;

/// alpha / mean|Q|, with mean|Q| floored at 1e-8.
inline double bc_lambda(const Tensor& q, double alpha) {
  double s = 0.0;
  for (double v : q.values()) s += std::abs(v);
  const double m = q.empty() ? 0.0 : s / static_cast<double>(q.size());
  return alpha / std::max(m, kBcMinAbsQ);
}

/// -lambda mean(Q) + mean((pi(s) - a)^2); lambda is a constant computed
/// from the batch unless overridden.
inline Var policy_bc_loss(const Var& q, const Var& policy_actions, const Tensor& data_actions, double alpha,
                          std::optional<double> lambda_override = std::nullopt) {
  const double lambda = lambda_override.value_or(bc_lambda(q.value(), alpha));
  Var bc = mean(square(sub(policy_actions, constant(data_actions))));
  return add(scale(mean(q), -lambda), bc);
}

/// z per row: with probability goal_fraction phi(s_g) for a uniformly drawn
/// dataset state, otherwise uniform on the radius-sqrt(d) sphere.
inline Tensor sample_z(Rng& rng, const Dataset& data, const EncoderParams& enc, double goal_fraction, std::size_t batch) {
  const std::size_t d = enc.arch.d;
  const double radius = std::sqrt(static_cast<double>(d));
  Tensor z = Tensor::matrix(batch, d);
  std::vector<std::size_t> goal_rows;
  for (std::size_t i = 0; i < batch; ++i) {
    if (uniform(rng) < goal_fraction) {
      goal_rows.push_back(i);
      continue;
    }
    double n2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      z(i, k) = normal(rng);
      n2 += z(i, k) * z(i, k);
    }
    const double s = radius / std::sqrt(n2);
    for (std::size_t k = 0; k < d; ++k) z(i, k) *= s;
  }
  if (!goal_rows.empty()) {
    Tensor goals = encode(enc, sample_states(data, goal_rows.size(), rng));
    for (std::size_t j = 0; j < goal_rows.size(); ++j)
      std::copy(goals.row(j).begin(), goals.row(j).end(), z.row(goal_rows[j]).begin());
  }
  return z;
}

/// Next-state action inputs for the bootstrap target: greedy argmax of the
/// target critic (discrete) or the target actor plus clipped Gaussian
/// smoothing noise (continuous; noise_std = 0 disables it).
inline Tensor target_next_actions(const BfmParams& p, const Tensor& next_states, const Tensor& z, double noise_std, Rng& rng) {
  Tensor a = policy_action_input(p, next_states, z, /*use_target=*/true);
  if (!p.arch.discrete() && noise_std > 0.0) {
    for (double& v : a.values()) v = std::clamp(v + std::clamp(noise_std * normal(rng), -0.5, 0.5), -1.0, 1.0);
  }
  return a;
}

/// Measure critic on frozen features.
inline Var loss_sm(const BfmParams& p, const EncoderParams& enc, const TransitionBatch& b, const Tensor& z,
                   const Tensor& next_actions, double gamma) {
  Var psi = critic_forward(p, constant(b.states), constant(b.actions), constant(z));
  Tensor psi_next = critic_forward(p, constant(b.next_states), constant(next_actions), constant(z), true).value();
  Tensor phi_plus = encode(enc, b.plus_states);
  return measure_loss(psi, constant(encode(enc, b.next_states)), constant(phi_plus), psi_next, phi_plus, b.not_done, gamma);
}

/// Same structure with phi trainable; the bootstrap uses the target encoder on s+.
inline Var loss_fb_joint(const BfmParams& p, const EncoderParams& enc, const TransitionBatch& b, const Tensor& z,
                         const Tensor& next_actions, double gamma) {
  Var psi = critic_forward(p, constant(b.states), constant(b.actions), constant(z));
  Tensor psi_next = critic_forward(p, constant(b.next_states), constant(next_actions), constant(z), true).value();
  return measure_loss(psi, encode(enc, constant(b.next_states)), encode(enc, constant(b.plus_states)), psi_next,
                      encode(enc, b.plus_states, /*use_target=*/true), b.not_done, gamma);
}

inline Var loss_usfa(const BfmParams& p, const EncoderParams& enc, const TransitionBatch& b, const Tensor& z,
                     const Tensor& next_actions, double gamma) {
  Var psi = critic_forward(p, constant(b.states), constant(b.actions), constant(z));
  Tensor psi_next = critic_forward(p, constant(b.next_states), constant(next_actions), constant(z), true).value();
  return usfa_loss(psi, encode(enc, b.states), psi_next, b.not_done, gamma);
}

/// -mean Q(s, pi(s), z) for the continuous actor; the gradient reaches the
/// actor through the action input of the critic.
inline Var loss_policy(const BfmParams& p, const Tensor& states, const Tensor& z) {
  Var zc = constant(z);
  Var a = actor_forward(p, constant(states), zc);
  return scale(mean(q_value(critic_forward(p, constant(states), a, zc), zc)), -1.0);
}

inline Var loss_policy_bc(const BfmParams& p, const Tensor& states, const Tensor& data_actions, const Tensor& z,
                          double alpha, std::optional<double> lambda_override = std::nullopt) {
  Var zc = constant(z);
  Var a = actor_forward(p, constant(states), zc);
  return policy_bc_loss(q_value(critic_forward(p, constant(states), a, zc), zc), a, data_actions, alpha, lambda_override);
}

}  // namespace rldp
