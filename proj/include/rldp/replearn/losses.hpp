#pragma once

#include <rldp/envdata/sampling.hpp>
#include <rldp/replearn/encoder.hpp>

#include <cmath>

namespace rldp {

/// Mean over the batch of sum_t ||h_{t+1} - phi_target(s_{t+1})||^2, with
/// h_0 = phi(s_0). The target branch carries no gradient.
inline Var loss_dynamics(const EncoderParams& p, const SegmentBatch& seg) {
  if (seg.horizon == 0 || seg.states.size() != seg.horizon + 1) {
    throw DimensionError("loss_dynamics", "segment batch has inconsistent horizon");
  }
  std::vector<Var> actions;
  for (const Tensor& a : seg.actions) actions.push_back(constant(a));
  auto predicted = rollout_latent(p, encode(p, constant(seg.states[0])), actions);
  Var total;
  for (std::size_t t = 0; t < seg.horizon; ++t) {
    Var target = constant(encode(p, seg.states[t + 1], /*use_target=*/true));
    Var err = sum(square(sub(predicted[t], target)));
    total = total.defined() ? add(total, err) : err;
  }
  return scale(total, 1.0 / static_cast<double>(seg.batch_size()));
}

/// Mean off-diagonal entry of the Gram matrix of the given embeddings.
inline Var gram_offdiag(const Var& emb) {
  if (emb.rows() < 2) throw std::invalid_argument("orthogonality loss needs a batch of at least 2");
  return offdiag_mean(matmul_nt(emb, emb));
}

/// E_{s != s'}[phi(s)^T phi(s')] over a batch of independently drawn states.
inline Var loss_ortho(const EncoderParams& p, const Tensor& states) { return gram_offdiag(encode(p, constant(states))); }

/// L_d + lambda * L_r, with L_r on the segments' first states.
inline Var loss_rldp(const EncoderParams& p, const SegmentBatch& seg, double lambda) {
  Var ld = loss_dynamics(p, seg);
  if (lambda == 0.0) return ld;
  return add(ld, scale(loss_ortho(p, seg.states[0]), lambda));
}

/// 1/2 E||phi(s) - phi(s')||^2 over consecutive pairs plus beta times the
/// off-diagonal Gram mean over the independent batch `others`.
inline Var loss_laplacian(const EncoderParams& p, const Tensor& states, const Tensor& next_states, const Tensor& others,
                          double beta) {
  Var diff = sub(encode(p, constant(states)), encode(p, constant(next_states)));
  Var smooth = scale(sum(square(diff)), 0.5 / static_cast<double>(states.rows()));
  if (beta == 0.0) return smooth;
  return add(smooth, scale(loss_ortho(p, others), beta));
}

/// Mean cosine similarity over unordered distinct pairs of rows.
inline double cosine_similarity_mean(const Tensor& emb) {
  const std::size_t n = emb.rows();
  if (n < 2) throw std::invalid_argument("cosine_similarity_mean needs at least 2 rows");
  Eigen::MatrixXd m = emb.mat();
  Eigen::VectorXd norms = m.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (norms[i] == 0.0) throw std::invalid_argument("cosine_similarity_mean: zero-norm row");
  }
  const Eigen::MatrixXd u = norms.cwiseInverse().asDiagonal() * m;
  const Eigen::MatrixXd c = u * u.transpose();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) total += c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return std::clamp(total / (0.5 * static_cast<double>(n * (n - 1))), -1.0, 1.0);
}

}  // namespace rldp
