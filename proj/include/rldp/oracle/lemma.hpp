#pragma once

#include <rldp/envdata/sampling.hpp>
#include <rldp/oracle/tabular.hpp>
#include <rldp/replearn/losses.hpp>

#include <cmath>
#include <map>

namespace rldp {

inline constexpr double kLatentQuantum = 1e-6;

/// States grouped by exactly matching embeddings rounded to kLatentQuantum.
/// Cluster ids follow the first state index of each cluster.
struct StateAbstraction {
  std::vector<std::size_t> cluster_of;
  std::size_t num_clusters = 0;
};

inline StateAbstraction quantize_embeddings(const Tensor& phi) {
  StateAbstraction out;
  std::map<std::vector<long long>, std::size_t> ids;
  for (std::size_t s = 0; s < phi.rows(); ++s) {
    std::vector<long long> key;
    for (double v : phi.row(s)) key.push_back(std::llround(v / kLatentQuantum));
    auto [it, inserted] = ids.try_emplace(std::move(key), ids.size());
    out.cluster_of.push_back(it->second);
  }
  out.num_clusters = ids.size();
  return out;
}

/// Latent MDP of an abstraction: transitions and policy averaged uniformly
/// over the member states of each cluster; rho summed.
inline std::pair<TabularMdp, TabularPolicy> latent_mdp(const TabularMdp& m, const TabularPolicy& pi, const StateAbstraction& abs) {
  const auto k = static_cast<Eigen::Index>(abs.num_clusters);
  const auto A = static_cast<Eigen::Index>(m.n_actions);
  TabularMdp out;
  out.n_states = abs.num_clusters;
  out.n_actions = m.n_actions;
  out.gamma = m.gamma;
  out.P = Eigen::MatrixXd::Zero(k * A, k);
  out.rho = Eigen::VectorXd::Zero(k);
  TabularPolicy lpi{Eigen::MatrixXd::Zero(k, A)};
  std::vector<double> size(abs.num_clusters, 0.0);
  for (std::size_t s = 0; s < m.n_states; ++s) size[abs.cluster_of[s]] += 1.0;
  for (std::size_t s = 0; s < m.n_states; ++s) {
    const auto c = static_cast<Eigen::Index>(abs.cluster_of[s]);
    const double w = 1.0 / size[abs.cluster_of[s]];
    out.rho[c] += m.rho[static_cast<Eigen::Index>(s)];
    lpi.probs.row(c) += w * pi.probs.row(static_cast<Eigen::Index>(s));
    for (std::size_t a = 0; a < m.n_actions; ++a)
      for (std::size_t x = 0; x < m.n_states; ++x)
        out.P(c * A + static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(abs.cluster_of[x])) += w * m.p(s, a, x);
  }
  // Averaging can leave rounding residue; renormalize merged rows. Singleton
  // clusters are left bit-identical to the original MDP.
  for (Eigen::Index c = 0; c < k; ++c) {
    if (size[static_cast<std::size_t>(c)] == 1.0) continue;
    for (Eigen::Index a = 0; a < A; ++a) out.P.row(c * A + a) /= out.P.row(c * A + a).sum();
    lpi.probs.row(c) /= lpi.probs.row(c).sum();
  }
  out.rho /= out.rho.sum();
  return {std::move(out), std::move(lpi)};
}

struct LemmaReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double loss_dynamics = 0.0;
  double loss_ortho = 0.0;
  double loss_rldp = 0.0;
  std::size_t num_clusters = 0;
  std::size_t segments = 0;
};

/// Both sides of the successor-measure bound for an encoder:
///   lhs = E_{s,a ~ d^pi, s+ ~ rho} |M(s, a, s+) - Mbar(phi(s), a, phi(s+))|
///   rhs = (L_d + lambda L_r) / (1 - gamma)
/// d^pi starts from d0 uniform over the mdp states. The losses are taken
/// over every valid horizon-H segment of `data` (L_r on their first states).
/// `observations` holds one row per mdp state. No ordering is asserted.
inline LemmaReport lemma_bound_report(const EncoderParams& enc, const TabularMdp& m, const TabularPolicy& pi,
                                      const Tensor& observations, const Dataset& data, std::size_t horizon, double lambda) {
  m.validate();
  pi.validate(m.n_states, m.n_actions);
  if (observations.rows() != m.n_states) throw DimensionError("lemma_bound_report", "need one observation row per mdp state");
  LemmaReport rep;

  const StateAbstraction abs = quantize_embeddings(encode(enc, observations));
  rep.num_clusters = abs.num_clusters;
  const auto [lm, lpi] = latent_mdp(m, pi, abs);
  const Eigen::MatrixXd exact = successor_measure_exact(m, pi);
  const Eigen::MatrixXd latent = successor_measure_exact(lm, lpi);
  const Eigen::VectorXd d0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m.n_states), 1.0 / static_cast<double>(m.n_states));
  const Eigen::VectorXd dpi = discounted_visitation(m, pi, d0);
  const auto A = static_cast<Eigen::Index>(m.n_actions);
  for (std::size_t s = 0; s < m.n_states; ++s) {
    for (std::size_t a = 0; a < m.n_actions; ++a) {
      const double w = dpi[static_cast<Eigen::Index>(s)] * pi.probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
      if (w == 0.0) continue;
      const Eigen::Index r = static_cast<Eigen::Index>(m.row(s, a));
      const Eigen::Index lr = static_cast<Eigen::Index>(abs.cluster_of[s]) * A + static_cast<Eigen::Index>(a);
      double inner = 0.0;
      for (std::size_t x = 0; x < m.n_states; ++x) {
        inner += m.rho[static_cast<Eigen::Index>(x)] *
                 std::abs(exact(r, static_cast<Eigen::Index>(x)) - latent(lr, static_cast<Eigen::Index>(abs.cluster_of[x])));
      }
      rep.lhs += w * inner;
    }
  }

  // L_d in chunks (it is a per-segment mean); L_r in closed form since the
  // off-diagonal Gram mean is (|sum phi|^2 - sum |phi|^2) / (n (n - 1)).
  const SegmentSampler sampler(data, horizon);
  const auto& starts = sampler.valid_starts();
  rep.segments = starts.size();
  constexpr std::size_t kChunk = 512;
  double ld = 0.0;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(enc.arch.d));
  double sq = 0.0;
  for (std::size_t i = 0; i < starts.size(); i += kChunk) {
    const std::span<const std::size_t> chunk(starts.data() + i, std::min(kChunk, starts.size() - i));
    const SegmentBatch seg = segments_at(data, chunk, horizon);
    ld += loss_dynamics(enc, seg).value().item() * static_cast<double>(chunk.size());
    const Tensor phi = encode(enc, seg.states[0]);
    total += phi.mat().colwise().sum().transpose();
    sq += phi.mat().squaredNorm();
  }
  const double n = static_cast<double>(starts.size());
  rep.loss_dynamics = ld / n;
  rep.loss_ortho = n > 1.0 ? (total.squaredNorm() - sq) / (n * (n - 1.0)) : 0.0;
  rep.loss_rldp = rep.loss_dynamics + lambda * rep.loss_ortho;
  rep.rhs = rep.loss_rldp / (1.0 - m.gamma);
  return rep;
}

}  // namespace rldp
