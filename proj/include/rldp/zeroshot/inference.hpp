#pragma once

#include <rldp/replearn/encoder.hpp>
#include <rldp/zeroshot/reward.hpp>

#include <Eigen/Dense>

#include <numeric>

namespace rldp {

/// Dataset rows used for inference: a full sweep when n >= size, otherwise
/// n distinct rows drawn uniformly (partial Fisher-Yates).
inline std::vector<std::size_t> inference_indices(std::size_t size, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("reward inference needs N >= 1");
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  if (n >= size) return idx;
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + uniform_index(rng, size - i)]);
  idx.resize(n);
  return idx;
}

/// Rescales z to norm sqrt(d); a zero z stays zero.
inline Tensor rescale_to_sphere(Tensor z) {
  double n2 = 0.0;
  for (double v : z.values()) n2 += v * v;
  if (n2 == 0.0) return z;
  const double s = std::sqrt(static_cast<double>(z.size()) / n2);
  for (double& v : z.values()) v *= s;
  return z;
}

/// Next states of `indices` and their rewards.
inline std::pair<Tensor, std::vector<double>> reward_samples(const Dataset& data, const Environment& env,
                                                             const RewardSpec& reward, std::span<const std::size_t> indices) {
  Tensor s = Tensor::matrix(indices.size(), data.meta.obs_dim);
  std::vector<double> r(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto sn = data.next_state(indices[i]);
    std::copy(sn.begin(), sn.end(), s.row(i).begin());
    r[i] = reward(env, sn);
  }
  return {std::move(s), std::move(r)};
}

/// z = (1/N) sum_i phi(s'_i) r(s'_i) over the given dataset rows.
inline Tensor infer_z_mean(const Dataset& data, const EncoderParams& enc, const Environment& env, const RewardSpec& reward,
                           std::span<const std::size_t> indices, bool rescale = true) {
  if (indices.empty()) throw std::invalid_argument("reward inference needs N >= 1");
  auto [s, r] = reward_samples(data, env, reward, indices);
  const Tensor phi = encode(enc, s);
  Tensor z = Tensor::matrix(1, enc.arch.d);
  for (std::size_t i = 0; i < phi.rows(); ++i)
    for (std::size_t k = 0; k < phi.cols(); ++k) z[k] += phi(i, k) * r[i];
  for (double& v : z.values()) v /= static_cast<double>(indices.size());
  return rescale ? rescale_to_sphere(std::move(z)) : z;
}

inline Tensor infer_z_mean(const Dataset& data, const EncoderParams& enc, const Environment& env, const RewardSpec& reward,
                           std::size_t n, Rng& rng, bool rescale = true) {
  return infer_z_mean(data, enc, env, reward, inference_indices(data.size(), n, rng), rescale);
}

/// Solves (Phi^T Phi + ridge I) z = Phi^T r over the design rows Phi.
inline Tensor solve_ridge(const Tensor& phi, std::span<const double> r, double ridge) {
  if (ridge < 0.0) throw std::invalid_argument("ridge must be >= 0");
  const Eigen::MatrixXd x = phi.mat();
  const Eigen::Map<const Eigen::VectorXd> y(r.data(), static_cast<Eigen::Index>(r.size()));
  Eigen::MatrixXd a = x.transpose() * x;
  a.diagonal().array() += ridge;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < a.rows()) {
    throw std::invalid_argument("regression design is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                                std::to_string(a.rows()) + "); use ridge > 0");
  }
  const Eigen::VectorXd z = qr.solve(x.transpose() * y);
  Tensor out = Tensor::matrix(1, phi.cols());
  for (std::size_t k = 0; k < phi.cols(); ++k) out[k] = z[static_cast<Eigen::Index>(k)];
  return out;
}

/// Least-squares z with phi^T z ~ r on the sampled next states.
inline Tensor infer_z_regression(const Dataset& data, const EncoderParams& enc, const Environment& env,
                                 const RewardSpec& reward, std::span<const std::size_t> indices, double ridge,
                                 bool rescale = true) {
  if (indices.empty()) throw std::invalid_argument("reward inference needs N >= 1");
  auto [s, r] = reward_samples(data, env, reward, indices);
  Tensor z = solve_ridge(encode(enc, s), r, ridge);
  return rescale ? rescale_to_sphere(std::move(z)) : z;
}

inline Tensor infer_z_regression(const Dataset& data, const EncoderParams& enc, const Environment& env,
                                 const RewardSpec& reward, std::size_t n, double ridge, Rng& rng, bool rescale = true) {
  return infer_z_regression(data, enc, env, reward, inference_indices(data.size(), n, rng), ridge, rescale);
}

}  // namespace rldp
