#pragma once

#include <rldp/envdata/gridworld.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rldp {

inline constexpr double kDpTolerance = 1e-10;
inline constexpr std::size_t kDpIterationCap = 100000;

/// Finite MDP with rows P(s, a, .) stored at row s * n_actions + a.
struct TabularMdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  Eigen::MatrixXd P;  // (n_states * n_actions) x n_states
  Eigen::VectorXd rho;
  double gamma = 0.98;

  std::size_t row(std::size_t s, std::size_t a) const { return s * n_actions + a; }
  double p(std::size_t s, std::size_t a, std::size_t next) const {
    return P(static_cast<Eigen::Index>(row(s, a)), static_cast<Eigen::Index>(next));
  }

  void validate() const {
    if (n_states == 0 || n_actions == 0) throw std::invalid_argument("tabular mdp: empty state or action set");
    if (static_cast<std::size_t>(P.rows()) != n_states * n_actions || static_cast<std::size_t>(P.cols()) != n_states) {
      throw std::invalid_argument("tabular mdp: P must be (n_states * n_actions) x n_states");
    }
    if (static_cast<std::size_t>(rho.size()) != n_states) throw std::invalid_argument("tabular mdp: rho must have n_states entries");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("tabular mdp: gamma must lie in (0, 1)");
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
      if ((P.row(r).array() < 0.0).any() || std::abs(P.row(r).sum() - 1.0) > 1e-12) {
        const auto s = static_cast<std::size_t>(r) / n_actions, a = static_cast<std::size_t>(r) % n_actions;
        throw std::invalid_argument("tabular mdp: P(" + std::to_string(s) + ", " + std::to_string(a) + ", .) is not a distribution");
      }
    }
    if ((rho.array() < 0.0).any() || std::abs(rho.sum() - 1.0) > 1e-12) throw std::invalid_argument("tabular mdp: rho is not a distribution");
  }
};

/// Deterministic gridworld dynamics over free cells; rho uniform.
inline TabularMdp grid_mdp(const GridWorld& g, double gamma) {
  TabularMdp m;
  m.n_states = g.num_cells();
  m.n_actions = g.num_actions();
  m.P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.n_states * m.n_actions), static_cast<Eigen::Index>(m.n_states));
  for (std::size_t s = 0; s < m.n_states; ++s)
    for (std::size_t a = 0; a < m.n_actions; ++a)
      m.P(static_cast<Eigen::Index>(m.row(s, a)), static_cast<Eigen::Index>(g.step(s, a))) = 1.0;
  m.rho = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m.n_states), 1.0 / static_cast<double>(m.n_states));
  m.gamma = gamma;
  m.validate();
  return m;
}

/// Fixture format: {"n_states", "n_actions", "P" (flat, row-major over
/// (s, a, s')), "rho", "gamma"}. Unknown keys are rejected.
inline TabularMdp tabular_mdp_from_json(const nlohmann::json& j) {
  for (const auto& [k, _] : j.items()) {
    if (k != "n_states" && k != "n_actions" && k != "P" && k != "rho" && k != "gamma") {
      throw std::invalid_argument("unknown key '" + k + "' in tabular mdp");
    }
  }
  TabularMdp m;
  m.n_states = j.at("n_states").get<std::size_t>();
  m.n_actions = j.at("n_actions").get<std::size_t>();
  const auto p = j.at("P").get<std::vector<double>>();
  const auto rho = j.at("rho").get<std::vector<double>>();
  m.gamma = j.at("gamma").get<double>();
  if (p.size() != m.n_states * m.n_actions * m.n_states) {
    throw std::invalid_argument("tabular mdp: P has " + std::to_string(p.size()) + " entries, expected " +
                                std::to_string(m.n_states * m.n_actions * m.n_states));
  }
  m.P.resize(static_cast<Eigen::Index>(m.n_states * m.n_actions), static_cast<Eigen::Index>(m.n_states));
  for (std::size_t r = 0; r < m.n_states * m.n_actions; ++r)
    for (std::size_t c = 0; c < m.n_states; ++c) m.P(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = p[r * m.n_states + c];
  m.rho = Eigen::Map<const Eigen::VectorXd>(rho.data(), static_cast<Eigen::Index>(rho.size()));
  m.validate();
  return m;
}

inline TabularMdp load_tabular_mdp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tabular mdp '" + path.string() + "'");
  return tabular_mdp_from_json(nlohmann::json::parse(in));
}

/// pi(a | s), one row per state.
struct TabularPolicy {
  Eigen::MatrixXd probs;  // n_states x n_actions

  static TabularPolicy uniform(std::size_t n_states, std::size_t n_actions) {
    return {Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_states), static_cast<Eigen::Index>(n_actions),
                                      1.0 / static_cast<double>(n_actions))};
  }

  static TabularPolicy deterministic(const std::vector<std::size_t>& actions, std::size_t n_actions) {
    TabularPolicy p{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(actions.size()), static_cast<Eigen::Index>(n_actions))};
    for (std::size_t s = 0; s < actions.size(); ++s) p.probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(actions[s])) = 1.0;
    p.validate(actions.size(), n_actions);
    return p;
  }

  void validate(std::size_t n_states, std::size_t n_actions) const {
    if (static_cast<std::size_t>(probs.rows()) != n_states || static_cast<std::size_t>(probs.cols()) != n_actions) {
      throw std::invalid_argument("tabular policy: shape does not match the mdp");
    }
    for (Eigen::Index s = 0; s < probs.rows(); ++s) {
      if ((probs.row(s).array() < 0.0).any() || std::abs(probs.row(s).sum() - 1.0) > 1e-12) {
        throw std::invalid_argument("tabular policy: row " + std::to_string(s) + " is not a distribution");
      }
    }
  }
};

/// P^pi(s, s') = sum_a pi(a|s) P(s, a, s').
inline Eigen::MatrixXd policy_transition(const TabularMdp& m, const TabularPolicy& pi) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.n_states), static_cast<Eigen::Index>(m.n_states));
  for (std::size_t s = 0; s < m.n_states; ++s)
    for (std::size_t a = 0; a < m.n_actions; ++a)
      out.row(static_cast<Eigen::Index>(s)) +=
          pi.probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) * m.P.row(static_cast<Eigen::Index>(m.row(s, a)));
  return out;
}

namespace detail {

/// Iterates x <- f(x) until the L-infinity change drops below kDpTolerance.
template <class F>
Eigen::MatrixXd dp_iterate(Eigen::MatrixXd x, F&& f, const char* what) {
  for (std::size_t it = 0; it < kDpIterationCap; ++it) {
    Eigen::MatrixXd next = f(x);
    const double change = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    if (change < kDpTolerance) return x;
  }
  throw std::runtime_error(std::string(what) + " did not converge within " + std::to_string(kDpIterationCap) + " iterations");
}

}  // namespace detail

/// M(s, a, s+) = sum_{t>=0} gamma^t Pr(s_{t+1} = s+ | s, a, pi), as an
/// (n_states * n_actions) x n_states matrix. Solves the state-level
/// N = P^pi + gamma P^pi N first, then M = P + gamma P N.
inline Eigen::MatrixXd successor_measure_exact(const TabularMdp& m, const TabularPolicy& pi) {
  m.validate();
  pi.validate(m.n_states, m.n_actions);
  const Eigen::MatrixXd ppi = policy_transition(m, pi);
  // N = P^pi + gamma P^pi N solved directly; I - gamma P^pi is nonsingular for gamma < 1.
  const Eigen::Index ns = ppi.rows();
  const Eigen::MatrixXd n = (Eigen::MatrixXd::Identity(ns, ns) - m.gamma * ppi).partialPivLu().solve(ppi);
  return m.P + m.gamma * m.P * n;
}

/// Q(s, a) = sum_{s+} M(s, a, s+) r(s+), flattened like the rows of M.
inline Eigen::VectorXd q_from_measure(const Eigen::MatrixXd& measure, const Eigen::VectorXd& r) {
  if (measure.cols() != r.size()) throw std::invalid_argument("q_from_measure: reward length does not match the measure");
  return measure * r;
}

/// Q = P (r + gamma Pi Q), with the reward on next states.
inline Eigen::VectorXd policy_evaluation(const TabularMdp& m, const TabularPolicy& pi, const Eigen::VectorXd& r) {
  m.validate();
  pi.validate(m.n_states, m.n_actions);
  const auto A = static_cast<Eigen::Index>(m.n_actions);
  Eigen::MatrixXd q = detail::dp_iterate(
      Eigen::MatrixXd::Zero(m.P.rows(), 1),
      [&](const Eigen::MatrixXd& x) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(m.n_states));
        for (Eigen::Index s = 0; s < v.size(); ++s) v[s] = pi.probs.row(s).dot(x.col(0).segment(s * A, A));
        return Eigen::MatrixXd(m.P * (r + m.gamma * v));
      },
      "policy evaluation");
  return q.col(0);
}

struct ValueIterationResult {
  Eigen::VectorXd q;  // flattened (s, a)
  std::vector<std::size_t> greedy;  // ties go to the lowest action index
};

/// Bellman optimality iteration with the reward on next states.
inline ValueIterationResult value_iteration(const TabularMdp& m, const Eigen::VectorXd& r) {
  m.validate();
  if (static_cast<std::size_t>(r.size()) != m.n_states) throw std::invalid_argument("value_iteration: reward length must be n_states");
  const auto A = static_cast<Eigen::Index>(m.n_actions);
  Eigen::MatrixXd q = detail::dp_iterate(
      Eigen::MatrixXd::Zero(m.P.rows(), 1),
      [&](const Eigen::MatrixXd& x) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(m.n_states));
        for (Eigen::Index s = 0; s < v.size(); ++s) v[s] = x.col(0).segment(s * A, A).maxCoeff();
        return Eigen::MatrixXd(m.P * (r + m.gamma * v));
      },
      "value iteration");
  ValueIterationResult res{q.col(0), std::vector<std::size_t>(m.n_states, 0)};
  for (std::size_t s = 0; s < m.n_states; ++s)
    for (std::size_t a = 1; a < m.n_actions; ++a)
      if (res.q[static_cast<Eigen::Index>(m.row(s, a))] > res.q[static_cast<Eigen::Index>(m.row(s, res.greedy[s]))]) res.greedy[s] = a;
  return res;
}

/// max over (s, a, s+) of |m(s, a, s+) rho(s+) - M(s, a, s+)| for a
/// density m laid out like the rows of M.
inline double sm_fixed_point_check(const TabularMdp& mdp, const TabularPolicy& pi, const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd exact = successor_measure_exact(mdp, pi);
  if (m.rows() != exact.rows() || m.cols() != exact.cols()) throw std::invalid_argument("sm_fixed_point_check: density shape mismatch");
  for (Eigen::Index x = 0; x < m.cols(); ++x) {
    if (mdp.rho[x] == 0.0 && (m.col(x).array() != 0.0).any()) {
      throw std::invalid_argument("sm_fixed_point_check: state " + std::to_string(x) + " has rho = 0 but appears in m");
    }
  }
  return (m * mdp.rho.asDiagonal() - exact).cwiseAbs().maxCoeff();
}

/// Normalized discounted state visitation (1 - gamma) d0^T (I - gamma P^pi)^-1.
inline Eigen::VectorXd discounted_visitation(const TabularMdp& m, const TabularPolicy& pi, const Eigen::VectorXd& d0) {
  const Eigen::MatrixXd ppi = policy_transition(m, pi);
  const auto n = static_cast<Eigen::Index>(m.n_states);
  const Eigen::MatrixXd lhs = (Eigen::MatrixXd::Identity(n, n) - m.gamma * ppi).transpose();
  return (1.0 - m.gamma) * lhs.partialPivLu().solve(d0);
}

}  // namespace rldp
