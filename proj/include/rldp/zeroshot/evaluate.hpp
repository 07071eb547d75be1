#pragma once

#include <rldp/bfm/model.hpp>
#include <rldp/diffcore/io.hpp>
#include <rldp/zeroshot/reward.hpp>

#include <functional>

namespace rldp {

/// Maps an observation to an action: {index} for the gridworld, (ax, ay)
/// for the point mass. Must be deterministic.
using Policy = std::function<std::vector<double>(std::span<const double>)>;

struct EvalOptions {
  std::size_t episodes = 50;
  std::size_t episode_len = 100;
  double gamma = 0.98;
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::string task;
  std::vector<double> returns;
  std::vector<double> discounted_returns;
  std::vector<bool> successes;
  std::uint64_t seed = 0;
  bool goal_task = false;

  std::size_t episodes() const noexcept { return returns.size(); }

  double mean_return() const {
    if (returns.empty()) return 0.0;
    return std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
  }

  /// Population standard deviation of the undiscounted returns.
  double std_return() const {
    if (returns.empty()) return 0.0;
    const double m = mean_return();
    double acc = 0.0;
    for (double r : returns) acc += (r - m) * (r - m);
    return std::sqrt(acc / static_cast<double>(returns.size()));
  }

  double success_rate() const {
    if (successes.empty()) return 0.0;
    return static_cast<double>(std::count(successes.begin(), successes.end(), true)) / static_cast<double>(successes.size());
  }

  CsvWriter csv() const {
    CsvWriter out({"episode", "return", "discounted_return", "success"});
    for (std::size_t i = 0; i < returns.size(); ++i) out.row(i, returns[i], discounted_returns[i], successes[i] ? 1 : 0);
    return out;
  }
};

namespace detail {

/// Start state of episode i, drawn from its own generator; goal tasks never
/// start inside the goal.
inline std::vector<double> episode_start(const Environment& env, const RewardSpec& reward, Rng& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<double> obs;
    if (const auto* g = std::get_if<GridWorld>(&env)) {
      obs = g->observe(uniform_index(rng, g->num_cells()));
    } else {
      obs = PointMass::observe({uniform(rng), uniform(rng), 0.0, 0.0});
    }
    if (!reward.is_goal_task() || reward(env, obs) == 0.0) return obs;
  }
  throw std::invalid_argument("task '" + reward.name + "' covers every start state");
}

inline std::vector<double> env_step(const Environment& env, std::span<const double> obs, std::span<const double> action) {
  if (const auto* g = std::get_if<GridWorld>(&env)) {
    if (action.size() != 1) throw DimensionError("evaluate", "gridworld policies return a single action index");
    return g->observe(g->step(g->cell_of(obs), static_cast<std::size_t>(action[0])));
  }
  if (action.size() != 2) throw DimensionError("evaluate", "point-mass policies return two accelerations");
  const auto& pm = std::get<PointMass>(env);
  return PointMass::observe(pm.step(PointMass::from_observation(obs), {action[0], action[1]}));
}

}  // namespace detail

/// Deterministic rollouts of `policy`. Rewards are collected on next
/// states; a goal task succeeds (and its episode ends) when the goal is reached.
inline EvalReport evaluate(const Environment& env, const Policy& policy, const RewardSpec& reward, const EvalOptions& opt) {
  reward.check(env);
  EvalReport rep;
  rep.task = reward.name;
  rep.seed = opt.seed;
  rep.goal_task = reward.is_goal_task();
  for (std::size_t ep = 0; ep < opt.episodes; ++ep) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(ep)));
    std::vector<double> obs = detail::episode_start(env, reward, rng);
    double ret = 0.0, disc = 0.0, g = 1.0;
    bool success = false;
    for (std::size_t t = 0; t < opt.episode_len; ++t) {
      obs = detail::env_step(env, obs, policy(obs));
      const double r = reward(env, obs);
      ret += r;
      disc += g * r;
      g *= opt.gamma;
      if (rep.goal_task && r > 0.0) {
        success = true;
        break;
      }
    }
    rep.returns.push_back(ret);
    rep.discounted_returns.push_back(disc);
    rep.successes.push_back(success);
  }
  return rep;
}

/// Greedy (discrete) or deterministic-actor (continuous) policy for task z.
inline Policy bfm_policy(const BfmParams& bfm, const Tensor& z) {
  return [&bfm, z](std::span<const double> obs) {
    Tensor s({1, obs.size()}, std::vector<double>(obs.begin(), obs.end()));
    if (bfm.arch.discrete()) return std::vector<double>{static_cast<double>(greedy_actions(bfm, s, z)[0])};
    Tensor a = actor_forward(bfm, constant(s), constant(z)).value();
    return std::vector<double>(a.values().begin(), a.values().end());
  };
}

struct HeatmapCell {
  int x = 0;
  int y = 0;
  double value = 0.0;
};

/// psi(s0, a0, z)^T phi(s+) for every free cell s+ (a density w.r.t. the
/// dataset state distribution; not clipped).
inline std::vector<HeatmapCell> successor_heatmap(const BfmParams& bfm, const EncoderParams& enc, const GridWorld& env,
                                                  Cell s0, std::size_t a0, const Tensor& z) {
  const std::size_t start = env.require_index(s0);
  if (a0 >= env.num_actions()) throw std::out_of_range("heatmap action index out of range");
  Tensor s({1, env.obs_dim()}, env.observe(start));
  std::vector<std::size_t> act{a0};
  Tensor psi = critic_forward(bfm, constant(s), constant(one_hot_actions(act, env.num_actions())), constant(z)).value();
  Tensor phi = encode(enc, env.all_observations());
  std::vector<HeatmapCell> out;
  for (std::size_t c = 0; c < env.num_cells(); ++c) {
    double v = 0.0;
    for (std::size_t k = 0; k < phi.cols(); ++k) v += psi[k] * phi(c, k);
    out.push_back({env.cell(c).x, env.cell(c).y, v});
  }
  return out;
}

inline CsvWriter heatmap_csv(const std::vector<HeatmapCell>& cells) {
  CsvWriter out({"x", "y", "value"});
  for (const auto& c : cells) out.row(c.x, c.y, c.value);
  return out;
}

}  // namespace rldp
