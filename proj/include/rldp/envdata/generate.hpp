#pragma once

#include <rldp/diffcore/random.hpp>
#include <rldp/envdata/dataset.hpp>
#include <rldp/envdata/gridworld.hpp>
#include <rldp/envdata/pointmass.hpp>

#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>

namespace rldp {

using Environment = std::variant<GridWorld, PointMass>;

inline std::string env_id(const Environment& env) {
  return std::holds_alternative<GridWorld>(env) ? "four_rooms" : "pointmass";
}

enum class BehaviorPolicy { uniform_random, count_bonus };

inline const char* to_string(BehaviorPolicy p) {
  return p == BehaviorPolicy::uniform_random ? "uniform_random" : "count_bonus";
}

inline BehaviorPolicy behavior_policy_from_string(const std::string& s) {
  if (s == "uniform_random") return BehaviorPolicy::uniform_random;
  if (s == "count_bonus") return BehaviorPolicy::count_bonus;
  throw std::invalid_argument("unknown data policy '" + s + "' (expected uniform_random or count_bonus)");
}

struct GenerationOptions {
  BehaviorPolicy policy = BehaviorPolicy::uniform_random;
  std::size_t episodes = 1;
  std::size_t episode_len = 1;
  std::uint64_t seed = 0;
  /// Gridworld start cell; uniform over free cells when unset.
  std::optional<Cell> start_cell;
  /// Random-action probability of the count-bonus explorer.
  double epsilon = 0.1;
  /// Count-bonus discretization for the point mass (bins per axis) and
  /// number of candidate actions scored per step.
  std::size_t pointmass_bins = 10;
  std::size_t pointmass_candidates = 8;
};

namespace detail {

inline double count_bonus(std::size_t visits) { return 1.0 / std::sqrt(1.0 + static_cast<double>(visits)); }

inline Dataset generate_grid(const GridWorld& env, const GenerationOptions& opt) {
  DatasetMeta meta{"four_rooms",
                   env.observation_kind() == GridObservation::one_hot ? "one_hot" : "xy",
                   env.obs_dim(),
                   1,
                   env.num_actions(),
                   to_string(opt.policy),
                   opt.seed};
  Dataset data(meta);
  Rng rng(opt.seed);
  std::vector<std::size_t> visits(env.num_cells(), 0);
  for (std::size_t ep = 0; ep < opt.episodes; ++ep) {
    std::size_t cell = opt.start_cell ? env.require_index(*opt.start_cell) : uniform_index(rng, env.num_cells());
    ++visits[cell];
    std::vector<Transition> steps;
    steps.reserve(opt.episode_len);
    for (std::size_t t = 0; t < opt.episode_len; ++t) {
      std::size_t action = 0;
      if (opt.policy == BehaviorPolicy::uniform_random || uniform(rng) < opt.epsilon) {
        action = uniform_index(rng, env.num_actions());
      } else {
        double best = -1.0;
        std::vector<std::size_t> ties;
        for (std::size_t a = 0; a < env.num_actions(); ++a) {
          const double b = count_bonus(visits[env.step(cell, a)]);
          if (b > best + 1e-15) {
            best = b;
            ties.assign(1, a);
          } else if (std::abs(b - best) <= 1e-15) {
            ties.push_back(a);
          }
        }
        action = ties[uniform_index(rng, ties.size())];
      }
      const std::size_t next = env.step(cell, action);
      ++visits[next];
      steps.push_back({env.observe(cell), {static_cast<double>(action)}, env.observe(next), false});
      cell = next;
    }
    data.append_episode(steps);
  }
  return data;
}

inline Dataset generate_pointmass(const PointMass& env, const GenerationOptions& opt) {
  DatasetMeta meta{"pointmass", "state", PointMass::kObsDim, PointMass::kActionDim, 0, to_string(opt.policy), opt.seed};
  Dataset data(meta);
  Rng rng(opt.seed);
  const std::size_t bins = opt.pointmass_bins;
  std::vector<std::size_t> visits(bins * bins, 0);
  auto random_action = [&] { return std::array<double, 2>{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)}; };
  for (std::size_t ep = 0; ep < opt.episodes; ++ep) {
    PointMassState s{uniform(rng), uniform(rng), 0.0, 0.0};
    ++visits[PointMass::bin_of(s, bins)];
    std::vector<Transition> steps;
    steps.reserve(opt.episode_len);
    for (std::size_t t = 0; t < opt.episode_len; ++t) {
      std::array<double, 2> action = random_action();
      if (opt.policy == BehaviorPolicy::count_bonus && uniform(rng) >= opt.epsilon) {
        double best = -1.0;
        for (std::size_t k = 0; k < opt.pointmass_candidates; ++k) {
          const auto cand = random_action();
          const double b = count_bonus(visits[PointMass::bin_of(env.step(s, cand), bins)]);
          if (b > best) {
            best = b;
            action = cand;
          }
        }
      }
      const PointMassState n = env.step(s, action);
      ++visits[PointMass::bin_of(n, bins)];
      steps.push_back({PointMass::observe(s), {action[0], action[1]}, PointMass::observe(n), false});
      s = n;
    }
    data.append_episode(steps);
  }
  return data;
}

}  // namespace detail

/// Reward-free rollouts of a behavior policy; deterministic given the seed.
inline Dataset generate_dataset(const Environment& env, const GenerationOptions& opt) {
  if (opt.episodes == 0 || opt.episode_len == 0) {
    throw std::invalid_argument("generate_dataset: episodes and episode_len must be positive");
  }
  if (const auto* grid = std::get_if<GridWorld>(&env)) return detail::generate_grid(*grid, opt);
  return detail::generate_pointmass(std::get<PointMass>(env), opt);
}

/// Distinct gridworld cells appearing as a state or next state.
inline std::size_t distinct_cells(const GridWorld& env, const Dataset& data) {
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < data.size(); ++i) {
    seen.insert(env.cell_of(data.state(i)));
    seen.insert(env.cell_of(data.next_state(i)));
  }
  return seen.size();
}

/// Every (cell, action) pair once, each as its own one-step episode. Used
/// by the tabular harnesses where the dataset should cover the MDP exactly.
inline Dataset exhaustive_grid_dataset(const GridWorld& env) {
  DatasetMeta meta{"four_rooms", env.observation_kind() == GridObservation::one_hot ? "one_hot" : "xy",
                   env.obs_dim(),  1, env.num_actions(), "exhaustive", 0};
  Dataset data(meta);
  for (std::size_t c = 0; c < env.num_cells(); ++c)
    for (std::size_t a = 0; a < env.num_actions(); ++a)
      data.append_episode({{env.observe(c), {static_cast<double>(a)}, env.observe(env.step(c, a)), false}});
  return data;
}

}  // namespace rldp
