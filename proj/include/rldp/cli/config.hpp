#pragma once

// Run configuration for the command-line pipeline. Parsing is strict: every
// key is known, and errors name the offending key path (e.g. "repr.d").
// Omitted keys keep the defaults below.

#include <rldp/bfm/train.hpp>
#include <rldp/envdata/generate.hpp>
#include <rldp/replearn/train.hpp>
#include <rldp/zeroshot/reward.hpp>

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rldp::cli {

/// Raised for malformed or inconsistent configuration (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InferenceRule { mean, regression };

struct EnvSection {
  std::string id = "gridworld";  // gridworld | pointmass
  /// "four_rooms" or explicit rows ('#' wall, '.' free) for the gridworld;
  /// "four_rooms" or "open_field" for the point mass.
  std::vector<std::string> layout;
  std::string observation = "one_hot";  // gridworld only: one_hot | xy
  std::uint64_t seed = 0;
};

struct DataSection {
  BehaviorPolicy policy = BehaviorPolicy::count_bonus;
  std::size_t episodes = 200;
  std::size_t episode_len = 50;
  std::optional<Cell> start_cell;
  double epsilon = 0.1;
};

struct EvalSection {
  std::vector<RewardSpec> tasks;
  std::size_t episodes = 50;
  std::size_t episode_len = 100;
  std::size_t inference_samples = 10000;
  InferenceRule inference = InferenceRule::mean;
  double ridge = 0.0;
};

struct HeatmapSpec {
  Cell cell;
  std::size_t action = 0;
  std::size_t task = 0;  // index into eval.tasks; z is inferred from it
};

struct DiagSection {
  std::vector<HeatmapSpec> heatmaps;
  bool lemma = true;
  std::size_t probe_states = 10000;
};

struct PathsSection {
  std::filesystem::path dataset = "data/dataset.bin";
  std::filesystem::path checkpoints = "checkpoints";
  std::filesystem::path metrics = "metrics";
};

struct RunConfig {
  EnvSection env;
  DataSection data;
  ReprConfig repr;
  BfmConfig bfm;
  BfmMode bfm_mode = BfmMode::frozen_features;
  EvalSection eval;
  DiagSection diag;
  PathsSection paths;

  /// Root seed; every stage derives its own stream from it.
  std::uint64_t seed() const noexcept { return env.seed; }
  void set_seed(std::uint64_t s) {
    env.seed = s;
    repr.seed = derive_seed(s, "repr");
    bfm.seed = derive_seed(s, "bfm");
  }

  Environment environment() const;
  std::filesystem::path encoder_checkpoint() const { return paths.checkpoints / "encoder.json"; }
  std::filesystem::path bfm_checkpoint() const { return paths.checkpoints / "bfm.json"; }
  /// Encoder the critic was trained against (differs from the pretrained
  /// one in fb_joint mode).
  std::filesystem::path bfm_encoder_checkpoint() const { return paths.checkpoints / "bfm_encoder.json"; }
};

namespace detail {

class Reader {
 public:
  Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(child(key) + ": " + e.what());
    }
  }

  template <typename F>
  void get_with(const char* key, F&& parse) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    try {
      parse(j_.at(key));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(child(key) + ": " + e.what());
    }
  }

  /// Rejects keys that no get() asked for.
  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) throw ConfigError("unknown key '" + child(k) + "'");
    }
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "config" : path_; }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

inline Cell cell_from_json(const nlohmann::json& j) {
  auto v = j.get<std::vector<int>>();
  if (v.size() != 2) throw ConfigError("cell must be [x, y]");
  return {v[0], v[1]};
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& root) {
  using detail::Reader;
  RunConfig c;
  Reader top(root, "");
  top.get_with("env", [&](const nlohmann::json& j) {
    Reader r(j, "env");
    r.get("id", c.env.id);
    r.get_with("layout", [&](const nlohmann::json& v) {
      c.env.layout = v.is_string() ? std::vector<std::string>{v.get<std::string>()} : v.get<std::vector<std::string>>();
    });
    r.get("observation", c.env.observation);
    r.get("seed", c.env.seed);
    r.finish();
  });
  top.get_with("data", [&](const nlohmann::json& j) {
    Reader r(j, "data");
    r.get_with("policy", [&](const nlohmann::json& v) { c.data.policy = behavior_policy_from_string(v.get<std::string>()); });
    r.get("episodes", c.data.episodes);
    r.get("episode_len", c.data.episode_len);
    r.get_with("start_cell", [&](const nlohmann::json& v) {
      if (!v.is_null()) c.data.start_cell = detail::cell_from_json(v);
    });
    r.get("epsilon", c.data.epsilon);
    r.finish();
  });
  top.get_with("repr", [&](const nlohmann::json& j) {
    Reader r(j, "repr");
    auto& p = c.repr;
    r.get("d", p.d);
    r.get("horizon", p.horizon);
    r.get("lambda", p.lambda);
    r.get("target_update_period", p.target_update_period);
    r.get_with("method", [&](const nlohmann::json& v) { p.method = repr_method_from_string(v.get<std::string>()); });
    r.get("beta", p.beta);
    r.get("learning_rate", p.learning_rate);
    r.get("batch", p.batch);
    r.get("total_steps", p.total_steps);
    r.get("phi_hidden", p.phi_hidden);
    r.get("action_embed", p.action_embed);
    r.get("g_hidden", p.g_hidden);
    r.get("trace_period", p.trace_period);
    r.get("probe_size", p.probe_size);
    r.finish();
  });
  top.get_with("bfm", [&](const nlohmann::json& j) {
    Reader r(j, "bfm");
    auto& p = c.bfm;
    r.get("gamma", p.gamma);
    r.get("z_goal_fraction", p.z_goal_fraction);
    r.get_with("actor_variant", [&](const nlohmann::json& v) { p.actor_variant = actor_variant_from_string(v.get<std::string>()); });
    r.get_with("critic_variant", [&](const nlohmann::json& v) { p.critic_variant = critic_variant_from_string(v.get<std::string>()); });
    r.get_with("mode", [&](const nlohmann::json& v) { c.bfm_mode = bfm_mode_from_string(v.get<std::string>()); });
    r.get("alpha_bc", p.alpha_bc);
    r.get("batch", p.batch);
    r.get("steps", p.steps);
    r.get("target_update_period", p.target_update_period);
    r.get("exploration_noise", p.exploration_noise);
    r.get("critic_lr", p.critic_lr);
    r.get("actor_lr", p.actor_lr);
    r.get("fb_ortho", p.fb_ortho);
    r.get("embed_hidden", p.embed_hidden);
    r.get("embed_dim", p.embed_dim);
    r.get("head_hidden", p.head_hidden);
    r.get("actor_hidden", p.actor_hidden);
    r.get("log_period", p.log_period);
    r.finish();
  });
  top.get_with("eval", [&](const nlohmann::json& j) {
    Reader r(j, "eval");
    r.get_with("tasks", [&](const nlohmann::json& v) {
      if (!v.is_array()) throw ConfigError("eval.tasks must be an array");
      for (std::size_t i = 0; i < v.size(); ++i) {
        try {
          c.eval.tasks.push_back(reward_from_json(v[i]));
        } catch (const std::exception& e) {
          throw ConfigError("eval.tasks[" + std::to_string(i) + "]: " + e.what());
        }
      }
    });
    r.get("episodes", c.eval.episodes);
    r.get("episode_len", c.eval.episode_len);
    r.get("inference_samples", c.eval.inference_samples);
    r.get_with("inference", [&](const nlohmann::json& v) {
      const auto s = v.get<std::string>();
      if (s == "mean") c.eval.inference = InferenceRule::mean;
      else if (s == "regression") c.eval.inference = InferenceRule::regression;
      else throw ConfigError("eval.inference must be mean or regression, got '" + s + "'");
    });
    r.get("ridge", c.eval.ridge);
    r.finish();
  });
  top.get_with("diag", [&](const nlohmann::json& j) {
    Reader r(j, "diag");
    r.get_with("heatmaps", [&](const nlohmann::json& v) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        Reader h(v[i], "diag.heatmaps[" + std::to_string(i) + "]");
        HeatmapSpec spec;
        h.get_with("cell", [&](const nlohmann::json& x) { spec.cell = detail::cell_from_json(x); });
        h.get_with("action", [&](const nlohmann::json& x) {
          spec.action = x.is_string() ? grid_action_from_string(x.get<std::string>()) : x.get<std::size_t>();
        });
        h.get("task", spec.task);
        h.finish();
        c.diag.heatmaps.push_back(spec);
      }
    });
    r.get("lemma", c.diag.lemma);
    r.get("probe_states", c.diag.probe_states);
    r.finish();
  });
  top.get_with("paths", [&](const nlohmann::json& j) {
    Reader r(j, "paths");
    r.get_with("dataset", [&](const nlohmann::json& v) { c.paths.dataset = v.get<std::string>(); });
    r.get_with("checkpoints", [&](const nlohmann::json& v) { c.paths.checkpoints = v.get<std::string>(); });
    r.get_with("metrics", [&](const nlohmann::json& v) { c.paths.metrics = v.get<std::string>(); });
    r.finish();
  });
  top.finish();

  if (c.env.id != "gridworld" && c.env.id != "pointmass") {
    throw ConfigError("env.id must be gridworld or pointmass, got '" + c.env.id + "'");
  }
  if (c.env.observation != "one_hot" && c.env.observation != "xy") {
    throw ConfigError("env.observation must be one_hot or xy, got '" + c.env.observation + "'");
  }
  if (c.data.episodes < 1 || c.data.episode_len < 1) throw ConfigError("data.episodes and data.episode_len must be >= 1");
  for (const auto& h : c.diag.heatmaps) {
    if (h.task >= c.eval.tasks.size()) throw ConfigError("diag.heatmaps task index " + std::to_string(h.task) + " has no eval task");
  }
  try {
    c.repr.validate();
    c.bfm.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.set_seed(c.env.seed);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j);
}

inline Environment RunConfig::environment() const {
  const auto& layout = env.layout;
  const bool builtin = layout.empty() || (layout.size() == 1 && layout[0] == "four_rooms");
  if (env.id == "pointmass") {
    if (builtin) return PointMass::four_rooms();
    if (layout.size() == 1 && layout[0] == "open_field") return PointMass::open_field();
    throw ConfigError("env.layout for the point mass must be four_rooms or open_field");
  }
  const auto obs = env.observation == "xy" ? GridObservation::xy : GridObservation::one_hot;
  try {
    return builtin ? GridWorld::four_rooms(obs) : GridWorld(layout, obs);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("env.layout: ") + e.what());
  }
}

/// Paths in the config are taken relative to `base` unless absolute.
inline void resolve_paths(RunConfig& c, const std::filesystem::path& base) {
  for (auto* p : {&c.paths.dataset, &c.paths.checkpoints, &c.paths.metrics}) {
    if (p->is_relative()) *p = base / *p;
  }
}

}  // namespace rldp::cli
