#pragma once

#include <rldp/envdata/generate.hpp>

#include <json.hpp>

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rldp {

enum class RewardKind { goal_cell, goal_region, linear_in_obs, tabular };

/// Task reward r(s), evaluated on observations.
///   goal_cell      gridworld only; 1 on `cell`, else 0
///   goal_region    gridworld: cells with x0<=x<=x1, y0<=y<=y1;
///                  point mass: positions in [x0,x1] x [y0,y1]
///   linear_in_obs  weights . obs
///   tabular        gridworld only; values[cell index]
struct RewardSpec {
  RewardKind kind = RewardKind::goal_cell;
  std::string name;
  Cell cell{};
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  std::vector<double> weights;
  std::vector<double> values;

  static RewardSpec goal(Cell c, std::string name = "") {
    RewardSpec r;
    r.kind = RewardKind::goal_cell;
    r.cell = c;
    r.name = name.empty() ? "goal_" + std::to_string(c.x) + "_" + std::to_string(c.y) : std::move(name);
    return r;
  }

  static RewardSpec region(double x0, double y0, double x1, double y1, std::string name = "region") {
    RewardSpec r;
    r.kind = RewardKind::goal_region;
    r.x0 = x0, r.y0 = y0, r.x1 = x1, r.y1 = y1;
    r.name = std::move(name);
    return r;
  }

  static RewardSpec linear(std::vector<double> w, std::string name = "linear") {
    RewardSpec r;
    r.kind = RewardKind::linear_in_obs;
    r.weights = std::move(w);
    r.name = std::move(name);
    return r;
  }

  static RewardSpec table(std::vector<double> v, std::string name = "tabular") {
    RewardSpec r;
    r.kind = RewardKind::tabular;
    r.values = std::move(v);
    r.name = std::move(name);
    return r;
  }

  /// Goal tasks report success and end an episode on arrival.
  bool is_goal_task() const noexcept { return kind == RewardKind::goal_cell || kind == RewardKind::goal_region; }

  double operator()(const Environment& env, std::span<const double> obs) const {
    switch (kind) {
      case RewardKind::goal_cell: return grid(env, "goal_cell").cell(grid(env, "goal_cell").cell_of(obs)) == cell ? 1.0 : 0.0;
      case RewardKind::goal_region: {
        if (const auto* g = std::get_if<GridWorld>(&env)) {
          const Cell c = g->cell(g->cell_of(obs));
          return c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1 ? 1.0 : 0.0;
        }
        return obs[0] >= x0 && obs[0] <= x1 && obs[1] >= y0 && obs[1] <= y1 ? 1.0 : 0.0;
      }
      case RewardKind::linear_in_obs: {
        if (weights.size() != obs.size()) throw DimensionError("reward '" + name + "'", "weights do not match observation width");
        double acc = 0.0;
        for (std::size_t i = 0; i < obs.size(); ++i) acc += weights[i] * obs[i];
        return acc;
      }
      case RewardKind::tabular: {
        const std::size_t c = grid(env, "tabular").cell_of(obs);
        if (c >= values.size()) throw DimensionError("reward '" + name + "'", "table shorter than the number of cells");
        return values[c];
      }
    }
    return 0.0;
  }

  /// Validates the spec against an environment before any rollout.
  void check(const Environment& env) const {
    if (kind == RewardKind::goal_cell) grid(env, "goal_cell").require_index(cell);
    if (kind == RewardKind::tabular && values.size() != grid(env, "tabular").num_cells()) {
      throw std::invalid_argument("reward '" + name + "': table needs one value per free cell");
    }
  }

 private:
  const GridWorld& grid(const Environment& env, const char* what) const {
    const auto* g = std::get_if<GridWorld>(&env);
    if (!g) throw std::invalid_argument(std::string("reward kind ") + what + " needs the gridworld");
    return *g;
  }
};

inline RewardSpec reward_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const std::string name = j.value("name", "");
  auto only = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, _] : j.items()) {
      bool ok = k == "kind" || k == "name";
      for (const char* allowed : keys) ok = ok || k == allowed;
      if (!ok) throw std::invalid_argument("unknown key '" + k + "' in " + kind + " task");
    }
  };
  if (kind == "goal_cell") {
    only({"cell"});
    auto c = j.at("cell").get<std::vector<int>>();
    if (c.size() != 2) throw std::invalid_argument("goal_cell.cell must be [x, y]");
    return RewardSpec::goal({c[0], c[1]}, name);
  }
  if (kind == "goal_region") {
    only({"min", "max"});
    auto lo = j.at("min").get<std::vector<double>>();
    auto hi = j.at("max").get<std::vector<double>>();
    if (lo.size() != 2 || hi.size() != 2) throw std::invalid_argument("goal_region.min/max must be [x, y]");
    return RewardSpec::region(lo[0], lo[1], hi[0], hi[1], name.empty() ? "region" : name);
  }
  if (kind == "linear_in_obs") {
    only({"weights"});
    return RewardSpec::linear(j.at("weights").get<std::vector<double>>(), name.empty() ? "linear" : name);
  }
  if (kind == "tabular") {
    only({"values"});
    return RewardSpec::table(j.at("values").get<std::vector<double>>(), name.empty() ? "tabular" : name);
  }
  throw std::invalid_argument("unknown task kind '" + kind + "' (expected goal_cell, goal_region, linear_in_obs or tabular)");
}

}  // namespace rldp
