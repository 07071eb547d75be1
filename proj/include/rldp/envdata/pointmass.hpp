#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rldp {

struct PointMassState {
  double x = 0.5;
  double y = 0.5;
  double vx = 0.0;
  double vy = 0.0;
  friend bool operator==(const PointMassState&, const PointMassState&) = default;
};

/// Axis-aligned wall segment. Vertical walls have x0 == x1.
struct WallSegment {
  double x0, y0, x1, y1;
  bool vertical() const { return x0 == x1; }
};

/// Point mass in the unit square, accelerated by actions in [-1, 1]^2.
/// Semi-implicit Euler: v' = clip(v + a dt, +-v_max), p' = clip(p + v' dt, [0,1]).
/// A move that would cross a wall is cancelled on that axis and the
/// velocity component on that axis is zeroed.
class PointMass {
 public:
  double dt = 0.05;
  double v_max = 1.0;
  std::size_t episode_length = 200;
  std::vector<WallSegment> walls;

  static constexpr std::size_t kObsDim = 4;
  static constexpr std::size_t kActionDim = 2;

  /// Walls along x = 0.5 and y = 0.5 with one 0.1-wide doorway per half-wall.
  static PointMass four_rooms() {
    PointMass env;
    env.walls = {
        {0.5, 0.0, 0.5, 0.2}, {0.5, 0.3, 0.5, 0.7}, {0.5, 0.8, 0.5, 1.0},  // vertical, doors at y in (0.2,0.3),(0.7,0.8)
        {0.0, 0.5, 0.2, 0.5}, {0.3, 0.5, 0.7, 0.5}, {0.8, 0.5, 1.0, 0.5},  // horizontal, doors at x in (0.2,0.3),(0.7,0.8)
    };
    return env;
  }

  static PointMass open_field() { return PointMass{}; }

  PointMassState step(const PointMassState& s, std::array<double, 2> action) const {
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.vx) || !std::isfinite(s.vy)) {
      throw std::invalid_argument("PointMass::step: non-finite state");
    }
    if (!std::isfinite(action[0]) || !std::isfinite(action[1])) {
      throw std::invalid_argument("PointMass::step: non-finite action");
    }
    const double ax = std::clamp(action[0], -1.0, 1.0);
    const double ay = std::clamp(action[1], -1.0, 1.0);
    PointMassState n = s;
    n.vx = std::clamp(s.vx + ax * dt, -v_max, v_max);
    n.vy = std::clamp(s.vy + ay * dt, -v_max, v_max);

    const double nx = std::clamp(s.x + n.vx * dt, 0.0, 1.0);
    if (crosses_vertical(s.x, nx, s.y)) {
      n.vx = 0.0;
    } else {
      n.x = nx;
    }
    const double ny = std::clamp(s.y + n.vy * dt, 0.0, 1.0);
    if (crosses_horizontal(s.y, ny, n.x)) {
      n.vy = 0.0;
    } else {
      n.y = ny;
    }
    return n;
  }

  static std::vector<double> observe(const PointMassState& s) { return {s.x, s.y, s.vx, s.vy}; }
  static PointMassState from_observation(std::span<const double> obs) {
    if (obs.size() != kObsDim) throw std::invalid_argument("PointMass observation must have 4 entries");
    return {obs[0], obs[1], obs[2], obs[3]};
  }

  /// True when the open segment x0 -> x1 at height y passes through a vertical wall.
  bool crosses_vertical(double x0, double x1, double y) const {
    for (const auto& w : walls) {
      if (!w.vertical()) continue;
      const bool straddles = (x0 < w.x0 && x1 >= w.x0) || (x0 > w.x0 && x1 <= w.x0);
      if (straddles && y >= std::min(w.y0, w.y1) && y <= std::max(w.y0, w.y1)) return true;
    }
    return false;
  }

  bool crosses_horizontal(double y0, double y1, double x) const {
    for (const auto& w : walls) {
      if (w.vertical()) continue;
      const bool straddles = (y0 < w.y0 && y1 >= w.y0) || (y0 > w.y0 && y1 <= w.y0);
      if (straddles && x >= std::min(w.x0, w.x1) && x <= std::max(w.x0, w.x1)) return true;
    }
    return false;
  }

  /// Bin index on an n x n grid over the unit square (used by count-based exploration).
  static std::size_t bin_of(const PointMassState& s, std::size_t n) {
    const auto bx = std::min(n - 1, static_cast<std::size_t>(std::max(0.0, s.x) * static_cast<double>(n)));
    const auto by = std::min(n - 1, static_cast<std::size_t>(std::max(0.0, s.y) * static_cast<double>(n)));
    return by * n + bx;
  }
};

}  // namespace rldp
