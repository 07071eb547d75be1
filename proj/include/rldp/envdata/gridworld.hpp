#pragma once

#include <rldp/diffcore/tensor.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rldp {

enum class GridAction : int { up = 0, down = 1, left = 2, right = 3 };
inline constexpr std::size_t kGridActions = 4;

inline const char* to_string(GridAction a) {
  static constexpr std::array<const char*, 4> names{"up", "down", "left", "right"};
  return names[static_cast<std::size_t>(a)];
}

inline std::size_t grid_action_from_string(const std::string& s) {
  for (std::size_t a = 0; a < kGridActions; ++a)
    if (s == to_string(static_cast<GridAction>(a))) return a;
  throw std::invalid_argument("unknown grid action '" + s + "' (expected up/down/left/right)");
}

enum class GridObservation { one_hot, xy };

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Deterministic gridworld. Cells are addressed by a dense index over free
/// cells in row-major order; y = 0 is the top row. Moving into a wall or
/// off the map leaves the agent in place.
class GridWorld {
 public:
  /// `layout` rows use '#' for walls and any other character for free cells.
  explicit GridWorld(const std::vector<std::string>& layout, GridObservation obs = GridObservation::one_hot)
      : obs_(obs) {
    if (layout.empty()) throw std::invalid_argument("GridWorld: empty layout");
    height_ = static_cast<int>(layout.size());
    width_ = static_cast<int>(layout.front().size());
    index_.assign(static_cast<std::size_t>(width_ * height_), -1);
    for (int y = 0; y < height_; ++y) {
      if (static_cast<int>(layout[static_cast<std::size_t>(y)].size()) != width_) {
        throw std::invalid_argument("GridWorld: ragged layout row " + std::to_string(y));
      }
      for (int x = 0; x < width_; ++x) {
        if (layout[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] == '#') continue;
        index_[static_cast<std::size_t>(y * width_ + x)] = static_cast<int>(cells_.size());
        cells_.push_back({x, y});
      }
    }
    if (cells_.empty()) throw std::invalid_argument("GridWorld: no free cells");
  }

  /// 13x13 four-room map: outer wall plus a cross of inner walls with one
  /// doorway per wall segment; 104 free cells.
  static const std::vector<std::string>& four_rooms_layout() {
    static const std::vector<std::string> layout{
        "#############",  //
        "#     #     #",  //
        "#     #     #",  //
        "#           #",  //
        "#     #     #",  //
        "#     #     #",  //
        "## ####     #",  //
        "#     ### ###",  //
        "#     #     #",  //
        "#     #     #",  //
        "#           #",  //
        "#     #     #",  //
        "#############",  //
    };
    return layout;
  }

  static GridWorld four_rooms(GridObservation obs = GridObservation::one_hot) {
    return GridWorld(four_rooms_layout(), obs);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t num_cells() const noexcept { return cells_.size(); }
  std::size_t num_actions() const noexcept { return kGridActions; }
  GridObservation observation_kind() const noexcept { return obs_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const Cell& cell(std::size_t index) const { return cells_.at(index); }

  bool is_free(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && index_[static_cast<std::size_t>(y * width_ + x)] >= 0;
  }

  std::optional<std::size_t> index_of(Cell c) const {
    if (!is_free(c.x, c.y)) return std::nullopt;
    return static_cast<std::size_t>(index_[static_cast<std::size_t>(c.y * width_ + c.x)]);
  }

  std::size_t require_index(Cell c) const {
    auto i = index_of(c);
    if (!i) throw std::invalid_argument("(" + std::to_string(c.x) + "," + std::to_string(c.y) + ") is not a free cell");
    return *i;
  }

  std::size_t step(std::size_t cell_index, std::size_t action) const {
    if (action >= kGridActions) throw std::out_of_range("grid action index " + std::to_string(action) + " out of range");
    const Cell c = cells_.at(cell_index);
    static constexpr std::array<int, 4> dx{0, 0, -1, 1};
    static constexpr std::array<int, 4> dy{-1, 1, 0, 0};
    const int nx = c.x + dx[action];
    const int ny = c.y + dy[action];
    if (!is_free(nx, ny)) return cell_index;
    return static_cast<std::size_t>(index_[static_cast<std::size_t>(ny * width_ + nx)]);
  }

  std::size_t obs_dim() const { return obs_ == GridObservation::one_hot ? cells_.size() : 2; }

  /// One-hot scaled by sqrt(#cells), so it already lies on the sphere of
  /// that radius; or (x, y) normalized to [0, 1].
  std::vector<double> observe(std::size_t cell_index) const {
    if (obs_ == GridObservation::one_hot) {
      std::vector<double> o(cells_.size(), 0.0);
      o.at(cell_index) = std::sqrt(static_cast<double>(cells_.size()));
      return o;
    }
    const Cell c = cells_.at(cell_index);
    return {static_cast<double>(c.x) / (width_ - 1), static_cast<double>(c.y) / (height_ - 1)};
  }

  /// Observations of every free cell, one row per cell index.
  Tensor all_observations() const {
    Tensor t = Tensor::matrix(cells_.size(), obs_dim());
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      auto o = observe(i);
      std::copy(o.begin(), o.end(), t.row(i).begin());
    }
    return t;
  }

  /// Inverse of observe(); tolerant to float32 rounding.
  std::size_t cell_of(std::span<const double> obs) const {
    if (obs.size() != obs_dim()) throw DimensionError("GridWorld::cell_of", "observation width mismatch");
    if (obs_ == GridObservation::one_hot) {
      return static_cast<std::size_t>(std::distance(obs.begin(), std::max_element(obs.begin(), obs.end())));
    }
    const Cell c{static_cast<int>(std::lround(obs[0] * (width_ - 1))), static_cast<int>(std::lround(obs[1] * (height_ - 1)))};
    return require_index(c);
  }

 private:
  int width_ = 0;
  int height_ = 0;
  GridObservation obs_;
  std::vector<int> index_;
  std::vector<Cell> cells_;
};

}  // namespace rldp
