#pragma once

#include <cstddef>
#include <stdexcept>

namespace rfbm {

/// Uniform grid t_k = k T / N on [0, T].
class Grid {
 public:
  Grid(double horizon, std::size_t cells) : horizon_(horizon), cells_(cells) {
    if (!(horizon > 0.0)) throw std::invalid_argument("grid horizon must be positive");
    if (cells < 2) throw std::invalid_argument("grid needs at least 2 cells");
  }

  double horizon() const { return horizon_; }
  std::size_t cells() const { return cells_; }
  std::size_t points() const { return cells_ + 1; }
  double step() const { return horizon_ / static_cast<double>(cells_); }
  double point(std::size_t k) const { return horizon_ * static_cast<double>(k) / static_cast<double>(cells_); }

  bool operator==(const Grid& other) const = default;

 private:
  double horizon_;
  std::size_t cells_;
};

/// Window (s, t) given by grid point indices, s <= t.
struct Window {
  std::size_t s = 0;
  std::size_t t = 0;

  bool operator==(const Window&) const = default;
  auto operator<=>(const Window&) const = default;
};

inline void check_window(const Grid& grid, Window w) {
  if (w.s > w.t) throw std::invalid_argument("window requires s <= t");
  if (w.t > grid.cells()) throw std::invalid_argument("window lies off the grid");
}

}  // namespace rfbm
