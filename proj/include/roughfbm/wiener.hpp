#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "roughfbm/grid.hpp"
#include "roughfbm/kernel.hpp"

namespace rfbm {

/// Grid realization of a d-dimensional Wiener process, stored as increments
/// per cell. Component indices are 0-based in code and 1-based in files.
class WienerPath {
 public:
  WienerPath(Grid grid, std::size_t dim, std::uint64_t seed, std::vector<double> increments,
             std::size_t refinements = 0);

  const Grid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  /// Number of Brownian-bridge halvings applied since sampling.
  std::size_t refinements() const { return refinements_; }

  double increment(std::size_t cell, std::size_t component) const { return increments_[cell * dim_ + component]; }
  /// All components of one cell.
  std::span<const double> cell(std::size_t m) const { return {increments_.data() + m * dim_, dim_}; }

  /// Halves every cell by inserting Brownian-bridge midpoints. The coarse
  /// increments are recovered exactly by summing adjacent fine pairs.
  WienerPath refine() const;

  /// CSV: provenance comment lines, then "cell,component,increment".
  void write_csv(std::ostream& out) const;
  static WienerPath read_csv(std::istream& in);

 private:
  Grid grid_;
  std::size_t dim_;
  std::uint64_t seed_;
  std::size_t refinements_;
  std::vector<double> increments_;
};

/// Increments i.i.d. N(0, step), each addressed by (seed, cell, component).
WienerPath sample_wiener(const Grid& grid, std::size_t dim, std::uint64_t seed);

/// Values B_{t_k}(i) on the grid.
class FbmPath {
 public:
  FbmPath(Grid grid, std::size_t dim, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  double value(std::size_t k, std::size_t component) const { return values_[k * dim_ + component]; }

  void write_csv(std::ostream& out) const;

 private:
  Grid grid_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// B_{t_k}(i) = sum_{m<k} Kbar(t_k, m) dW_m(i) at a single grid point.
double fbm_value(const WienerPath& path, const CellAveragedKernel& kbar, std::size_t k, std::size_t component);

FbmPath synthesize_fbm(const WienerPath& path, const CellAveragedKernel& kbar);

}  // namespace rfbm
