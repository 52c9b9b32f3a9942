#pragma once

// Increments on a uniform grid, the coboundary operator and Hölder-type norms.
//
// Every increment stores a tensor of fixed shape per argument tuple. Tensor
// magnitudes inside norms are Euclidean (Frobenius) norms over the flattened
// components.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "roughfbm/grid.hpp"

namespace rfbm {

/// Positive exponent used by the Hölder norms.
class HolderExponent {
 public:
  explicit HolderExponent(double value);
  double value() const { return value_; }

 private:
  double value_;
};

/// Tensor shape shared by all increments, e.g. {d, d} for a level-2 object.
using Shape = std::vector<std::size_t>;

std::size_t shape_width(const Shape& shape);

/// g_{t_k}: one tensor per grid point.
class Increment1 {
 public:
  Increment1(Grid grid, Shape shape);

  const Grid& grid() const { return grid_; }
  const Shape& shape() const { return shape_; }
  std::size_t width() const { return width_; }

  std::span<double> at(std::size_t k);
  std::span<const double> at(std::size_t k) const;

 private:
  Grid grid_;
  Shape shape_;
  std::size_t width_;
  std::vector<double> data_;
};

/// h_{st} for grid pairs s <= t; entries with s > t are not part of the object.
class Increment2 {
 public:
  Increment2(Grid grid, Shape shape);

  const Grid& grid() const { return grid_; }
  const Shape& shape() const { return shape_; }
  std::size_t width() const { return width_; }

  std::span<double> at(std::size_t s, std::size_t t);
  std::span<const double> at(std::size_t s, std::size_t t) const;

  /// Restriction to the coarser grid whose points are every `stride`-th point.
  Increment2 restrict_to(std::size_t stride) const;

 private:
  std::size_t offset(std::size_t s, std::size_t t) const;

  Grid grid_;
  Shape shape_;
  std::size_t width_;
  std::vector<double> data_;
};

/// h_{sut} for grid triples s <= u <= t. Storage is cubic in the point count,
/// so this is meant for coarse meshes.
class Increment3 {
 public:
  Increment3(Grid grid, Shape shape);

  const Grid& grid() const { return grid_; }
  const Shape& shape() const { return shape_; }
  std::size_t width() const { return width_; }

  std::span<double> at(std::size_t s, std::size_t u, std::size_t t);
  std::span<const double> at(std::size_t s, std::size_t u, std::size_t t) const;

 private:
  std::size_t offset(std::size_t s, std::size_t u, std::size_t t) const;

  Grid grid_;
  Shape shape_;
  std::size_t width_;
  std::vector<double> data_;
};

/// (delta g)_{st} = g_t - g_s.
Increment2 delta1(const Increment1& g);

/// (delta h)_{sut} = h_{st} - h_{su} - h_{ut}.
Increment3 delta2(const Increment2& h);

/// max over s < t of |h_{st}| / (t - s)^mu.
double holder_norm2(const Increment2& h, HolderExponent mu);

/// max over s < u < t of |h_{sut}| / ((u - s)^gamma (t - u)^rho).
double holder_norm3(const Increment3& h, HolderExponent gamma, HolderExponent rho);

/// Multiparametric norm: shifts eps are grid multiples with eps <= min(1, T).
double multiparam_norm(const Increment1& h, HolderExponent beta);
double multiparam_norm(const Increment2& h, HolderExponent beta);

/// Discrete Garsia-Rodemich-Rumsey double sum
/// (sum_{u<v} |R_{uv}|^{2p} / |v-u|^{2 kappa p + 4} * step^2)^{1/(2p)}.
double grr_estimate(const Increment2& r, HolderExponent kappa, int p);

/// CSV with one row per (s, t) pair, s <= t. Columns: s, t, then one column per
/// tensor entry named by its 1-based index tuple, e.g. "v(1,2)".
void write_csv(std::ostream& out, const Increment2& h);
void write_csv(std::ostream& out, const Increment3& h);

/// Header names for the flattened entries of a tensor with the given shape.
std::vector<std::string> tensor_column_names(const Shape& shape);

}  // namespace rfbm
