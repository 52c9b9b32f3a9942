#include "roughfbm/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace rfbm {

namespace {

// Scaled so that squaring cannot overflow.
double euclid(std::span<const double> v) {
  double big = 0.0;
  for (double x : v) big = std::max(big, std::abs(x));
  if (big == 0.0 || !std::isfinite(big)) return big;
  double acc = 0.0;
  for (double x : v) acc += (x / big) * (x / big);
  return big * std::sqrt(acc);
}

// Number of grid shifts usable for the multiparametric norm.
std::size_t max_shift(const Grid& grid) {
  const double cap = std::min(1.0, grid.horizon());
  return static_cast<std::size_t>(std::floor(cap / grid.step() + 1e-9));
}

void write_header(std::ostream& out, std::initializer_list<const char*> args, const Shape& shape) {
  bool first = true;
  for (const char* a : args) {
    out << (first ? "" : ",") << a;
    first = false;
  }
  for (const auto& name : tensor_column_names(shape)) out << ',' << name;
  out << '\n';
}

void write_values(std::ostream& out, std::span<const double> v) {
  for (double x : v) out << ',' << x;
  out << '\n';
}

}  // namespace

HolderExponent::HolderExponent(double value) : value_(value) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw std::invalid_argument("Hölder exponent must be finite and non-negative");
}

std::size_t shape_width(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::vector<std::string> tensor_column_names(const Shape& shape) {
  const std::size_t width = shape_width(shape);
  std::vector<std::string> names;
  names.reserve(width);
  std::vector<std::size_t> idx(shape.size(), 0);
  for (std::size_t flat = 0; flat < width; ++flat) {
    std::string name = "v(";
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (a) name += ',';
      name += std::to_string(idx[a] + 1);
    }
    name += ')';
    names.push_back(std::move(name));
    // Row-major increment, last axis fastest.
    for (std::size_t a = idx.size(); a-- > 0;) {
      if (++idx[a] < shape[a]) break;
      idx[a] = 0;
    }
  }
  return names;
}

// ---------------------------------------------------------------------------

Increment1::Increment1(Grid grid, Shape shape)
    : grid_(grid), shape_(std::move(shape)), width_(shape_width(shape_)),
      data_(grid_.points() * width_, 0.0) {}

std::span<double> Increment1::at(std::size_t k) {
  return {data_.data() + k * width_, width_};
}

std::span<const double> Increment1::at(std::size_t k) const {
  return {data_.data() + k * width_, width_};
}

Increment2::Increment2(Grid grid, Shape shape)
    : grid_(grid), shape_(std::move(shape)), width_(shape_width(shape_)),
      data_(grid_.points() * grid_.points() * width_, 0.0) {}

std::size_t Increment2::offset(std::size_t s, std::size_t t) const {
  if (s > t || t >= grid_.points()) throw std::out_of_range("Increment2 index");
  return (s * grid_.points() + t) * width_;
}

std::span<double> Increment2::at(std::size_t s, std::size_t t) {
  return {data_.data() + offset(s, t), width_};
}

std::span<const double> Increment2::at(std::size_t s, std::size_t t) const {
  return {data_.data() + offset(s, t), width_};
}

Increment2 Increment2::restrict_to(std::size_t stride) const {
  if (stride == 0 || grid_.cells() % stride != 0)
    throw std::invalid_argument("stride must divide the cell count");
  Increment2 out(Grid(grid_.horizon(), grid_.cells() / stride), shape_);
  const std::size_t m = out.grid().points();
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t t = s; t < m; ++t) {
      auto src = at(s * stride, t * stride);
      std::copy(src.begin(), src.end(), out.at(s, t).begin());
    }
  return out;
}

Increment3::Increment3(Grid grid, Shape shape)
    : grid_(grid), shape_(std::move(shape)), width_(shape_width(shape_)) {
  const std::size_t p = grid_.points();
  data_.assign(p * p * p * width_, 0.0);
}

std::size_t Increment3::offset(std::size_t s, std::size_t u, std::size_t t) const {
  const std::size_t p = grid_.points();
  if (s > u || u > t || t >= p) throw std::out_of_range("Increment3 index");
  return ((s * p + u) * p + t) * width_;
}

std::span<double> Increment3::at(std::size_t s, std::size_t u, std::size_t t) {
  return {data_.data() + offset(s, u, t), width_};
}

std::span<const double> Increment3::at(std::size_t s, std::size_t u, std::size_t t) const {
  return {data_.data() + offset(s, u, t), width_};
}

// ---------------------------------------------------------------------------

Increment2 delta1(const Increment1& g) {
  Increment2 h(g.grid(), g.shape());
  const std::size_t p = g.grid().points();
  for (std::size_t s = 0; s < p; ++s)
    for (std::size_t t = s; t < p; ++t) {
      auto gs = g.at(s);
      auto gt = g.at(t);
      auto out = h.at(s, t);
      for (std::size_t c = 0; c < out.size(); ++c) out[c] = gt[c] - gs[c];
    }
  return h;
}

Increment3 delta2(const Increment2& h) {
  Increment3 out(h.grid(), h.shape());
  const std::size_t p = h.grid().points();
  for (std::size_t s = 0; s < p; ++s)
    for (std::size_t u = s; u < p; ++u)
      for (std::size_t t = u; t < p; ++t) {
        auto st = h.at(s, t);
        auto su = h.at(s, u);
        auto ut = h.at(u, t);
        auto dst = out.at(s, u, t);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = st[c] - su[c] - ut[c];
      }
  return out;
}

double holder_norm2(const Increment2& h, HolderExponent mu) {
  const Grid& g = h.grid();
  const std::size_t p = g.points();
  double best = 0.0;
  for (std::size_t s = 0; s < p; ++s)
    for (std::size_t t = s + 1; t < p; ++t) {
      const double gap = static_cast<double>(t - s) * g.step();
      best = std::max(best, euclid(h.at(s, t)) / std::pow(gap, mu.value()));
    }
  return best;
}

double holder_norm3(const Increment3& h, HolderExponent gamma, HolderExponent rho) {
  const Grid& g = h.grid();
  const std::size_t p = g.points();
  double best = 0.0;
  for (std::size_t s = 0; s < p; ++s)
    for (std::size_t u = s + 1; u < p; ++u)
      for (std::size_t t = u + 1; t < p; ++t) {
        const double left = static_cast<double>(u - s) * g.step();
        const double right = static_cast<double>(t - u) * g.step();
        const double denom = std::pow(left, gamma.value()) * std::pow(right, rho.value());
        best = std::max(best, euclid(h.at(s, u, t)) / denom);
      }
  return best;
}

double multiparam_norm(const Increment1& h, HolderExponent beta) {
  const Grid& g = h.grid();
  const std::size_t p = g.points();
  const std::size_t shifts = max_shift(g);
  std::vector<double> diff(h.width());
  double best = 0.0;
  for (std::size_t e = 1; e <= shifts; ++e) {
    const double eps = static_cast<double>(e) * g.step();
    for (std::size_t s = 0; s + e < p; ++s) {
      auto a = h.at(s);
      auto b = h.at(s + e);
      for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = b[c] - a[c];
      best = std::max(best, euclid(diff) / std::pow(eps, beta.value()));
    }
  }
  return best;
}

double multiparam_norm(const Increment2& h, HolderExponent beta) {
  const Grid& g = h.grid();
  const std::size_t p = g.points();
  const std::size_t shifts = max_shift(g);
  std::vector<double> diff(h.width());
  double best = 0.0;
  for (std::size_t e = 1; e <= shifts; ++e) {
    const double scale = std::pow(static_cast<double>(e) * g.step(), beta.value());
    for (std::size_t s = 0; s < p; ++s)
      for (std::size_t t = s; t + e < p; ++t) {
        auto a = h.at(s, t);
        auto b = h.at(s + e, t + e);
        for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = b[c] - a[c];
        best = std::max(best, euclid(diff) / scale);
      }
  }
  return best;
}

double grr_estimate(const Increment2& r, HolderExponent kappa, int p) {
  if (p < 1) throw std::invalid_argument("GRR moment order p must be >= 1");
  const Grid& g = r.grid();
  const std::size_t pts = g.points();
  const double power = 2.0 * p;
  const double exponent = 2.0 * kappa.value() * p + 4.0;
  const double log_cell = 2.0 * std::log(g.step());

  // Terms can span hundreds of orders of magnitude; accumulate in log space
  // relative to the largest one.
  std::vector<double> logs;
  logs.reserve(pts * (pts - 1) / 2);
  for (std::size_t s = 0; s < pts; ++s)
    for (std::size_t t = s + 1; t < pts; ++t) {
      const double mag = euclid(r.at(s, t));
      if (mag == 0.0) continue;
      const double gap = static_cast<double>(t - s) * g.step();
      logs.push_back(power * std::log(mag) - exponent * std::log(gap) + log_cell);
    }
  if (logs.empty()) return 0.0;
  const double top = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - top);
  return std::exp((top + std::log(acc)) / power);
}

void write_csv(std::ostream& out, const Increment2& h) {
  write_header(out, {"s", "t"}, h.shape());
  const Grid& g = h.grid();
  for (std::size_t s = 0; s < g.points(); ++s)
    for (std::size_t t = s; t < g.points(); ++t) {
      out << g.point(s) << ',' << g.point(t);
      write_values(out, h.at(s, t));
    }
}

void write_csv(std::ostream& out, const Increment3& h) {
  write_header(out, {"s", "u", "t"}, h.shape());
  const Grid& g = h.grid();
  for (std::size_t s = 0; s < g.points(); ++s)
    for (std::size_t u = s; u < g.points(); ++u)
      for (std::size_t t = u; t < g.points(); ++t) {
        out << g.point(s) << ',' << g.point(u) << ',' << g.point(t);
        write_values(out, h.at(s, u, t));
      }
}

}  // namespace rfbm
