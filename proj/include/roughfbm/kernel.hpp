#pragma once

// Volterra kernel of fractional Brownian motion for H in (0, 1/2),
//
//   K(t,u) = c_H [ (u/t)^{1/2-H} (t-u)^{H-1/2}
//                  + (1/2-H) u^{1/2-H} \int_u^t v^{H-3/2} (v-u)^{H-1/2} dv ] 1{0<u<t},
//
// its cell averages on a uniform grid, and quadrature probes of the kernel
// bounds the rough path construction relies on.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "roughfbm/grid.hpp"

namespace rfbm {

/// Hurst parameter restricted to the open interval (0, 1/2).
class HurstParam {
 public:
  explicit HurstParam(double h);
  double value() const { return h_; }
  /// Highest rough path level the construction supports, floor(1/H).
  std::size_t level_cap() const;

 private:
  double h_;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultQuadratureTolerance = 1e-8;

/// Interface for Gaussian Volterra kernels driving the construction. Any kernel
/// with K(t,u) <~ (t-u)^{H-1/2} + u^{H-1/2} and d_t K(t,u) <~ (t-u)^{H-3/2}
/// can stand in for the fBm kernel.
class VolterraKernel {
 public:
  virtual ~VolterraKernel() = default;

  /// Regularity index H of the bound envelope.
  virtual double hurst() const = 0;
  virtual double tolerance() const = 0;

  /// K(t, u); zero outside 0 < u < t.
  virtual double eval(double t, double u) const = 0;

  /// K(t, t - gap) with the distance to the diagonal supplied exactly, for
  /// quadratures that cluster nodes against the u -> t singularity.
  virtual double eval_gap(double t, double gap) const { return eval(t, t - gap); }

  /// K(t, u) with u and gap = t - u both supplied exactly, for the innermost
  /// level of nested quadratures. Kernels with a cheaper closed form override
  /// it; the default goes through eval or eval_gap, whichever argument is
  /// smaller and therefore exact.
  virtual double eval_fast(double t, double u, double gap) const {
    return u < gap ? eval(t, u) : eval_gap(t, gap);
  }

  /// K(t,u) - K(s,u) under the convention K(s,u) = 0 for u >= s.
  virtual double delta_eval(double s, double t, double u) const;

  /// (1/step) \int_{cell m} K(t_k, u) du for m < k; entries m >= k are zero
  /// and omitted, so the returned row has length k.
  virtual std::vector<double> cell_average_row(const Grid& grid, std::size_t k) const = 0;

  /// Short identifier used in cache keys and provenance headers.
  virtual std::string name() const = 0;
  virtual double normalization() const = 0;
};

/// c_H = sqrt(2H / ((1-2H) Beta(1-2H, H+1/2))).
double kernel_constant(HurstParam h);

class FbmKernel final : public VolterraKernel {
 public:
  explicit FbmKernel(HurstParam h, double tol_q = kDefaultQuadratureTolerance);
  /// Overrides the normalization, e.g. to probe the covariance gate.
  FbmKernel(HurstParam h, double c_h, double tol_q);

  double hurst() const override { return h_.value(); }
  double tolerance() const override { return tol_q_; }
  double normalization() const override { return c_h_; }
  std::string name() const override { return "fbm-volterra"; }

  double eval(double t, double u) const override;
  double eval_gap(double t, double gap) const override;
  double eval_fast(double t, double u, double gap) const override;
  std::vector<double> cell_average_row(const Grid& grid, std::size_t k) const override;

  /// K(t, t - gap) with the inner integral taken from the incomplete beta
  /// function instead of quadrature. Used for the cell-average tables, where
  /// the quadrature path is too slow; tests hold the two paths together.
  double eval_gap_beta(double t, double gap) const;

  /// \int_m^{m+1} K(k, y) dy in unit-spacing coordinates. K is homogeneous of
  /// degree H-1/2, so the average over a grid of step D is D^{H-1/2} times this.
  double unit_cell_integral(std::size_t k, std::size_t m) const;

 private:
  double inner_integral(double span) const;
  double inner_integral_beta(double span) const;
  double eval_split(double t, double u, double gap) const;
  double eval_split_beta(double t, double u, double gap) const;

  HurstParam h_;
  double c_h_;
  double tol_q_;
};

/// Lower-triangular table of kernel cell averages Kbar(t_k, m), m < k.
class CellAveragedKernel {
 public:
  struct Key {
    std::size_t cells = 0;
    double horizon = 0.0;
    double hurst = 0.0;
    double tol_q = 0.0;
    double normalization = 0.0;
    std::string kernel;

    bool operator==(const Key&) const = default;
  };

  CellAveragedKernel(Grid grid, Key key, std::vector<std::vector<double>> rows);

  const Grid& grid() const { return grid_; }
  const Key& key() const { return key_; }

  /// Row k, of length k.
  std::span<const double> row(std::size_t k) const { return rows_.at(k); }
  double at(std::size_t k, std::size_t m) const { return m < k ? rows_[k][m] : 0.0; }

  void save_binary(std::ostream& out) const;
  static CellAveragedKernel load_binary(std::istream& in);
  /// CSV rows: k, m, value for every m < k.
  void write_csv(std::ostream& out) const;

 private:
  Grid grid_;
  Key key_;
  std::vector<std::vector<double>> rows_;
};

/// Builds every row; rows are independent and spread over `threads` workers.
CellAveragedKernel build_cell_averages(const VolterraKernel& kernel, const Grid& grid,
                                       std::size_t threads = 1);

/// Loads a table from `cache_dir` when the stored key matches, otherwise builds
/// it and writes it there. An empty directory disables caching.
CellAveragedKernel cached_cell_averages(const VolterraKernel& kernel, const Grid& grid,
                                        const std::string& cache_dir, std::size_t threads = 1);

std::string cache_file_name(const CellAveragedKernel::Key& key);

struct CovarianceCheck {
  double computed = 0.0;
  double target = 0.0;
  double abs_error = 0.0;
};

/// \int_0^s K(t,u) K(s,u) du against 1/2 (t^{2H} + s^{2H} - (t-s)^{2H}).
CovarianceCheck covariance_check(const VolterraKernel& kernel, double s, double t);

/// (\int_v^t K(t,w)^2 dw) / (t-v)^{2H}.
double lemma_int_K2(const VolterraKernel& kernel, double v, double t);

/// I_st / (t-s)^{4H} with
/// I_st = \int_0^t (K(t,u1) - K(s,u1))^2 (\int_{u1}^t K(t,u2)^2 du2) du1.
double lemma_Ist(const VolterraKernel& kernel, double s, double t);

/// beta_A = \int_0^A [y^{H-1/2} - (1+y)^{H-1/2}] [y^{H-1/2} + (A-y)^{H-1/2}] y^{2(k-1)H} dy.
double lemma_betaA(HurstParam h, int k_level, double a, double tol_q = kDefaultQuadratureTolerance);

/// Upper bounds for the lemma ratios over the probe families below, recorded
/// from sweeps at H in {0.1, 0.2, 0.25, 0.3, 0.4}.
struct LemmaBounds {
  double int_k2 = 1.05;
  double ist = 0.6;
  double beta_a = 5.0;
};

struct LemmaProbe {
  std::string lemma;  // "int_K2", "Ist" or "beta_A"
  int k_level = 0;    // beta_A only
  double x = 0.0;     // v, s or A
  double t = 0.0;
  double ratio = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Covariance probes at five (s, t) pairs in (0, 1].
std::vector<std::pair<double, double>> covariance_probe_pairs();

/// int_K2 at t = 1 for v in 0.1..0.9 and v near t; Ist at t = 1 for s = 1 - 2^{-j};
/// beta_A for every k with 2kH < 1 (at most 4) and A from 1e-3 to 1e5.
std::vector<LemmaProbe> lemma_sweep(const VolterraKernel& kernel, const LemmaBounds& bounds = {});

}  // namespace rfbm
