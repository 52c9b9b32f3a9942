#pragma once

// Checks on computed stacks: exact per-sample identities (Chen, shuffle) and
// the Monte Carlo studies for moments, Hölder norms and the Itô/Stratonovich
// decomposition.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "roughfbm/algebra.hpp"
#include "roughfbm/combinat.hpp"
#include "roughfbm/grid.hpp"
#include "roughfbm/iterated.hpp"
#include "roughfbm/kernel.hpp"

namespace rfbm {

inline constexpr double kDefaultIdentityTolerance = 1e-9;
inline constexpr double kDefaultDefectFloor = 1e-30;

struct DefectReport {
  std::string identity;
  std::vector<std::size_t> points;  // grid indices: (s, u, t) or (s, t)
  IndexTuple left;
  IndexTuple right;  // empty for Chen
  double defect = 0.0;
  double scale = 0.0;
  double relative = 0.0;
  bool pass = false;
};

/// B^n_st - B^n_su - B^n_ut - sum_{n1} B^{n1}_su B^{n-n1}_ut, scaled by the
/// largest absolute term.
DefectReport chen_defect(const RoughPathStack& stack, std::size_t s, std::size_t u, std::size_t t,
                         const IndexTuple& tuple, double tol = kDefaultIdentityTolerance,
                         double floor = kDefaultDefectFloor);

/// B^n_st(a) B^m_st(b) - sum over shuffles c of B^{n+m}_st(c), scaled by the
/// largest absolute term.
DefectReport shuffle_defect(const RoughPathStack& stack, std::size_t s, std::size_t t, const IndexTuple& a,
                            const IndexTuple& b, double tol = kDefaultIdentityTolerance,
                            double floor = kDefaultDefectFloor);

/// Mean and standard error of a sample, accumulated in a fixed order.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};
MeanEstimate mean_estimate(const std::vector<double>& xs);

/// Weighted least-squares line through (x_i, y_i) with standard errors sigma_i.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
};
LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& sigma);

struct ScalingConfig {
  std::size_t level = 1;
  double hurst = 0.25;
  double horizon = 1.0;
  std::size_t cells = 512;
  std::size_t dim = 2;
  /// Window lengths in time units; each must be a multiple of the step.
  std::vector<double> window_sizes{0.5, 0.25, 0.125, 0.0625};
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  double slope_tolerance = 0.1;
};

struct ScalingReport {
  std::size_t level = 0;
  double hurst = 0.0;
  std::size_t samples = 0;
  std::vector<double> window_sizes;
  std::vector<MeanEstimate> moments;  // E |B^n_st|^2, Frobenius over tuples
  double slope = 0.0;
  double slope_half_width = 0.0;  // 95% confidence
  double expected_slope = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Windows (T - h, T) for every h; second moments of B^n with per-sample
/// seeds derive_seed(seed, sample).
ScalingReport scaling_study(const ScalingConfig& config, const CellAveragedKernel& kbar);

struct HolderConfig {
  std::size_t level = 1;
  double hurst = 0.3;
  double gamma = 0.24;
  double control_gamma = 0.33;
  double horizon = 1.0;
  std::size_t coarse_cells = 128;
  std::size_t dim = 2;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t threads = 1;
  double stability_factor = 2.0;
};

/// Smallest GRR moment order with 2 p n (H - gamma) > 4.
int grr_order(std::size_t level, double hurst, double gamma);

struct HolderSeedResult {
  std::uint64_t seed = 0;
  double norm_coarse = 0.0, norm_fine = 0.0;
  double grr_coarse = 0.0, grr_fine = 0.0;
  double control_coarse = 0.0, control_fine = 0.0;
  double norm_ratio() const { return norm_fine / norm_coarse; }
  double grr_ratio() const { return grr_fine / grr_coarse; }
  double control_ratio() const { return control_fine / control_coarse; }
};

struct HolderReport {
  std::size_t level = 0;
  double hurst = 0.0;
  double gamma = 0.0;
  double control_gamma = 0.0;
  int grr_p = 0;
  std::size_t coarse_cells = 0;
  std::vector<HolderSeedResult> seeds;
  double mean_control_ratio = 0.0;
  double mean_norm_ratio = 0.0;
  bool stable = false;         // every norm and GRR ratio within the stability factor
  bool control_grows = false;  // control ratio above 1 on average
  // Reported only. At N = 128 -> 256 both ratios carry the same log-modulus
  // growth and differ by about 2^{n(control - gamma)}, inside seed noise.
  bool control_exceeds_main = false;
  bool pass() const { return stable && control_grows; }
};

/// B^n over all grid pairs at N and at 2N, the fine path being the
/// Brownian-bridge refinement of the coarse one. Rejects gamma >= H.
HolderReport holder_study(const HolderConfig& config, const CellAveragedKernel& coarse,
                          const CellAveragedKernel& fine);

/// Level-n increment of a stack over every grid pair, shape {d, ..., d}.
Increment2 stack_level_increment(const RoughPathStack& stack, std::size_t n);

struct ItoStratConfig {
  std::size_t level = 2;
  double hurst = 0.3;
  double horizon = 1.0;
  std::vector<std::size_t> cells{128, 256, 512};
  std::size_t component = 0;
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct ItoStratReport {
  std::size_t level = 0;
  double hurst = 0.0;
  std::vector<std::size_t> cells;
  std::vector<double> rms;
  bool decreasing = false;
};

/// RMS over samples of strat_via_ito_decomposition - simplex_strat_plpc with
/// every coordinate on one component. Factors are the first valley piece of
/// hat B^{n,1} on (T/2, T). kbars[i] must match cells[i]; paths at finer
/// resolutions are Brownian-bridge refinements of the coarsest one.
ItoStratReport ito_strat_study(const ItoStratConfig& config, const std::vector<const CellAveragedKernel*>& kbars);

// Output. JSON reports, CSV tables, and gnuplot scripts for log-log plots.
std::string to_json(const DefectReport& r);
std::string to_json(const ScalingReport& r);
std::string to_json(const HolderReport& r);
std::string to_json(const ItoStratReport& r);
void write_csv(std::ostream& out, const ScalingReport& r);
void write_csv(std::ostream& out, const HolderReport& r);
void write_gnuplot(std::ostream& out, const ScalingReport& r, const std::string& csv_name);

}  // namespace rfbm
