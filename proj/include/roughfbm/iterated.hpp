#pragma once

// Discrete iterated integrals under the piecewise-linear-path,
// piecewise-constant-factor (PLPC) scheme, their Itô counterparts and the
// rough path levels B^n built from the valley-region formula.
//
// Under PLPC the path W is linear inside each cell and every factor is
// constant there, so the simplex integral is an ordinary Lebesgue integral.
// Inside a cell the ordered region of m coordinates has volume 1/m! of the
// cube, which is where the tie weights come from.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "roughfbm/combinat.hpp"
#include "roughfbm/grid.hpp"
#include "roughfbm/kernel.hpp"
#include "roughfbm/wiener.hpp"

namespace rfbm {

/// phi_l(cell) for every cell of the grid, paired with the component i_l that
/// the coordinate integrates against.
struct SampledIntegrand {
  std::vector<double> values;
  std::size_t component = 0;
};

/// Row Kbar(t_k, .) padded with zeros to the full cell count.
std::vector<double> kernel_factor(const CellAveragedKernel& kbar, std::size_t k);
/// Kbar(t_t, .) - Kbar(t_s, .), zero from cell t on.
std::vector<double> delta_kernel_factor(const CellAveragedKernel& kbar, Window w);

/// Iterated integral over {s < u_1 < ... < u_n < t}, exact under PLPC.
/// Cost O(N n^2); sums run in quad precision.
double simplex_strat_plpc(const std::vector<SampledIntegrand>& factors, Window w, const WienerPath& path);

/// Same integral for every component assignment at once. `rows[p]` is the
/// factor of slot p; the result is indexed by tuple_rank of the slot
/// components. Cost O(N n d^n).
std::vector<double> simplex_strat_plpc_tensor(const std::vector<std::span<const double>>& rows, Window w,
                                              const WienerPath& path);

/// Direct sum over non-decreasing cell multi-indices with weight 1/r! per run
/// of r equal cells. Guarded to n <= 3 and N <= 64.
double brute_force_oracle(const std::vector<SampledIntegrand>& factors, Window w, const WienerPath& path);

/// Left-point (Itô) simplex sum with strictly increasing cells. Parts of size
/// 2 in `nu` consume a bracket phi_a phi_b step 1{i_a = i_b} in place of two
/// increments.
double ito_iterated(const std::vector<SampledIntegrand>& factors, Window w, const WienerPath& path,
                    const Composition& nu);
double ito_iterated(const std::vector<SampledIntegrand>& factors, Window w, const WienerPath& path);

/// sum_k 2^{-(n-k)} sum_{nu in D_n^k} J(nu): the Stratonovich integral
/// rebuilt from Itô integrals and brackets.
double strat_via_ito_decomposition(const std::vector<SampledIntegrand>& factors, Window w,
                                   const WienerPath& path);

/// Floating-point type of the running sums in the level recursions. The valley
/// pieces of B^n cancel to roughly (|dB_st| / |B_t|)^n of their size, so exact
/// identities between levels need `quad`; `extended` (long double) is about
/// eight times faster and enough for moment and norm studies.
enum class Accumulation { quad, extended };

/// Largest level accepted without an explicit override; the tensor work grows
/// like d^n.
inline constexpr std::size_t kDefaultLevelGuard = 4;

/// hat B^{n,j}_{st}(i): the valley-region integral with sign (-1)^{j-1}.
double hat_B(std::size_t n, std::size_t j, Window w, const IndexTuple& tuple, const WienerPath& path,
             const CellAveragedKernel& kbar);
/// All d^n tuples at once, indexed by tuple_rank.
std::vector<double> hat_B_tensor(std::size_t n, std::size_t j, Window w, const WienerPath& path,
                                 const CellAveragedKernel& kbar, Accumulation acc = Accumulation::quad);

/// B^n_{st}(i) = sum_{j=1}^n hat B^{n,j}_{st}(i).
double level_B(std::size_t n, Window w, const IndexTuple& tuple, const WienerPath& path,
               const CellAveragedKernel& kbar);
std::vector<double> level_B_tensor(std::size_t n, Window w, const WienerPath& path, const CellAveragedKernel& kbar,
                                   Accumulation acc = Accumulation::quad);

struct StackProvenance {
  std::uint64_t seed = 0;
  std::size_t cells = 0;
  double horizon = 0.0;
  double hurst = 0.0;
  double c_h = 0.0;
  std::size_t dim = 0;
  std::size_t refinements = 0;
  std::string scheme = "plpc";
  std::string version;
};

/// Levels 1..n_max for a set of windows. Level n of a window is a flat array
/// of d^n values indexed by tuple_rank.
class RoughPathStack {
 public:
  RoughPathStack(Grid grid, StackProvenance provenance, std::size_t n_max);

  const Grid& grid() const { return grid_; }
  const StackProvenance& provenance() const { return provenance_; }
  std::size_t n_max() const { return n_max_; }
  std::size_t dim() const { return provenance_.dim; }

  void set(Window w, std::size_t n, std::vector<double> values);
  bool contains(Window w, std::size_t n) const;
  /// Throws std::out_of_range for missing entries.
  std::span<const double> level(Window w, std::size_t n) const;
  double value(Window w, const IndexTuple& tuple) const;
  std::vector<Window> windows() const;

  /// Rows n, ks, kt, s, t, i1..i_{n_max}, value; unused index columns empty.
  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;
  /// Inverse of write_json; values round-trip exactly.
  static RoughPathStack read_json(std::istream& in);

 private:
  Grid grid_;
  StackProvenance provenance_;
  std::size_t n_max_;
  std::map<Window, std::vector<std::vector<double>>> levels_;
};

struct StackOptions {
  std::size_t threads = 1;
  std::size_t level_guard = kDefaultLevelGuard;
  Accumulation accumulation = Accumulation::quad;
};

/// Level 1 from the synthesized fBm, levels 2..n_max from level_B_tensor.
RoughPathStack build_stack(std::size_t n_max, const std::vector<Window>& windows, const WienerPath& path,
                           const CellAveragedKernel& kbar, const StackOptions& options = {});

/// Every window (s, t) with s <= t on the grid.
std::vector<Window> all_windows(const Grid& grid);

}  // namespace rfbm
