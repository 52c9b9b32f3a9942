#include "roughfbm/iterated.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "roughfbm/parallel.hpp"
#include "roughfbm/version.hpp"

namespace rfbm {

namespace {

// Tie weights are applied by dividing by m!, which is exact in floating point;
// a rounded 1/m! would break the identities that rely on those weights.
constexpr double kFactorial[] = {1, 1, 2, 6, 24, 120, 720, 5040, 40320, 362880, 3628800};
constexpr std::size_t kMaxLevel = std::size(kFactorial) - 1;

std::size_t ipow(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= base;
  return r;
}

void check_factors(const std::vector<SampledIntegrand>& factors, Window w, const WienerPath& path) {
  check_window(path.grid(), w);
  if (factors.empty()) throw std::invalid_argument("iterated integral needs at least one factor");
  if (factors.size() > kMaxLevel) throw std::invalid_argument("iterated integral level too large");
  for (const auto& f : factors) {
    if (f.values.size() != path.grid().cells()) throw std::invalid_argument("factor does not match the grid");
    if (f.component >= path.dim()) throw std::invalid_argument("factor component beyond path dimension");
  }
}

void check_level(std::size_t n, Window w, const WienerPath& path, const CellAveragedKernel& kbar) {
  if (!(path.grid() == kbar.grid())) throw std::invalid_argument("Wiener path and kernel table live on different grids");
  check_window(path.grid(), w);
  if (n < 1) throw std::invalid_argument("rough path level must be >= 1");
  const std::size_t cap = HurstParam(kbar.key().hurst).level_cap();
  if (n > cap)
    throw std::invalid_argument("level " + std::to_string(n) + " exceeds floor(1/H) = " + std::to_string(cap));
  if (n > kMaxLevel) throw std::invalid_argument("rough path level too large");
}

template <class T>
std::vector<T> widen(std::span<const double> v) {
  return std::vector<T>(v.begin(), v.end());
}

// Valley pieces cancel heavily when the window increment is small next to the
// path itself. The identities between levels are algebraic in the rows K_s,
// K_t and K_t - K_s, so that difference is formed in the accumulator type.
template <class T>
std::vector<std::vector<T>> valley_rows(std::size_t n, std::size_t j, Window w, const CellAveragedKernel& kbar) {
  const auto ks = widen<T>(kernel_factor(kbar, w.s));
  const auto kt = widen<T>(kernel_factor(kbar, w.t));
  std::vector<T> dk(kt.size());
  for (std::size_t m = 0; m < kt.size(); ++m) dk[m] = kt[m] - ks[m];
  std::vector<std::vector<T>> rows;
  rows.reserve(n);
  for (std::size_t c = 0; c < n; ++c) rows.push_back(c + 1 < j ? ks : (c + 1 == j ? dk : kt));
  return rows;
}

int valley_sign(std::size_t j) { return (j - 1) % 2 == 0 ? 1 : -1; }

template <class T>
T plpc_scalar(const std::vector<std::span<const T>>& rows, const std::vector<std::size_t>& comps, Window w,
              const WienerPath& path) {
  const std::size_t n = rows.size();
  std::vector<T> level(n + 1, T(0));
  level[0] = T(1);
  std::vector<T> a(n);
  for (std::size_t k = w.s; k < w.t; ++k) {
    for (std::size_t r = 0; r < n; ++r) a[r] = rows[r][k] * T(path.increment(k, comps[r]));
    for (std::size_t l = n; l >= 1; --l) {
      T prod = 1;
      T acc = 0;
      for (std::size_t m = 1; m <= l; ++m) {
        prod *= a[l - m];
        acc += level[l - m] * prod / T(kFactorial[m]);
      }
      level[l] += acc;
    }
  }
  return level[n];
}

// All d^n component assignments at once; I_l is a tensor over the components
// of slots 0..l-1.
template <class T>
std::vector<T> plpc_tensor(const std::vector<std::span<const T>>& rows, Window w, const WienerPath& path) {
  check_window(path.grid(), w);
  const std::size_t n = rows.size();
  const std::size_t d = path.dim();
  if (n == 0 || n > kMaxLevel) throw std::invalid_argument("iterated integral level out of range");
  for (const auto& r : rows)
    if (r.size() != path.grid().cells()) throw std::invalid_argument("factor does not match the grid");

  std::vector<std::vector<T>> level(n + 1);
  for (std::size_t l = 0; l <= n; ++l) level[l].assign(ipow(d, l), T(0));
  level[0][0] = T(1);
  // a[r][c] = phi_r(k) dW_k(c)
  std::vector<std::vector<T>> a(n, std::vector<T>(d));
  std::vector<T> suffix, next;
  for (std::size_t k = w.s; k < w.t; ++k) {
    const auto dw = path.cell(k);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) a[r][c] = rows[r][k] * T(dw[c]);
    for (std::size_t l = n; l >= 1; --l) {
      auto& out = level[l];
      suffix.assign(1, T(1));
      std::size_t width = 1;
      for (std::size_t m = 1; m <= l; ++m) {
        // Extend the suffix product by slot l - m in front.
        next.resize(width * d);
        const auto& ar = a[l - m];
        for (std::size_t c = 0; c < d; ++c)
          for (std::size_t q = 0; q < width; ++q) next[c * width + q] = ar[c] * suffix[q];
        suffix.swap(next);
        width *= d;
        const auto& prefix = level[l - m];
        const T factorial = kFactorial[m];
        for (std::size_t p = 0; p < prefix.size(); ++p) {
          const T base = prefix[p] / factorial;
          if (base == T(0)) continue;
          T* dst = out.data() + p * width;
          for (std::size_t q = 0; q < width; ++q) dst[q] += base * suffix[q];
        }
      }
    }
  }
  return std::move(level[n]);
}

// Adds hat B^{n,j} for every tuple into `out`, indexed by tuple_rank.
template <class T>
void accumulate_hat(std::size_t n, std::size_t j, Window w, const WienerPath& path, const CellAveragedKernel& kbar,
                    std::vector<T>& out) {
  const std::size_t d = path.dim();
  if (w.s == w.t) return;
  const auto rows = valley_rows<T>(n, j, w, kbar);
  const T sign = valley_sign(j);
  for (const auto& piece : valley_interleavings(n, j)) {
    std::vector<std::span<const T>> slot_rows;
    // stride[p]: weight of slot p's component in the coordinate-ordered rank.
    std::vector<std::size_t> stride(n);
    for (std::size_t p = 0; p < n; ++p) {
      slot_rows.emplace_back(rows[piece.order[p]]);
      stride[p] = ipow(d, n - 1 - piece.order[p]);
    }
    const auto piece_values = plpc_tensor<T>(slot_rows, Window{0, w.t}, path);
    for (std::size_t q = 0; q < out.size(); ++q) {
      std::size_t rest = q, target = 0;
      for (std::size_t p = n; p-- > 0;) {
        target += (rest % d) * stride[p];
        rest /= d;
      }
      out[target] += sign * piece_values[q];
    }
  }
}

template <class T>
std::vector<double> level_tensor(std::size_t n, std::size_t j_first, std::size_t j_last, Window w,
                                 const WienerPath& path, const CellAveragedKernel& kbar) {
  std::vector<T> out(ipow(path.dim(), n), T(0));
  for (std::size_t j = j_first; j <= j_last; ++j) accumulate_hat<T>(n, j, w, path, kbar, out);
  std::vector<double> result(out.size());
  for (std::size_t q = 0; q < out.size(); ++q) result[q] = static_cast<double>(out[q]);
  return result;
}

std::vector<double> level_tensor(Accumulation acc, std::size_t n, std::size_t j_first, std::size_t j_last, Window w,
                                 const WienerPath& path, const CellAveragedKernel& kbar) {
  if (acc == Accumulation::quad) return level_tensor<__float128>(n, j_first, j_last, w, path, kbar);
  return level_tensor<long double>(n, j_first, j_last, w, path, kbar);
}

using quad = __float128;

}  // namespace

std::vector<double> kernel_factor(const CellAveragedKernel& kbar, std::size_t k) {
  std::vector<double> out(kbar.grid().cells(), 0.0);
  const auto row = kbar.row(k);
  std::copy(row.begin(), row.end(), out.begin());
  return out;
}

std::vector<double> delta_kernel_factor(const CellAveragedKernel& kbar, Window w) {
  check_window(kbar.grid(), w);
  std::vector<double> out = kernel_factor(kbar, w.t);
  const auto rs = kbar.row(w.s);
  for (std::size_t m = 0; m < rs.size(); ++m) out[m] -= rs[m];
  return out;
}

double simplex_strat_plpc(const std::vector<SampledIntegrand>& factors, Window w, const WienerPath& path) {
  check_factors(factors, w, path);
  std::vector<std::vector<quad>> wide;
  std::vector<std::span<const quad>> rows;
  std::vector<std::size_t> comps;
  wide.reserve(factors.size());
  for (const auto& f : factors) {
    wide.push_back(widen<quad>(f.values));
    rows.emplace_back(wide.back());
    comps.push_back(f.component);
  }
  return static_cast<double>(plpc_scalar<quad>(rows, comps, w, path));
}

std::vector<double> simplex_strat_plpc_tensor(const std::vector<std::span<const double>>& rows, Window w,
                                              const WienerPath& path) {
  std::vector<std::vector<quad>> wide;
  std::vector<std::span<const quad>> spans;
  wide.reserve(rows.size());
  for (const auto& r : rows) {
    wide.push_back(widen<quad>(r));
    spans.emplace_back(wide.back());
  }
  const auto v = plpc_tensor<quad>(spans, w, path);
  std::vector<double> out(v.size());
  for (std::size_t q = 0; q < v.size(); ++q) out[q] = static_cast<double>(v[q]);
  return out;
}

double brute_force_oracle(const std::vector<SampledIntegrand>& factors, Window w, const WienerPath& path) {
  check_factors(factors, w, path);
  const std::size_t n = factors.size();
  if (n > 3 || path.grid().cells() > 64) throw std::invalid_argument("brute-force oracle limited to n <= 3, N <= 64");
  if (w.s == w.t) return 0.0;
  std::vector<std::size_t> cell(n, w.s);
  double total = 0.0;
  while (true) {
    double term = 1.0;
    std::size_t run = 1;
    for (std::size_t l = 0; l < n; ++l) {
      term *= factors[l].values[cell[l]] * path.increment(cell[l], factors[l].component);
      if (l + 1 < n && cell[l + 1] == cell[l]) {
        ++run;
      } else {
        term /= kFactorial[run];
        run = 1;
      }
    }
    total += term;
    // Next non-decreasing multi-index.
    std::size_t pos = n;
    while (pos > 0 && cell[pos - 1] + 1 == w.t) --pos;
    if (pos == 0) break;
    ++cell[pos - 1];
    for (std::size_t l = pos; l < n; ++l) cell[l] = cell[pos - 1];
  }
  return total;
}

double ito_iterated(const std::vector<SampledIntegrand>& factors, Window w, const WienerPath& path,
                    const Composition& nu) {
  check_factors(factors, w, path);
  if (nu.total() != static_cast<int>(factors.size()))
    throw std::invalid_argument("composition does not match the number of factors");
  const std::size_t slots = nu.parts.size();
  const double step = path.grid().step();
  std::vector<double> level(slots + 1, 0.0);
  level[0] = 1.0;
  std::vector<double> weight(slots);
  for (std::size_t k = w.s; k < w.t; ++k) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < slots; ++j) {
      if (nu.parts[j] == 1) {
        weight[j] = factors[c].values[k] * path.increment(k, factors[c].component);
        c += 1;
      } else {
        const bool same = factors[c].component == factors[c + 1].component;
        weight[j] = same ? factors[c].values[k] * factors[c + 1].values[k] * step : 0.0;
        c += 2;
      }
    }
    // Descending order keeps level[l-1] at its value from the previous cell.
    for (std::size_t l = slots; l >= 1; --l) level[l] += level[l - 1] * weight[l - 1];
  }
  return level[slots];
}

double ito_iterated(const std::vector<SampledIntegrand>& factors, Window w, const WienerPath& path) {
  Composition ones;
  ones.parts.assign(factors.size(), 1);
  return ito_iterated(factors, w, path, ones);
}

double strat_via_ito_decomposition(const std::vector<SampledIntegrand>& factors, Window w,
                                   const WienerPath& path) {
  check_factors(factors, w, path);
  const int n = static_cast<int>(factors.size());
  double total = 0.0;
  for (int k = (n + 1) / 2; k <= n; ++k) {
    const double scale = std::ldexp(1.0, -(n - k));
    for (const auto& nu : compositions(n, k)) total += scale * ito_iterated(factors, w, path, nu);
  }
  return total;
}

double hat_B(std::size_t n, std::size_t j, Window w, const IndexTuple& tuple, const WienerPath& path,
             const CellAveragedKernel& kbar) {
  check_level(n, w, path, kbar);
  if (j < 1 || j > n) throw std::invalid_argument("valley index j must satisfy 1 <= j <= n");
  if (tuple.size() != n) throw std::invalid_argument("index tuple length differs from the level");
  for (std::size_t c : tuple)
    if (c >= path.dim()) throw std::invalid_argument("index tuple component beyond path dimension");
  if (w.s == w.t) return 0.0;
  const auto rows = valley_rows<quad>(n, j, w, kbar);
  quad total = 0;
  for (const auto& piece : valley_interleavings(n, j)) {
    std::vector<std::span<const quad>> slot_rows;
    std::vector<std::size_t> comps;
    for (std::size_t coord : piece.order) {
      slot_rows.emplace_back(rows[coord]);
      comps.push_back(tuple[coord]);
    }
    total += plpc_scalar<quad>(slot_rows, comps, Window{0, w.t}, path);
  }
  return static_cast<double>(valley_sign(j) * total);
}

std::vector<double> hat_B_tensor(std::size_t n, std::size_t j, Window w, const WienerPath& path,
                                 const CellAveragedKernel& kbar, Accumulation acc) {
  check_level(n, w, path, kbar);
  if (j < 1 || j > n) throw std::invalid_argument("valley index j must satisfy 1 <= j <= n");
  return level_tensor(acc, n, j, j, w, path, kbar);
}

double level_B(std::size_t n, Window w, const IndexTuple& tuple, const WienerPath& path,
               const CellAveragedKernel& kbar) {
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += hat_B(n, j, w, tuple, path, kbar);
  return total;
}

std::vector<double> level_B_tensor(std::size_t n, Window w, const WienerPath& path, const CellAveragedKernel& kbar,
                                   Accumulation acc) {
  check_level(n, w, path, kbar);
  return level_tensor(acc, n, 1, n, w, path, kbar);
}

// ---------------------------------------------------------------------------

RoughPathStack::RoughPathStack(Grid grid, StackProvenance provenance, std::size_t n_max)
    : grid_(grid), provenance_(std::move(provenance)), n_max_(n_max) {
  if (n_max_ < 1) throw std::invalid_argument("stack needs at least level 1");
  if (provenance_.dim < 1) throw std::invalid_argument("stack needs a positive dimension");
}

void RoughPathStack::set(Window w, std::size_t n, std::vector<double> values) {
  check_window(grid_, w);
  if (n < 1 || n > n_max_) throw std::out_of_range("stack level out of range");
  if (values.size() != ipow(provenance_.dim, n)) throw std::invalid_argument("stack level has the wrong width");
  auto& levels = levels_[w];
  levels.resize(n_max_);
  levels[n - 1] = std::move(values);
}

bool RoughPathStack::contains(Window w, std::size_t n) const {
  const auto it = levels_.find(w);
  return it != levels_.end() && n >= 1 && n <= n_max_ && !it->second[n - 1].empty();
}

std::span<const double> RoughPathStack::level(Window w, std::size_t n) const {
  if (!contains(w, n))
    throw std::out_of_range("stack lacks level " + std::to_string(n) + " on window (" + std::to_string(w.s) + "," +
                            std::to_string(w.t) + ")");
  return levels_.at(w)[n - 1];
}

double RoughPathStack::value(Window w, const IndexTuple& tuple) const {
  return level(w, tuple.size())[tuple_rank(tuple, provenance_.dim)];
}

std::vector<Window> RoughPathStack::windows() const {
  std::vector<Window> out;
  out.reserve(levels_.size());
  for (const auto& [w, _] : levels_) out.push_back(w);
  return out;
}

void RoughPathStack::write_csv(std::ostream& out) const {
  const auto& p = provenance_;
  out << std::setprecision(17);
  out << "# kind=rough-path-stack\n# seed=" << p.seed << "\n# N=" << p.cells << "\n# T=" << p.horizon
      << "\n# H=" << p.hurst << "\n# d=" << p.dim << "\n# n_max=" << n_max_ << "\n# refinements=" << p.refinements
      << "\n# scheme=" << p.scheme << "\n# c_H=" << p.c_h << "\n# version=" << p.version << '\n';
  out << "n,ks,kt,s,t";
  for (std::size_t a = 1; a <= n_max_; ++a) out << ",i" << a;
  out << ",value\n";
  for (std::size_t n = 1; n <= n_max_; ++n) {
    const auto tuples = all_tuples(p.dim, n);
    for (const auto& [w, levels] : levels_) {
      if (levels[n - 1].empty()) continue;
      for (std::size_t q = 0; q < tuples.size(); ++q) {
        out << n << ',' << w.s << ',' << w.t << ',' << grid_.point(w.s) << ',' << grid_.point(w.t);
        for (std::size_t a = 0; a < n_max_; ++a) {
          out << ',';
          if (a < n) out << tuples[q][a] + 1;
        }
        out << ',' << levels[n - 1][q] << '\n';
      }
    }
  }
}

void RoughPathStack::write_json(std::ostream& out) const {
  const auto& p = provenance_;
  nlohmann::json j;
  j["provenance"] = {{"seed", p.seed},   {"N", p.cells},         {"T", p.horizon},
                     {"H", p.hurst},     {"d", p.dim},           {"n_max", n_max_},
                     {"scheme", p.scheme}, {"c_H", p.c_h},       {"refinements", p.refinements},
                     {"version", p.version}};
  j["windows"] = nlohmann::json::array();
  for (const auto& [w, levels] : levels_) {
    nlohmann::json entry{{"ks", w.s}, {"kt", w.t}, {"s", grid_.point(w.s)}, {"t", grid_.point(w.t)}};
    entry["levels"] = nlohmann::json::array();
    for (const auto& lv : levels) entry["levels"].push_back(lv);
    j["windows"].push_back(std::move(entry));
  }
  out << j.dump(1) << '\n';
}

RoughPathStack RoughPathStack::read_json(std::istream& in) {
  const auto j = nlohmann::json::parse(in);
  const auto& p = j.at("provenance");
  StackProvenance prov;
  prov.seed = p.at("seed").get<std::uint64_t>();
  prov.cells = p.at("N").get<std::size_t>();
  prov.horizon = p.at("T").get<double>();
  prov.hurst = p.at("H").get<double>();
  prov.dim = p.at("d").get<std::size_t>();
  prov.scheme = p.at("scheme").get<std::string>();
  prov.c_h = p.at("c_H").get<double>();
  prov.refinements = p.at("refinements").get<std::size_t>();
  prov.version = p.at("version").get<std::string>();
  RoughPathStack stack(Grid(prov.horizon, prov.cells), prov, p.at("n_max").get<std::size_t>());
  for (const auto& entry : j.at("windows")) {
    const Window w{entry.at("ks").get<std::size_t>(), entry.at("kt").get<std::size_t>()};
    const auto& levels = entry.at("levels");
    for (std::size_t n = 1; n <= levels.size(); ++n)
      if (!levels[n - 1].empty()) stack.set(w, n, levels[n - 1].get<std::vector<double>>());
  }
  return stack;
}

RoughPathStack build_stack(std::size_t n_max, const std::vector<Window>& windows, const WienerPath& path,
                           const CellAveragedKernel& kbar, const StackOptions& options) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (n_max > options.level_guard)
    throw std::invalid_argument("n_max = " + std::to_string(n_max) + " exceeds the level guard " +
                                std::to_string(options.level_guard));
  for (auto w : windows) check_level(n_max, w, path, kbar);

  StackProvenance prov;
  prov.seed = path.seed();
  prov.cells = path.grid().cells();
  prov.horizon = path.grid().horizon();
  prov.hurst = kbar.key().hurst;
  prov.c_h = kbar.key().normalization;
  prov.dim = path.dim();
  prov.refinements = path.refinements();
  prov.version = kToolVersion;
  RoughPathStack stack(path.grid(), prov, n_max);

  const FbmPath fbm = synthesize_fbm(path, kbar);
  std::vector<std::vector<std::vector<double>>> results(windows.size());
  parallel_for(windows.size(), options.threads, [&](std::size_t idx) {
    const Window w = windows[idx];
    auto& levels = results[idx];
    levels.resize(n_max);
    levels[0].resize(path.dim());
    for (std::size_t i = 0; i < path.dim(); ++i) levels[0][i] = fbm.value(w.t, i) - fbm.value(w.s, i);
    for (std::size_t n = 2; n <= n_max; ++n) levels[n - 1] = level_B_tensor(n, w, path, kbar, options.accumulation);
  });
  for (std::size_t idx = 0; idx < windows.size(); ++idx)
    for (std::size_t n = 1; n <= n_max; ++n) stack.set(windows[idx], n, std::move(results[idx][n - 1]));
  return stack;
}

std::vector<Window> all_windows(const Grid& grid) {
  std::vector<Window> out;
  for (std::size_t s = 0; s <= grid.cells(); ++s)
    for (std::size_t t = s; t <= grid.cells(); ++t) out.push_back({s, t});
  return out;
}

}  // namespace rfbm
