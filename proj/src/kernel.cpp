#include "roughfbm/kernel.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <boost/math/special_functions/beta.hpp>

#include "quadrature.hpp"
#include "roughfbm/parallel.hpp"

namespace rfbm {

namespace {

std::string cell_label(std::size_t k, std::size_t m) {
  return "cell m=" + std::to_string(m) + " of row k=" + std::to_string(k);
}

}  // namespace

HurstParam::HurstParam(double h) : h_(h) {
  if (!(h > 0.0 && h < 0.5)) throw std::invalid_argument("H out of range (0,1/2)");
}

std::size_t HurstParam::level_cap() const {
  // Guard against 1/H landing a hair below an integer, e.g. H = 0.25.
  return static_cast<std::size_t>(std::floor(1.0 / h_ + 1e-12));
}

double kernel_constant(HurstParam h) {
  const double H = h.value();
  return std::sqrt(2.0 * H / ((1.0 - 2.0 * H) * boost::math::beta(1.0 - 2.0 * H, H + 0.5)));
}

double VolterraKernel::delta_eval(double s, double t, double u) const {
  if (s > t) throw std::invalid_argument("delta kernel requires s <= t");
  if (u < 0.0) throw std::invalid_argument("kernel arguments must be non-negative");
  return eval(t, u) - eval(s, u);
}

// ---------------------------------------------------------------------------

FbmKernel::FbmKernel(HurstParam h, double tol_q) : FbmKernel(h, kernel_constant(h), tol_q) {}

FbmKernel::FbmKernel(HurstParam h, double c_h, double tol_q) : h_(h), c_h_(c_h), tol_q_(tol_q) {
  if (!(c_h > 0.0)) throw std::invalid_argument("kernel normalization must be positive");
  if (!(tol_q > 0.0)) throw std::invalid_argument("quadrature tolerance must be positive");
}

// u^{1-2H} \int_u^t v^{H-3/2} (v-u)^{H-1/2} dv. With v = u(1+x) this is
// \int_0^L (1+x)^{H-3/2} x^{H-1/2} dx, L = (t-u)/u, which stays well scaled
// however small u gets: x^{H-1/2} at the origin is absorbed by a power
// substitution and the x^{2H-2} tail is integrated in log x.
double FbmKernel::inner_integral(double span) const {
  const double H = h_.value();
  // Kernel values feed outer quadratures, so they must be resolved well below
  // the outer tolerance.
  const double tol = std::max(1e-4 * tol_q_, 1e-14);
  // Subnormal u overflows gap/u; the integral is then complete.
  if (std::isinf(span)) return boost::math::beta(H + 0.5, 1.0 - 2.0 * H);
  auto f =[&](double x) { return std::pow(1.0 + x, H - 1.5) * std::pow(x, H - 0.5); };
  const double head = std::min(span, 1.0);
  // Accuracy is judged against the first kernel summand expressed in the same
  // units; for u close to t this term dominates.
  const double leading = std::pow(span * (1.0 + span), H - 0.5) / (0.5 - H);
  double total =
      detail::integrate_from_singularity(f, head, H + 0.5, tol, "inner kernel integral, head", tol * leading);
  if (span > 1.0) {
    total += detail::integrate_endpoint(
        [&](double z) {
          // f(e^z) e^z in log form; e^z overflows for tiny u.
          const double log1p_x = z + std::log1p(std::exp(-z));
          return std::exp((H - 1.5) * log1p_x + (H + 0.5) * z);
        },
        0.0, std::log(span), tol, "inner kernel integral, tail", tol * (total + leading));
  }
  return total;
}

double FbmKernel::eval(double t, double u) const {
  if (t < 0.0 || u < 0.0) throw std::invalid_argument("kernel arguments must be non-negative");
  if (!(u > 0.0 && u < t)) return 0.0;
  return eval_split(t, u, t - u);
}

double FbmKernel::eval_gap(double t, double gap) const {
  if (t < 0.0 || gap < 0.0) throw std::invalid_argument("kernel arguments must be non-negative");
  if (!(gap > 0.0 && gap < t)) return 0.0;
  return eval_split(t, t - gap, gap);
}

// Same integral as inner_integral: with w = x/(1+x) it becomes the incomplete
// beta function B(L/(1+L); H+1/2, 1-2H). Past the midpoint the complement is
// evaluated from 1/(1+L) directly to keep precision for large L.
double FbmKernel::inner_integral_beta(double span) const {
  const double a = h_.value() + 0.5;
  const double b = 1.0 - 2.0 * h_.value();
  if (span <= 1.0) return boost::math::beta(a, b, span / (1.0 + span));
  return boost::math::beta(a, b) - boost::math::beta(b, a, 1.0 / (1.0 + span));
}

double FbmKernel::eval_gap_beta(double t, double gap) const {
  if (t < 0.0 || gap < 0.0) throw std::invalid_argument("kernel arguments must be non-negative");
  if (!(gap > 0.0 && gap < t)) return 0.0;
  return eval_split_beta(t, t - gap, gap);
}

double FbmKernel::eval_fast(double t, double u, double gap) const {
  if (!(u > 0.0 && gap > 0.0)) return 0.0;
  return eval_split_beta(t, u, gap);
}

double FbmKernel::eval_split_beta(double t, double u, double gap) const {
  const double H = h_.value();
  const double first = std::pow(u / t, 0.5 - H) * std::pow(gap, H - 0.5);
  const double second = (0.5 - H) * std::pow(u, H - 0.5) * inner_integral_beta(gap / u);
  return c_h_ * (first + second);
}

// gap = t - u, carried separately so it keeps full relative precision.
double FbmKernel::eval_split(double t, double u, double gap) const {
  const double H = h_.value();
  const double first = std::pow(u / t, 0.5 - H) * std::pow(gap, H - 0.5);
  const double second = (0.5 - H) * std::pow(u, H - 0.5) * inner_integral(gap / u);
  return c_h_ * (first + second);
}

double FbmKernel::unit_cell_integral(std::size_t k, std::size_t m) const {
  if (m >= k) return 0.0;
  const double H = h_.value();
  const double alpha = H + 0.5;
  const double t = static_cast<double>(k);
  const double lo = static_cast<double>(m);
  const double hi = lo + 1.0;
  const bool touches_origin = (m == 0);
  const bool touches_diagonal = (m + 1 == k);
  const std::string what = cell_label(k, m);
  auto at_point = [&](double y) { return y > 0.0 && y < t ? eval_split_beta(t, y, t - y) : 0.0; };
  auto at_gap = [&](double gap) { return eval_gap_beta(t, gap); };

  if (!touches_origin && !touches_diagonal)
    return detail::integrate_smooth(at_point, lo, hi, tol_q_, what);

  // Split the cell so each piece carries at most one singular endpoint.
  const double mid = touches_origin && touches_diagonal ? 0.5 * (lo + hi) : (touches_origin ? hi : lo);
  double total = 0.0;
  if (touches_origin) {
    // K(t,y) ~ y^{H-1/2} near the origin.
    total += detail::integrate_from_singularity(at_point, mid, alpha,
                                                tol_q_, what);
  } else {
    total += detail::integrate_smooth(at_point, lo, mid, tol_q_, what);
  }
  if (touches_diagonal) {
    // K(t,y) ~ (t-y)^{H-1/2} near y = t; the gap is passed exactly.
    total += detail::integrate_from_singularity(at_gap, t - mid,
                                                alpha, tol_q_, what);
  } else if (mid < hi) {
    total += detail::integrate_smooth(at_point, mid, hi, tol_q_, what);
  }
  return total;
}

std::vector<double> FbmKernel::cell_average_row(const Grid& grid, std::size_t k) const {
  if (k > grid.cells()) throw std::invalid_argument("row index beyond the grid");
  const double scale = std::pow(grid.step(), h_.value() - 0.5);
  std::vector<double> row(k);
  for (std::size_t m = 0; m < k; ++m) row[m] = scale * unit_cell_integral(k, m);
  return row;
}

// ---------------------------------------------------------------------------

CellAveragedKernel::CellAveragedKernel(Grid grid, Key key, std::vector<std::vector<double>> rows)
    : grid_(grid), key_(std::move(key)), rows_(std::move(rows)) {
  if (rows_.size() != grid_.points()) throw std::invalid_argument("cell-average table needs one row per grid point");
  for (std::size_t k = 0; k < rows_.size(); ++k)
    if (rows_[k].size() != k) throw std::invalid_argument("cell-average row has the wrong length");
}

namespace {

constexpr char kMagic[8] = {'R', 'F', 'B', 'M', 'K', 'B', 'R', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated kernel table");
  return v;
}

}  // namespace

void CellAveragedKernel::save_binary(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(out, key_.cells);
  put(out, key_.horizon);
  put(out, key_.hurst);
  put(out, key_.tol_q);
  put(out, key_.normalization);
  put<std::uint64_t>(out, key_.kernel.size());
  out.write(key_.kernel.data(), static_cast<std::streamsize>(key_.kernel.size()));
  for (const auto& r : rows_)
    out.write(reinterpret_cast<const char*>(r.data()), static_cast<std::streamsize>(r.size() * sizeof(double)));
}

CellAveragedKernel CellAveragedKernel::load_binary(std::istream& in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + sizeof(magic), kMagic)) throw std::runtime_error("not a kernel table");
  Key key;
  key.cells = get<std::uint64_t>(in);
  key.horizon = get<double>(in);
  key.hurst = get<double>(in);
  key.tol_q = get<double>(in);
  key.normalization = get<double>(in);
  key.kernel.resize(get<std::uint64_t>(in));
  in.read(key.kernel.data(), static_cast<std::streamsize>(key.kernel.size()));
  Grid grid(key.horizon, key.cells);
  std::vector<std::vector<double>> rows(grid.points());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].resize(k);
    in.read(reinterpret_cast<char*>(rows[k].data()), static_cast<std::streamsize>(k * sizeof(double)));
  }
  if (!in) throw std::runtime_error("truncated kernel table");
  return CellAveragedKernel(grid, std::move(key), std::move(rows));
}

void CellAveragedKernel::write_csv(std::ostream& out) const {
  out << "# kernel=" << key_.kernel << " N=" << key_.cells << " T=" << key_.horizon << " H=" << key_.hurst
      << " tol_q=" << key_.tol_q << " c_H=" << std::setprecision(17) << key_.normalization << '\n';
  out << "k,m,value\n";
  for (std::size_t k = 0; k < rows_.size(); ++k)
    for (std::size_t m = 0; m < k; ++m) out << k << ',' << m << ',' << rows_[k][m] << '\n';
}

CellAveragedKernel build_cell_averages(const VolterraKernel& kernel, const Grid& grid, std::size_t threads) {
  std::vector<std::vector<double>> rows(grid.points());
  parallel_for(grid.points(), threads, [&](std::size_t k) { rows[k] = kernel.cell_average_row(grid, k); });
  CellAveragedKernel::Key key{grid.cells(), grid.horizon(), kernel.hurst(), kernel.tolerance(),
                              kernel.normalization(), kernel.name()};
  return CellAveragedKernel(grid, std::move(key), std::move(rows));
}

std::string cache_file_name(const CellAveragedKernel::Key& key) {
  std::ostringstream name;
  name << std::setprecision(17) << key.kernel << "_N" << key.cells << "_T" << key.horizon << "_H" << key.hurst
       << "_tol" << key.tol_q << "_c" << key.normalization << ".kbar";
  return name.str();
}

CellAveragedKernel cached_cell_averages(const VolterraKernel& kernel, const Grid& grid, const std::string& cache_dir,
                                        std::size_t threads) {
  if (cache_dir.empty()) return build_cell_averages(kernel, grid, threads);
  const CellAveragedKernel::Key wanted{grid.cells(), grid.horizon(), kernel.hurst(), kernel.tolerance(),
                                       kernel.normalization(), kernel.name()};
  const std::filesystem::path path = std::filesystem::path(cache_dir) / cache_file_name(wanted);
  if (std::ifstream in(path, std::ios::binary); in) {
    try {
      auto table = CellAveragedKernel::load_binary(in);
      if (table.key() == wanted) return table;
    } catch (const std::runtime_error&) {
      // Stale or damaged cache entry; rebuild below.
    }
  }
  auto table = build_cell_averages(kernel, grid, threads);
  std::filesystem::create_directories(cache_dir);
  // Concurrent processes may build the same table; publish by rename so no
  // reader ever sees a partial file.
  std::ostringstream suffix;
  suffix << ".tmp" << ::getpid() << '_' << std::this_thread::get_id();
  const auto scratch = path.string() + suffix.str();
  {
    std::ofstream out(scratch, std::ios::binary);
    table.save_binary(out);
  }
  std::error_code ec;
  std::filesystem::rename(scratch, path, ec);
  if (ec) std::filesystem::remove(scratch, ec);
  return table;
}

// ---------------------------------------------------------------------------

CovarianceCheck covariance_check(const VolterraKernel& kernel, double s, double t) {
  if (!(s > 0.0 && s <= t)) throw std::invalid_argument("covariance check requires 0 < s <= t");
  const double H = kernel.hurst();
  const double tol = kernel.tolerance();
  const double mid = 0.5 * s;
  auto product = [&](double u) { return kernel.eval(t, u) * kernel.eval(s, u); };
  auto product_gap = [&](double gap) { return kernel.eval_gap(t, (t - s) + gap) * kernel.eval_gap(s, gap); };
  // Near u = 0 the product behaves like u^{2H-1}; near u = s the factor
  // K(s,u) ~ (s-u)^{H-1/2}, and when s = t the product ~ (s-u)^{2H-1}.
  double computed = detail::integrate_from_singularity(product, mid, 2.0 * H, tol, "covariance, origin half");
  computed += detail::integrate_from_singularity(product_gap, s - mid, 2.0 * H,
                                                 tol, "covariance, diagonal half");
  const double target = 0.5 * (std::pow(t, 2 * H) + std::pow(s, 2 * H) - std::pow(t - s, 2 * H));
  return {computed, target, std::abs(computed - target)};
}

namespace {

double tail_square_integral(const VolterraKernel& kernel, double v, double t) {
  const double H = kernel.hurst();
  const double tol = kernel.tolerance();
  auto sq_gap = [&](double gap) {
    const double k = kernel.eval_fast(t, t - gap, gap);
    return k * k;
  };
  // K(t,w)^2 ~ (t-w)^{2H-1} at the diagonal and ~ w^{2H-1} at the origin.
  // The origin only matters once v is small; there w = x^{1/(2H)} smooths
  // the lower half.
  if (v >= 0.25 * t) return detail::integrate_from_singularity(sq_gap, t - v, 2.0 * H, tol, "int_v^t K^2");
  const double mid = 0.5 * t;
  double total = detail::integrate_from_singularity(sq_gap, t - mid, 2.0 * H, tol, "int_v^t K^2, upper half");
  const double inv = 1.0 / (2.0 * H);
  auto sq_origin = [&](double x) {
    const double w = std::pow(x, inv);
    const double k = kernel.eval_fast(t, w, t - w);
    return k * k * inv * w / x;
  };
  total += detail::integrate_endpoint(sq_origin, std::pow(v, 2.0 * H), std::pow(mid, 2.0 * H), tol,
                                      "int_v^t K^2, lower half");
  return total;
}

}  // namespace

double lemma_int_K2(const VolterraKernel& kernel, double v, double t) {
  if (!(v > 0.0 && v < t)) throw std::invalid_argument("lemma_int_K2 requires 0 < v < t");
  return tail_square_integral(kernel, v, t) / std::pow(t - v, 2.0 * kernel.hurst());
}

double lemma_Ist(const VolterraKernel& kernel, double s, double t) {
  if (!(s > 0.0 && s < t)) throw std::invalid_argument("lemma_Ist requires 0 < s < t");
  const double H = kernel.hurst();
  const double tol = kernel.tolerance();
  auto tail = [&](double u) { return tail_square_integral(kernel, u, t); };
  auto below = [&](double u) {
    const double d = kernel.eval_fast(t, u, t - u) - kernel.eval_fast(s, u, s - u);
    return d * d * tail(u);
  };
  auto below_gap = [&](double gap) {
    const double d = kernel.eval_fast(t, s - gap, (t - s) + gap) - kernel.eval_fast(s, s - gap, gap);
    return d * d * tail(s - gap);
  };
  // On (0, s) the two kernels share the u^{H-1/2} behaviour at the origin and
  // K(s,u)^2 ~ (s-u)^{2H-1} at the right end.
  const double mid = 0.5 * s;
  double total = detail::integrate_endpoint(below, 0.0, mid, tol, "I_st, (0, s/2)");
  total += detail::integrate_from_singularity(below_gap, s - mid, 2.0 * H, tol,
                                              "I_st, (s/2, s)");
  // On (s, t) only K(t,.) survives; K^2 tail ~ (t-u)^{4H-1}.
  total += detail::integrate_from_singularity(
      [&](double gap) {
        const double k = kernel.eval_fast(t, t - gap, gap);
        return k * k * tail(t - gap);
      },
      t - s, 2.0 * H, tol, "I_st, (s, t)");
  return total / std::pow(t - s, 4.0 * H);
}

double lemma_betaA(HurstParam h, int k_level, double a, double tol_q) {
  const double H = h.value();
  if (k_level < 1) throw std::invalid_argument("lemma_betaA needs k >= 1");
  if (2.0 * k_level * H >= 1.0) throw std::invalid_argument("lemma_betaA requires 2kH < 1");
  if (!(a > 0.0)) throw std::invalid_argument("lemma_betaA requires A > 0");
  const double e = H - 0.5;
  const double tail_power = 2.0 * (k_level - 1) * H;
  // y^e - (1+y)^e = -y^e expm1(e log1p(1/y)), accurate for large y.
  auto gap_term = [&](double y) { return -std::pow(y, e) * std::expm1(e * std::log1p(1.0 / y)); };
  auto integrand = [&](double y, double a_minus_y) {
    return gap_term(y) * (std::pow(y, e) + std::pow(a_minus_y, e)) * std::pow(y, tail_power);
  };
  const double half = 0.5 * a;
  const double head = std::min(half, 1.0);
  // Origin: integrand ~ y^{2kH-1}.
  double total = detail::integrate_from_singularity([&](double y) { return integrand(y, a - y); }, head,
                                                    2.0 * k_level * H, tol_q, "beta_A, origin");
  if (half > head) {
    // Slowly decaying middle stretch; integrate in log y.
    total += detail::integrate_endpoint(
        [&](double z) {
          const double y = std::exp(z);
          return integrand(y, a - y) * y;
        },
        std::log(head), std::log(half), tol_q, "beta_A, middle");
  }
  // Right end: (A-y)^{H-1/2}.
  total += detail::integrate_from_singularity([&](double gap) { return integrand(a - gap, gap); }, a - half, H + 0.5,
                                              tol_q, "beta_A, right end");
  return total;
}

std::vector<std::pair<double, double>> covariance_probe_pairs() {
  return {{0.1, 0.2}, {0.25, 1.0}, {0.5, 0.5}, {0.5, 0.75}, {0.9, 1.0}};
}

std::vector<LemmaProbe> lemma_sweep(const VolterraKernel& kernel, const LemmaBounds& bounds) {
  std::vector<LemmaProbe> out;
  auto add = [&](std::string lemma, int k, double x, double t, double ratio, double bound) {
    out.push_back({std::move(lemma), k, x, t, ratio, bound, std::isfinite(ratio) && ratio <= bound});
  };
  for (double v : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 0.999999})
    add("int_K2", 0, v, 1.0, lemma_int_K2(kernel, v, 1.0), bounds.int_k2);
  for (double s : {0.5, 0.75, 0.875, 0.9375, 0.96875})
    add("Ist", 0, s, 1.0, lemma_Ist(kernel, s, 1.0), bounds.ist);
  const HurstParam h(kernel.hurst());
  for (int k = 1; k <= 4 && 2.0 * k * h.value() < 1.0; ++k)
    for (double a : {1e-3, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4, 1e5})
      add("beta_A", k, a, 0.0, lemma_betaA(h, k, a, kernel.tolerance()), bounds.beta_a);
  return out;
}

}  // namespace rfbm
