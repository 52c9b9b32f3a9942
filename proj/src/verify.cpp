#include "roughfbm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "roughfbm/parallel.hpp"
#include "roughfbm/rng.hpp"
#include "roughfbm/wiener.hpp"

namespace rfbm {

namespace {

// B_tt vanishes, so degenerate windows need no stack entry.
double stack_value(const RoughPathStack& stack, std::size_t s, std::size_t t, const IndexTuple& tuple) {
  if (s == t) return 0.0;
  return stack.value(Window{s, t}, tuple);
}

DefectReport finish(DefectReport r, double tol, double floor) {
  r.relative = std::fabs(r.defect) / std::max(r.scale, floor);
  r.pass = r.relative <= tol;
  return r;
}

void check_kernel_grid(const CellAveragedKernel& kbar, const Grid& grid, double hurst) {
  if (!(kbar.grid() == grid)) throw std::invalid_argument("kernel table does not match the study grid");
  if (kbar.key().hurst != hurst) throw std::invalid_argument("kernel table built for a different H");
}

std::size_t cells_for(const Grid& grid, double length) {
  const double ratio = length / grid.step();
  const double rounded = std::round(ratio);
  if (rounded < 1 || std::fabs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("window length is not a positive multiple of the grid step");
  return static_cast<std::size_t>(rounded);
}

double frobenius_square(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

}  // namespace

DefectReport chen_defect(const RoughPathStack& stack, std::size_t s, std::size_t u, std::size_t t,
                         const IndexTuple& tuple, double tol, double floor) {
  if (!(s <= u && u <= t)) throw std::invalid_argument("Chen defect needs s <= u <= t");
  if (tuple.empty()) throw std::invalid_argument("Chen defect needs a non-empty tuple");
  DefectReport r;
  r.identity = "chen";
  r.points = {s, u, t};
  r.left = tuple;
  const double st = stack_value(stack, s, t, tuple);
  const double su = stack_value(stack, s, u, tuple);
  const double ut = stack_value(stack, u, t, tuple);
  r.defect = st - su - ut;
  r.scale = std::max({std::fabs(st), std::fabs(su), std::fabs(ut)});
  for (std::size_t n1 = 1; n1 < tuple.size(); ++n1) {
    const IndexTuple head(tuple.begin(), tuple.begin() + static_cast<std::ptrdiff_t>(n1));
    const IndexTuple tail(tuple.begin() + static_cast<std::ptrdiff_t>(n1), tuple.end());
    const double term = stack_value(stack, s, u, head) * stack_value(stack, u, t, tail);
    r.defect -= term;
    r.scale = std::max(r.scale, std::fabs(term));
  }
  return finish(std::move(r), tol, floor);
}

DefectReport shuffle_defect(const RoughPathStack& stack, std::size_t s, std::size_t t, const IndexTuple& a,
                            const IndexTuple& b, double tol, double floor) {
  if (s > t) throw std::invalid_argument("shuffle defect needs s <= t");
  if (a.empty() || b.empty()) throw std::invalid_argument("shuffle defect needs non-empty tuples");
  DefectReport r;
  r.identity = "shuffle";
  r.points = {s, t};
  r.left = a;
  r.right = b;
  const double product = stack_value(stack, s, t, a) * stack_value(stack, s, t, b);
  r.defect = product;
  r.scale = std::fabs(product);
  for (const auto& c : shuffles(a, b)) {
    const double term = stack_value(stack, s, t, c);
    r.defect -= term;
    r.scale = std::max(r.scale, std::fabs(term));
  }
  return finish(std::move(r), tol, floor);
}

MeanEstimate mean_estimate(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("mean estimate needs at least two samples");
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1) / n)};
}

LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& sigma) {
  if (x.size() != y.size() || x.size() != sigma.size() || x.size() < 2)
    throw std::invalid_argument("line fit needs at least two matching points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
  }
  const double xm = sx / sw, ym = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sxx += w * (x[i] - xm) * (x[i] - xm);
    sxy += w * (x[i] - xm) * (y[i] - ym);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  fit.slope_std_error = std::sqrt(1.0 / sxx);
  return fit;
}

ScalingReport scaling_study(const ScalingConfig& config, const CellAveragedKernel& kbar) {
  const Grid grid(config.horizon, config.cells);
  check_kernel_grid(kbar, grid, config.hurst);
  const std::size_t n = config.level;
  if (n < 1 || n > HurstParam(config.hurst).level_cap())
    throw std::invalid_argument("scaling level must lie in 1..floor(1/H)");
  if (config.samples < 100) throw std::invalid_argument("scaling study needs at least 100 samples");
  const auto& sizes = config.window_sizes;
  if (sizes.size() < 2) throw std::invalid_argument("scaling study needs at least two window sizes");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (!(sizes[i] < sizes[i - 1])) throw std::invalid_argument("window sizes must be strictly decreasing");
  if (sizes.front() / sizes.back() < 8.0 - 1e-12) throw std::invalid_argument("window sizes must span 3 octaves");
  std::vector<Window> windows;
  for (double h : sizes) {
    const std::size_t c = cells_for(grid, h);
    if (c > grid.cells()) throw std::invalid_argument("window longer than the horizon");
    windows.push_back({grid.cells() - c, grid.cells()});
  }

  std::vector<std::vector<double>> per_sample(config.samples, std::vector<double>(windows.size()));
  parallel_for(config.samples, config.threads, [&](std::size_t i) {
    const WienerPath path = sample_wiener(grid, config.dim, derive_seed(config.seed, i));
    for (std::size_t w = 0; w < windows.size(); ++w) {
      if (n == 1) {
        double acc = 0.0;
        for (std::size_t c = 0; c < config.dim; ++c) {
          const double inc =
              fbm_value(path, kbar, windows[w].t, c) - fbm_value(path, kbar, windows[w].s, c);
          acc += inc * inc;
        }
        per_sample[i][w] = acc;
      } else {
        per_sample[i][w] = frobenius_square(level_B_tensor(n, windows[w], path, kbar, Accumulation::extended));
      }
    }
  });

  ScalingReport r;
  r.level = n;
  r.hurst = config.hurst;
  r.samples = config.samples;
  r.window_sizes = sizes;
  r.expected_slope = 2.0 * static_cast<double>(n) * config.hurst;
  r.tolerance = config.slope_tolerance;
  std::vector<double> x, y, sigma;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    std::vector<double> column(config.samples);
    for (std::size_t i = 0; i < config.samples; ++i) column[i] = per_sample[i][w];
    const auto est = mean_estimate(column);
    r.moments.push_back(est);
    x.push_back(std::log(sizes[w]));
    y.push_back(std::log(est.mean));
    sigma.push_back(est.std_error / est.mean);
  }
  const auto fit = weighted_line_fit(x, y, sigma);
  r.slope = fit.slope;
  r.slope_half_width = 1.96 * fit.slope_std_error;
  r.pass = std::fabs(r.slope - r.expected_slope) <= r.tolerance;
  return r;
}

int grr_order(std::size_t level, double hurst, double gamma) {
  if (!(gamma < hurst)) throw std::invalid_argument("GRR order needs gamma < H");
  const double gap = static_cast<double>(level) * (hurst - gamma);
  return static_cast<int>(std::floor(2.0 / gap)) + 1;
}

Increment2 stack_level_increment(const RoughPathStack& stack, std::size_t n) {
  const Grid& grid = stack.grid();
  Increment2 out(grid, Shape(n, stack.dim()));
  for (std::size_t s = 0; s < grid.points(); ++s)
    for (std::size_t t = s + 1; t < grid.points(); ++t) {
      const auto v = stack.level(Window{s, t}, n);
      std::copy(v.begin(), v.end(), out.at(s, t).begin());
    }
  return out;
}

HolderReport holder_study(const HolderConfig& config, const CellAveragedKernel& coarse,
                          const CellAveragedKernel& fine) {
  if (!(config.gamma < config.hurst)) throw std::invalid_argument("Hölder exponent gamma must be below H");
  if (!(config.control_gamma > config.gamma)) throw std::invalid_argument("control exponent must exceed gamma");
  const Grid coarse_grid(config.horizon, config.coarse_cells);
  const Grid fine_grid(config.horizon, 2 * config.coarse_cells);
  check_kernel_grid(coarse, coarse_grid, config.hurst);
  check_kernel_grid(fine, fine_grid, config.hurst);
  if (config.seeds.empty()) throw std::invalid_argument("Hölder study needs at least one seed");

  const std::size_t n = config.level;
  const double nd = static_cast<double>(n);
  const HolderExponent mu(nd * config.gamma);
  const HolderExponent control(nd * config.control_gamma);
  HolderReport r;
  r.level = n;
  r.hurst = config.hurst;
  r.gamma = config.gamma;
  r.control_gamma = config.control_gamma;
  r.grr_p = grr_order(n, config.hurst, config.gamma);
  r.coarse_cells = config.coarse_cells;

  StackOptions options;
  options.threads = config.threads;
  options.accumulation = Accumulation::extended;
  for (std::uint64_t seed : config.seeds) {
    const WienerPath coarse_path = sample_wiener(coarse_grid, config.dim, seed);
    const WienerPath fine_path = coarse_path.refine();
    const auto bc = stack_level_increment(build_stack(n, all_windows(coarse_grid), coarse_path, coarse, options), n);
    const auto bf = stack_level_increment(build_stack(n, all_windows(fine_grid), fine_path, fine, options), n);
    HolderSeedResult s;
    s.seed = seed;
    s.norm_coarse = holder_norm2(bc, mu);
    s.norm_fine = holder_norm2(bf, mu);
    s.grr_coarse = grr_estimate(bc, mu, r.grr_p);
    s.grr_fine = grr_estimate(bf, mu, r.grr_p);
    s.control_coarse = holder_norm2(bc, control);
    s.control_fine = holder_norm2(bf, control);
    r.seeds.push_back(s);
  }

  const double f = config.stability_factor;
  auto within = [f](double ratio) { return ratio <= f && ratio >= 1.0 / f; };
  r.stable = true;
  double control_sum = 0.0, norm_sum = 0.0;
  for (const auto& s : r.seeds) {
    r.stable = r.stable && within(s.norm_ratio()) && within(s.grr_ratio());
    control_sum += s.control_ratio();
    norm_sum += s.norm_ratio();
  }
  r.mean_control_ratio = control_sum / static_cast<double>(r.seeds.size());
  r.mean_norm_ratio = norm_sum / static_cast<double>(r.seeds.size());
  r.control_grows = r.mean_control_ratio > 1.0;
  r.control_exceeds_main = r.mean_control_ratio > r.mean_norm_ratio;
  return r;
}

ItoStratReport ito_strat_study(const ItoStratConfig& config, const std::vector<const CellAveragedKernel*>& kbars) {
  if (config.cells.empty() || kbars.size() != config.cells.size())
    throw std::invalid_argument("one kernel table per resolution is required");
  for (std::size_t r = 1; r < config.cells.size(); ++r)
    if (config.cells[r] != 2 * config.cells[r - 1]) throw std::invalid_argument("resolutions must double");
  for (std::size_t r = 0; r < kbars.size(); ++r)
    check_kernel_grid(*kbars[r], Grid(config.horizon, config.cells[r]), config.hurst);
  const std::size_t n = config.level;
  if (n < 1 || n > HurstParam(config.hurst).level_cap())
    throw std::invalid_argument("level must lie in 1..floor(1/H)");

  // Slot factors of the single valley piece of hat B^{n,1} on (T/2, T).
  std::vector<std::vector<SampledIntegrand>> factors(kbars.size());
  for (std::size_t r = 0; r < kbars.size(); ++r) {
    const std::size_t cells = config.cells[r];
    const Window w{cells / 2, cells};
    factors[r].push_back({delta_kernel_factor(*kbars[r], w), config.component});
    for (std::size_t c = 1; c < n; ++c) factors[r].push_back({kernel_factor(*kbars[r], cells), config.component});
  }

  const Grid base(config.horizon, config.cells.front());
  std::vector<std::vector<double>> diff(config.samples, std::vector<double>(kbars.size()));
  parallel_for(config.samples, config.threads, [&](std::size_t i) {
    WienerPath path = sample_wiener(base, config.component + 1, derive_seed(config.seed, i));
    for (std::size_t r = 0; r < kbars.size(); ++r) {
      if (r > 0) path = path.refine();
      const Window whole{0, path.grid().cells()};
      diff[i][r] = strat_via_ito_decomposition(factors[r], whole, path) - simplex_strat_plpc(factors[r], whole, path);
    }
  });

  ItoStratReport rep;
  rep.level = n;
  rep.hurst = config.hurst;
  rep.cells = config.cells;
  for (std::size_t r = 0; r < kbars.size(); ++r) {
    double ss = 0.0;
    for (std::size_t i = 0; i < config.samples; ++i) ss += diff[i][r] * diff[i][r];
    rep.rms.push_back(std::sqrt(ss / static_cast<double>(config.samples)));
  }
  rep.decreasing = true;
  for (std::size_t r = 1; r < rep.rms.size(); ++r) rep.decreasing = rep.decreasing && rep.rms[r] < rep.rms[r - 1];
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json tuple_json(const IndexTuple& t) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t c : t) j.push_back(c + 1);
  return j;
}

}  // namespace

std::string to_json(const DefectReport& r) {
  nlohmann::json j{{"identity", r.identity}, {"points", r.points},     {"left", tuple_json(r.left)},
                   {"defect", r.defect},     {"scale", r.scale},       {"relative", r.relative},
                   {"pass", r.pass}};
  if (!r.right.empty()) j["right"] = tuple_json(r.right);
  return j.dump();
}

std::string to_json(const ScalingReport& r) {
  nlohmann::json j{{"level", r.level},
                   {"H", r.hurst},
                   {"samples", r.samples},
                   {"window_sizes", r.window_sizes},
                   {"slope", r.slope},
                   {"slope_half_width_95", r.slope_half_width},
                   {"expected_slope", r.expected_slope},
                   {"tolerance", r.tolerance},
                   {"pass", r.pass}};
  j["moments"] = nlohmann::json::array();
  for (const auto& m : r.moments) j["moments"].push_back({{"mean", m.mean}, {"std_error", m.std_error}});
  return j.dump(1);
}

std::string to_json(const HolderReport& r) {
  nlohmann::json j{{"level", r.level},
                   {"H", r.hurst},
                   {"gamma", r.gamma},
                   {"control_gamma", r.control_gamma},
                   {"grr_p", r.grr_p},
                   {"coarse_N", r.coarse_cells},
                   {"fine_N", 2 * r.coarse_cells},
                   {"mean_norm_ratio", r.mean_norm_ratio},
                   {"mean_control_ratio", r.mean_control_ratio},
                   {"stable", r.stable},
                   {"control_grows", r.control_grows},
                   {"control_exceeds_main", r.control_exceeds_main},
                   {"pass", r.pass()}};
  j["seeds"] = nlohmann::json::array();
  for (const auto& s : r.seeds)
    j["seeds"].push_back({{"seed", s.seed},
                          {"norm_coarse", s.norm_coarse},
                          {"norm_fine", s.norm_fine},
                          {"grr_coarse", s.grr_coarse},
                          {"grr_fine", s.grr_fine},
                          {"control_coarse", s.control_coarse},
                          {"control_fine", s.control_fine}});
  return j.dump(1);
}

std::string to_json(const ItoStratReport& r) {
  nlohmann::json j{{"level", r.level}, {"H", r.hurst}, {"N", r.cells}, {"rms", r.rms}, {"decreasing", r.decreasing}};
  return j.dump(1);
}

void write_csv(std::ostream& out, const ScalingReport& r) {
  out << std::setprecision(17);
  out << "# level=" << r.level << "\n# H=" << r.hurst << "\n# samples=" << r.samples << '\n';
  out << "h,moment,std_error\n";
  for (std::size_t i = 0; i < r.window_sizes.size(); ++i)
    out << r.window_sizes[i] << ',' << r.moments[i].mean << ',' << r.moments[i].std_error << '\n';
}

void write_csv(std::ostream& out, const HolderReport& r) {
  out << std::setprecision(17);
  out << "# level=" << r.level << "\n# H=" << r.hurst << "\n# gamma=" << r.gamma
      << "\n# control_gamma=" << r.control_gamma << "\n# grr_p=" << r.grr_p << '\n';
  out << "seed,norm_coarse,norm_fine,grr_coarse,grr_fine,control_coarse,control_fine\n";
  for (const auto& s : r.seeds)
    out << s.seed << ',' << s.norm_coarse << ',' << s.norm_fine << ',' << s.grr_coarse << ',' << s.grr_fine << ','
        << s.control_coarse << ',' << s.control_fine << '\n';
}

void write_gnuplot(std::ostream& out, const ScalingReport& r, const std::string& csv_name) {
  out << std::setprecision(10);
  out << "set datafile separator ','\n"
      << "set logscale xy\n"
      << "set xlabel 't - s'\n"
      << "set ylabel 'E|B^" << r.level << "_{st}|^2'\n"
      << "set key left top\n"
      << "set title 'level " << r.level << ", H = " << r.hurst << ", fitted slope " << r.slope << "'\n"
      << "f(x) = exp(" << std::log(r.moments.front().mean) << " + " << r.expected_slope << " * (log(x) - "
      << std::log(r.window_sizes.front()) << "))\n"
      << "plot '" << csv_name << "' every ::1 using 1:2:3 with yerrorbars title 'Monte Carlo', \\\n"
      << "     f(x) title 'slope " << r.expected_slope << "'\n";
}

}  // namespace rfbm
