// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Tolerances are fixed here and not configurable.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "roughfbm/rng.hpp"
#include "roughfbm/verify.hpp"

using namespace rfbm;

namespace {

const std::string kCache = RFBM_TEST_CACHE;

constexpr double kCovarianceTol = 1e-3;
constexpr double kVarianceSigmas = 3.0;
constexpr double kOracleTol = 1e-10;
constexpr double kIdentityTol = 1e-9;
constexpr double kSlopeTolPerLevel = 0.05;
constexpr double kHolderFactor = 0.8;
constexpr double kControlFactor = 1.1;

std::size_t threads() { return std::max(1u, std::thread::hardware_concurrency()); }

CellAveragedKernel table(double h, std::size_t cells) {
  return cached_cell_averages(FbmKernel(HurstParam(h)), Grid(1.0, cells), kCache, threads());
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s %-14s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
  failures += o.pass ? 0 : 1;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome covariance() {
  Outcome o;
  double worst = 0;
  for (double h : {0.1, 0.25, 0.4}) {
    const FbmKernel k{HurstParam(h)};
    for (auto [s, t] : covariance_probe_pairs()) {
      const double e = covariance_check(k, s, t).abs_error;
      worst = std::max(worst, e);
      o.pass = o.pass && e <= kCovarianceTol;
    }
  }
  o.detail = fmt("15 probes, worst |error| %.2e", worst) + fmt(" <= %.0e", kCovarianceTol);
  return o;
}

// E (B_t - B_s)^2 = (t - s)^{2H} over 5000 independent paths.
Outcome variance_law() {
  Outcome o;
  const std::size_t cells = 512, samples = 5000;
  const std::vector<std::pair<std::size_t, std::size_t>> windows{{0, 512}, {256, 512}, {384, 448}};
  double worst = 0;
  for (double h : {0.25, 0.3, 0.4}) {
    const auto kbar = table(h, cells);
    const Grid grid(1.0, cells);
    std::vector<std::vector<double>> sq(windows.size(), std::vector<double>(samples));
    for (std::size_t p = 0; p < samples; ++p) {
      const auto path = sample_wiener(grid, 1, derive_seed(1001, p));
      for (std::size_t w = 0; w < windows.size(); ++w) {
        const double d = fbm_value(path, kbar, windows[w].second, 0) - fbm_value(path, kbar, windows[w].first, 0);
        sq[w][p] = d * d;
      }
    }
    for (std::size_t w = 0; w < windows.size(); ++w) {
      const auto m = mean_estimate(sq[w]);
      const double target = std::pow(grid.point(windows[w].second) - grid.point(windows[w].first), 2 * h);
      const double z = std::abs(m.mean - target) / m.std_error;
      worst = std::max(worst, z);
      o.pass = o.pass && z <= kVarianceSigmas;
    }
  }
  o.detail = fmt("H in {0.25,0.3,0.4}, 3 windows, worst deviation %.2f SE", worst) + fmt(" <= %.0f", kVarianceSigmas);
  return o;
}

// PLPC recursion against the direct sum over cell multi-indices.
Outcome oracle() {
  Outcome o;
  std::mt19937_64 gen(2024);
  double worst = 0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t cells = std::size_t{4} << (gen() % 4);  // 4..32
    const std::size_t n = 1 + gen() % 3;
    const std::size_t dim = 1 + gen() % 3;
    const auto path = sample_wiener(Grid(1.0, cells), dim, derive_seed(7, c));
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    std::vector<SampledIntegrand> factors(n);
    for (auto& f : factors) {
      f.values.resize(cells);
      for (auto& v : f.values) v = val(gen);
      f.component = gen() % dim;
    }
    std::size_t s = gen() % (cells + 1), t = gen() % (cells + 1);
    if (s > t) std::swap(s, t);
    const double a = simplex_strat_plpc(factors, Window{s, t}, path);
    const double b = brute_force_oracle(factors, Window{s, t}, path);
    const double rel = std::abs(a - b) / std::max(1.0, std::abs(b));
    worst = std::max(worst, rel);
    o.pass = o.pass && rel <= kOracleTol;
  }
  o.detail = fmt("100 configurations, worst relative gap %.2e", worst) + fmt(" <= %.0e", kOracleTol);
  return o;
}

Outcome chen() {
  Outcome o;
  const std::size_t cells = 64;
  std::mt19937_64 gen(99);
  std::vector<std::array<std::size_t, 3>> triples;
  while (triples.size() < 20) {
    std::array<std::size_t, 3> p{gen() % (cells + 1), gen() % (cells + 1), gen() % (cells + 1)};
    std::sort(p.begin(), p.end());
    if (p[0] < p[1] && p[1] < p[2]) triples.push_back(p);
  }
  std::vector<Window> windows;
  for (auto [s, u, t] : triples)
    for (Window w : {Window{s, u}, Window{u, t}, Window{s, t}}) windows.push_back(w);
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());

  double worst = 0;
  std::size_t checks = 0;
  for (double h : {0.3, 0.4}) {
    const std::size_t n_max = std::min<std::size_t>(3, HurstParam(h).level_cap());
    const auto kbar = table(h, cells);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto path = sample_wiener(Grid(1.0, cells), 2, derive_seed(555, seed));
      const auto stack = build_stack(n_max, windows, path, kbar);
      for (auto [s, u, t] : triples)
        for (std::size_t n = 2; n <= n_max; ++n)
          for (const auto& tuple : all_tuples(2, n)) {
            const auto r = chen_defect(stack, s, u, t, tuple, kIdentityTol);
            worst = std::max(worst, r.relative);
            o.pass = o.pass && r.pass;
            ++checks;
          }
    }
  }
  o.detail = std::to_string(checks) + " checks (n=3 only where floor(1/H) >= 3)" +
             fmt(", worst relative defect %.2e", worst) + fmt(" <= %.0e", kIdentityTol);
  return o;
}

Outcome shuffle() {
  Outcome o;
  const std::size_t cells = 64;
  const std::vector<Window> windows{{0, 64}, {10, 50}, {31, 33}, {5, 6}};
  double worst = 0;
  std::size_t checks = 0;
  for (double h : {0.25, 0.3}) {
    const auto kbar = table(h, cells);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto stack = build_stack(3, windows, sample_wiener(Grid(1.0, cells), 2, derive_seed(777, seed)), kbar);
      for (Window w : windows)
        for (auto [n, m] : {std::pair{1, 1}, {1, 2}, {2, 1}})
          for (const auto& a : all_tuples(2, n))
            for (const auto& b : all_tuples(2, m)) {
              const auto r = shuffle_defect(stack, w.s, w.t, a, b, kIdentityTol);
              worst = std::max(worst, r.relative);
              o.pass = o.pass && r.pass;
              ++checks;
            }
    }
  }
  o.detail = std::to_string(checks) + " checks incl. repeated indices" + fmt(", worst relative defect %.2e", worst) +
             fmt(" <= %.0e", kIdentityTol);
  return o;
}

Outcome ito() {
  Outcome o;
  const double h = 0.3;
  const std::vector<std::size_t> cells{128, 256, 512};
  std::vector<CellAveragedKernel> tables;
  for (std::size_t c : cells) tables.push_back(table(h, c));
  for (std::size_t n : {2, 3}) {
    ItoStratConfig cfg;
    cfg.level = n;
    cfg.hurst = h;
    cfg.cells = cells;
    cfg.samples = 200;
    cfg.threads = threads();
    const auto r = ito_strat_study(cfg, {&tables[0], &tables[1], &tables[2]});
    o.pass = o.pass && r.decreasing;
    o.detail += "n=" + std::to_string(n) + " rms";
    for (double x : r.rms) o.detail += fmt(" %.3e", x);
    o.detail += n == 2 ? "; " : "";
  }
  return o;
}

Outcome scaling() {
  Outcome o;
  const std::size_t cells = 512;
  for (double h : {0.25, 0.3, 0.4}) {
    const auto kbar = table(h, cells);
    for (std::size_t n = 1; n <= std::min<std::size_t>(3, HurstParam(h).level_cap()); ++n) {
      ScalingConfig cfg;
      cfg.level = n;
      cfg.hurst = h;
      cfg.cells = cells;
      cfg.samples = n == 1 ? 5000 : n == 2 ? 2000 : 1000;
      cfg.seed = 4242;
      cfg.threads = threads();
      cfg.slope_tolerance = kSlopeTolPerLevel * static_cast<double>(n);
      const auto r = scaling_study(cfg, kbar);
      o.pass = o.pass && r.pass;
      char buf[96];
      std::snprintf(buf, sizeof buf, "%sH=%.2g n=%zu %.3f/%.2f", o.detail.empty() ? "" : "; ", h, n, r.slope,
                    r.expected_slope);
      o.detail += buf;
    }
  }
  return o;
}

Outcome holder() {
  Outcome o;
  const std::size_t coarse = 128;
  for (double h : {0.3, 0.4}) {
    const auto kc = table(h, coarse);
    const auto kf = table(h, 2 * coarse);
    for (std::size_t n = 1; n <= 2; ++n) {
      HolderConfig cfg;
      cfg.level = n;
      cfg.hurst = h;
      cfg.gamma = kHolderFactor * h;
      cfg.control_gamma = kControlFactor * h;
      cfg.coarse_cells = coarse;
      cfg.seeds.clear();
      for (std::uint64_t i = 0; i < 10; ++i) cfg.seeds.push_back(derive_seed(31337, i));
      cfg.threads = threads();
      const auto r = holder_study(cfg, kc, kf);
      o.pass = o.pass && r.pass();
      int growing = 0;
      for (const auto& s : r.seeds) growing += s.control_ratio() > 1.0;
      char buf[160];
      std::snprintf(buf, sizeof buf, "%sH=%.2g n=%zu ratio %.3f control %.3f (%d/10 up%s)", o.detail.empty() ? "" : "; ",
                    h, n, r.mean_norm_ratio, r.mean_control_ratio, growing,
                    r.control_exceeds_main ? "" : ", not above main");
      o.detail += buf;
    }
  }
  return o;
}

Outcome lemmas() {
  Outcome o;
  double worst_k2 = 0, worst_ist = 0, worst_beta = 0;
  std::size_t probes = 0;
  const LemmaBounds bounds;
  for (double h : {0.1, 0.25, 0.4}) {
    for (const auto& p : lemma_sweep(FbmKernel(HurstParam(h)), bounds)) {
      o.pass = o.pass && p.pass && std::isfinite(p.ratio);
      double& w = p.lemma == "int_K2" ? worst_k2 : p.lemma == "Ist" ? worst_ist : worst_beta;
      w = std::max(w, p.ratio);
      ++probes;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu probes, max ratios %.3f/%.3f/%.3f vs bounds %.2f/%.2f/%.1f", probes, worst_k2,
                worst_ist, worst_beta, bounds.int_k2, bounds.ist, bounds.beta_a);
  o.detail = buf;
  return o;
}

}  // namespace

int main() {
  criterion("covariance", covariance);
  criterion("variance-law", variance_law);
  criterion("oracle", oracle);
  criterion("chen", chen);
  criterion("shuffle", shuffle);
  criterion("ito", ito);
  criterion("scaling", scaling);
  criterion("holder", holder);
  criterion("lemmas", lemmas);
  std::printf("%s: %d of 9 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
