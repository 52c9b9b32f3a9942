#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "helpers.hpp"
#include "roughfbm/kernel.hpp"

using namespace rfbm;
using rfbm::test::rel_diff;

namespace {

// Adaptive Simpson in long double with a relative tolerance.
template <class F>
long double simpson(F& f, long double a, long double b, long double fa, long double fm, long double fb,
                    long double whole, long double eps, int depth) {
  const long double m = 0.5L * (a + b);
  const long double lm = 0.5L * (a + m), rm = 0.5L * (m + b);
  const long double flm = f(lm), frm = f(rm);
  const long double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const long double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * eps) return left + right + (left + right - whole) / 15;
  return simpson(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
}

template <class F>
long double adaptive(F f, long double a, long double b, long double rel) {
  const long double fa = f(a), fb = f(b), fm = f(0.5L * (a + b));
  const long double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, rel * std::abs(whole), 30);
}

// z^a sum_n (1-b)_n z^n / (n! (a+n)), the incomplete beta B_z(a, b) for z <= 1/2.
long double beta_series(long double z, long double a, long double b) {
  long double term = 1.0L, sum = 1.0L / a;
  for (int n = 1; n < 400; ++n) {
    term *= (n - b) * z / n;
    sum += term / (a + n);
    if (std::abs(term) < 1e-22L) break;
  }
  return std::pow(z, a) * sum;
}

// Independent reference for K(t,u). With v = u(1+x) and z = x/(1+x) the inner
// integral is u^{2H-1} B_{(t-u)/t}(H+1/2, 1-2H), summed here from its power series.
double kernel_oracle_gap(double hurst, double t, double gap_in) {
  const long double H = hurst, gap = gap_in, u = t - gap, a = H + 0.5L, b = 1 - 2 * H;
  const long double z = gap / t;
  const long double complete = std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  const long double incomplete = z <= 0.5L ? beta_series(z, a, b) : complete - beta_series(u / t, b, a);
  const long double c = std::sqrt(2 * H / (b * complete));
  return static_cast<double>(c * (std::pow(u / t, 0.5L - H) * std::pow(gap, H - 0.5L) +
                                  (0.5L - H) * std::pow(u, H - 0.5L) * incomplete));
}

double kernel_oracle(double hurst, double t, double u) {
  return kernel_oracle_gap(hurst, t, static_cast<double>(static_cast<long double>(t) - u));
}

// Riemann-Liouville kernel c (t-u)^{H-1/2}: a second Volterra kernel with a
// closed-form cell average, used to exercise the pluggable interface.
class RiemannLiouville final : public VolterraKernel {
 public:
  RiemannLiouville(double h, double c) : h_(h), c_(c) {}
  double hurst() const override { return h_; }
  double tolerance() const override { return 1e-10; }
  double eval(double t, double u) const override { return u > 0.0 && u < t ? c_ * std::pow(t - u, h_ - 0.5) : 0.0; }
  double eval_gap(double t, double gap) const override {
    return gap > 0.0 && gap < t ? c_ * std::pow(gap, h_ - 0.5) : 0.0;
  }
  std::vector<double> cell_average_row(const Grid& grid, std::size_t k) const override {
    std::vector<double> row(k);
    const double a = h_ + 0.5, d = grid.step();
    for (std::size_t m = 0; m < k; ++m)
      row[m] = c_ / a * (std::pow((k - m) * d, a) - std::pow((k - m - 1.0) * d, a)) / d;
    return row;
  }
  std::string name() const override { return "riemann-liouville"; }
  double normalization() const override { return c_; }

 private:
  double h_, c_;
};

}  // namespace

TEST_CASE("Hurst parameter range and level cap") {
  for (double bad : {0.0, 0.5, 0.6, -0.1}) {
    CHECK_THROWS_AS(HurstParam{bad}, std::invalid_argument);
    try {
      HurstParam h(bad);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()) == "H out of range (0,1/2)");
    }
  }
  CHECK(HurstParam(0.1).level_cap() == 10);
  CHECK(HurstParam(0.25).level_cap() == 4);
  CHECK(HurstParam(0.3).level_cap() == 3);
  CHECK(HurstParam(0.4).level_cap() == 2);
}

TEST_CASE("kernel constant") {
  // Frozen from a 30-digit evaluation of the Beta-function closed form.
  CHECK(kernel_constant(HurstParam(0.1)) == doctest::Approx(0.357685773422335136).epsilon(1e-14));
  CHECK(kernel_constant(HurstParam(0.25)) == doctest::Approx(0.645998003740751968).epsilon(1e-14));
  CHECK(kernel_constant(HurstParam(0.4)) == doctest::Approx(0.880725683363726880).epsilon(1e-14));
  for (double h = 0.01; h < 0.5; h += 0.01) CHECK(kernel_constant(HurstParam(h)) > 0.0);
}

TEST_CASE("kernel values against the reference") {
  struct Case {
    double h, t, u, value;
  };
  // Values frozen from a 30-digit evaluation of the kernel formula.
  const std::vector<Case> cases{{0.25, 1.0, 0.3, 0.7997646894342298},
                                {0.25, 1.0, 0.9, 1.159100845704951},
                                {0.25, 2.0, 0.5, 0.6764843519709389},
                                {0.25, 1.0, 0.001, 2.233712439772522},
                                {0.3, 1.0, 0.5, 0.8730141143386681}};
  for (const auto& c : cases) {
    const FbmKernel k{HurstParam(c.h)};
    CHECK(rel_diff(kernel_oracle(c.h, c.t, c.u), c.value) < 1e-11);
    CHECK(rel_diff(k.eval(c.t, c.u), c.value) < 1e-12);
    CHECK(rel_diff(k.eval_gap(c.t, c.t - c.u), c.value) < 1e-12);
    CHECK(rel_diff(k.eval_gap_beta(c.t, c.t - c.u), c.value) < 1e-12);
    CHECK(rel_diff(k.eval_fast(c.t, c.u, c.t - c.u), c.value) < 1e-12);
  }
}

TEST_CASE("beta route agrees with quadrature route") {
  for (double h : {0.05, 0.1, 0.25, 0.4, 0.49}) {
    const FbmKernel k{HurstParam(h)};
    for (double t : {0.5, 1.0, 3.0})
      for (double f : {1e-9, 1e-4, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-6}) {
        const double gap = t * f;
        CHECK(rel_diff(k.eval_gap(t, gap), k.eval_gap_beta(t, gap)) < 1e-10);
        CHECK(rel_diff(k.eval_gap(t, gap), kernel_oracle_gap(h, t, gap)) < 1e-11);
      }
  }
}

TEST_CASE("kernel support and positivity") {
  for (double h : {0.1, 0.25, 0.4}) {
    const FbmKernel k{HurstParam(h)};
    CHECK(k.eval(1.0, 0.0) == 0.0);
    CHECK(k.eval(1.0, 1.0) == 0.0);
    CHECK(k.eval(1.0, 1.5) == 0.0);
    CHECK(k.eval(0.0, 0.0) == 0.0);
    CHECK(k.eval_gap(1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(k.eval(1.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(k.eval(-1.0, 0.1), std::invalid_argument);
    for (double t : {0.01, 0.5, 1.0, 10.0})
      for (double f : {1e-12, 1e-6, 0.1, 0.5, 0.9, 1.0 - 1e-9}) CHECK(k.eval(t, f * t) > 0.0);
    // subnormal u: gap/u overflows
    for (double u : {1e-305, 1e-310, 1e-320}) {
      const double v = k.eval(1.0, u);
      CHECK(std::isfinite(v));
      CHECK(v == doctest::Approx(k.eval_fast(1.0, u, 1.0)).epsilon(1e-8));
    }
  }
}

TEST_CASE("kernel difference") {
  for (double h : {0.1, 0.25, 0.4}) {
    const FbmKernel k{HurstParam(h)};
    CHECK(k.delta_eval(0.7, 0.7, 0.3) == 0.0);
    CHECK(k.delta_eval(0.7, 0.7, 0.9) == 0.0);
    CHECK_THROWS_AS(k.delta_eval(0.8, 0.7, 0.1), std::invalid_argument);
    CHECK(k.delta_eval(0.5, 1.0, 0.5) == k.eval(1.0, 0.5));
    CHECK(k.delta_eval(0.5, 1.0, 0.75) == k.eval(1.0, 0.75));
    for (double s : {0.1, 0.3, 0.5, 0.9})
      for (double dt : {1e-4, 0.01, 0.1, 0.5})
        for (double f : {0.001, 0.1, 0.5, 0.9, 0.999}) {
          const double t = s + dt, u = s * f;
          const double d = k.delta_eval(s, t, u);
          const double envelope = std::pow(s - u, h - 0.5) - std::pow(t - u, h - 0.5);
          CHECK(d < 0.0);
          CHECK(-d <= k.normalization() * envelope);
        }
  }
}

TEST_CASE("cell averages") {
  // \int_0^1 K(1,u) du, frozen from a 20-digit quadrature.
  const std::vector<std::pair<double, double>> mass{
      {0.1, 0.7876875024943011}, {0.25, 0.9566978363013838}, {0.4, 0.9948684545758615}};
  for (auto [h, integral] : mass) {
    const FbmKernel k{HurstParam(h)};
    double previous_sq = 0.0;
    for (std::size_t n : {16, 32, 64, 128}) {
      const Grid grid(1.0, n);
      const auto row = k.cell_average_row(grid, n);
      CHECK(row.size() == n);
      CHECK(k.cell_average_row(grid, 0).empty());
      double sum = 0.0, sq = 0.0;
      for (double x : row) {
        CHECK(std::isfinite(x));
        CHECK(x > 0.0);
        sum += x * grid.step();
        sq += x * x * grid.step();
      }
      CHECK(sum == doctest::Approx(integral).epsilon(1e-9));
      // Averaging loses mass in the square; the deficit shrinks under refinement.
      CHECK(sq < 1.0);
      CHECK(sq > previous_sq);
      previous_sq = sq;
    }
    if (h == 0.4) CHECK(previous_sq == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("cell averages against direct averaging of the kernel") {
  const FbmKernel k{HurstParam(0.3)};
  const Grid grid(2.0, 16);
  const std::size_t kk = 11;
  const auto row = k.cell_average_row(grid, kk);
  for (std::size_t m = 0; m < kk; ++m) {
    // Cell [m, m+1] in step units, singular ends absorbed by substitution.
    const double d = grid.step(), a = 0.3 + 0.5;
    const double lo = m * d, hi = (m + 1) * d, t = kk * d;
    double avg;
    if (m + 1 == kk) {
      auto f = [&](long double w) {
        const long double gap = std::pow(w, 1 / (long double)a);
        return gap > 0 ? kernel_oracle_gap(0.3, t, static_cast<double>(gap)) * gap / (a * w) : 0.0L;
      };
      avg = static_cast<double>(adaptive(f, 0.0L, std::pow((long double)d, (long double)a), 1e-12L)) / d;
    } else if (m == 0) {
      // K ~ u^{H-1/2} at the origin; u = w^{1/b} with b = H + 1/2.
      const double b = a;
      auto f = [&](long double w) {
        const long double u = std::pow(w, 1 / (long double)b);
        return u > 0 ? kernel_oracle(0.3, t, static_cast<double>(u)) * u / (b * w) : 0.0L;
      };
      avg = static_cast<double>(adaptive(f, 0.0L, std::pow((long double)hi, (long double)b), 1e-12L)) / d;
    } else {
      auto f = [&](long double u) { return (long double)kernel_oracle(0.3, t, static_cast<double>(u)); };
      avg = static_cast<double>(adaptive(f, (long double)lo, (long double)hi, 1e-12L)) / d;
    }
    CHECK(rel_diff(row[m], avg) < 1e-8);
    // Homogeneity: unit-spacing integral times step^{H-1/2}.
    CHECK(rel_diff(row[m], k.unit_cell_integral(kk, m) * std::pow(d, 0.3 - 0.5)) < 1e-12);
  }
}

TEST_CASE("kernel tables persist and cache") {
  const FbmKernel k{HurstParam(0.35)};
  const Grid grid(1.0, 16);
  const auto table = build_cell_averages(k, grid, 2);
  CHECK(table.at(5, 5) == 0.0);
  CHECK(table.at(5, 7) == 0.0);
  CHECK(table.row(5).size() == 5);

  std::stringstream bin;
  table.save_binary(bin);
  const auto loaded = CellAveragedKernel::load_binary(bin);
  CHECK(loaded.key() == table.key());
  for (std::size_t r = 0; r <= 16; ++r)
    for (std::size_t m = 0; m < r; ++m) CHECK(loaded.at(r, m) == table.at(r, m));

  std::stringstream junk("not a table");
  CHECK_THROWS(CellAveragedKernel::load_binary(junk));

  std::ostringstream csv;
  table.write_csv(csv);
  CHECK(csv.str().find("k,m,value\n1,0,") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "rfbm-test-kernel-cache";
  std::filesystem::remove_all(dir);
  const auto first = cached_cell_averages(k, grid, dir.string());
  CHECK(std::filesystem::exists(dir / cache_file_name(first.key())));
  const auto second = cached_cell_averages(k, grid, dir.string());
  CHECK(second.at(16, 3) == first.at(16, 3));
  // A different normalization is a different table.
  const FbmKernel doubled(HurstParam(0.35), 2.0 * k.normalization(), k.tolerance());
  const auto third = cached_cell_averages(doubled, grid, dir.string());
  CHECK(cache_file_name(third.key()) != cache_file_name(first.key()));
  CHECK(third.at(16, 3) == doctest::Approx(2.0 * first.at(16, 3)).epsilon(1e-14));
  std::filesystem::remove_all(dir);
}

TEST_CASE("covariance gate") {
  for (double h : {0.1, 0.25, 0.4}) {
    const FbmKernel k{HurstParam(h)};
    CHECK(covariance_check(k, 1.0, 1.0).target == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(covariance_check(k, 0.5, 1.0).target == doctest::Approx(0.5).epsilon(1e-15));
    for (auto [s, t] : covariance_probe_pairs()) CHECK(covariance_check(k, s, t).abs_error <= 1e-3);
    // \int_0^1 K(1,u)^2 du = 1.
    CHECK(covariance_check(k, 1.0, 1.0).computed == doctest::Approx(1.0).epsilon(1e-4));
    CHECK_THROWS_AS(covariance_check(k, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(covariance_check(k, 0.8, 0.5), std::invalid_argument);

    const FbmKernel doubled(HurstParam(h), 2.0 * k.normalization(), k.tolerance());
    const auto r = covariance_check(doubled, 1.0, 1.0);
    CHECK(r.computed == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(r.abs_error > 1e-3);
  }
  // the outer substitution reaches subnormal u for some H
  for (int i = 1; i <= 9; ++i) {
    const FbmKernel k{HurstParam(0.05 * i)};
    INFO("H = ", 0.05 * i);
    for (auto [s, t] : covariance_probe_pairs()) CHECK(covariance_check(k, s, t).abs_error <= 1e-3);
  }
}

TEST_CASE("lemma ratios") {
  for (double h : {0.1, 0.25, 0.4}) {
    const FbmKernel k{HurstParam(h)};
    for (const auto& p : lemma_sweep(k)) {
      INFO(p.lemma, " H=", h, " x=", p.x, " k=", p.k_level);
      CHECK(p.pass);
      CHECK(p.ratio >= 0.0);
    }
    CHECK_THROWS_AS(lemma_int_K2(k, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(lemma_Ist(k, 0.0, 1.0), std::invalid_argument);
  }
  // Regression values at H = 0.25.
  const FbmKernel k{HurstParam(0.25)};
  CHECK(lemma_int_K2(k, 0.1, 1.0) == doctest::Approx(0.92487777).epsilon(1e-7));
  CHECK(lemma_int_K2(k, 0.9, 1.0) == doctest::Approx(0.83949288).epsilon(1e-7));
  CHECK(lemma_int_K2(k, 0.2, 2.0) == doctest::Approx(0.92487777).epsilon(1e-7));
  CHECK(lemma_Ist(k, 0.5, 1.0) == doctest::Approx(0.49629895).epsilon(1e-6));
  CHECK(lemma_Ist(k, 0.9375, 1.0) == doctest::Approx(0.49942278).epsilon(1e-6));
  // \int_v^1 K(1,w)^2 dw -> 1 as v -> 0.
  CHECK(lemma_int_K2(k, 1e-12, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("beta_A") {
  // Frozen from a 30-digit quadrature at H = 0.2, k = 2.
  const HurstParam h(0.2);
  CHECK(lemma_betaA(h, 2, 1.0) == doctest::Approx(0.8194720967909067).epsilon(1e-9));
  CHECK(lemma_betaA(h, 2, 10.0) == doctest::Approx(1.451880373614146).epsilon(1e-9));
  CHECK(lemma_betaA(h, 2, 100.0) == doctest::Approx(1.771099755912461).epsilon(1e-9));
  CHECK(lemma_betaA(h, 2, 1000.0) == doctest::Approx(1.884714913709507).epsilon(1e-9));
  CHECK(lemma_betaA(h, 2, 1e-8) < 1e-4);
  CHECK(lemma_betaA(h, 2, 1e-8) < lemma_betaA(h, 2, 1e-6));
  CHECK_THROWS_AS(lemma_betaA(h, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lemma_betaA(HurstParam(0.25), 2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lemma_betaA(h, 1, 0.0), std::invalid_argument);
}

TEST_CASE("a second Volterra kernel plugs in") {
  const RiemannLiouville rl(0.3, 1.7);
  // \int_v^t c^2 (t-w)^{2H-1} dw = c^2 (t-v)^{2H} / (2H).
  for (double v : {0.1, 0.5, 0.9}) CHECK(lemma_int_K2(rl, v, 1.0) == doctest::Approx(1.7 * 1.7 / 0.6).epsilon(1e-8));
  const auto table = build_cell_averages(rl, Grid(1.0, 8));
  CHECK(table.key().kernel == "riemann-liouville");
  CHECK(table.at(8, 7) == doctest::Approx(1.7 / 0.8 * std::pow(0.125, 0.8) / 0.125).epsilon(1e-14));
  // Var of the Riemann-Liouville process at t = 1 is c^2 / (2H).
  CHECK(covariance_check(rl, 1.0, 1.0).computed == doctest::Approx(1.7 * 1.7 / 0.6).epsilon(1e-8));
}
