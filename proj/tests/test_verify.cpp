#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "roughfbm/rng.hpp"
#include "roughfbm/verify.hpp"

using namespace rfbm;

namespace {

RoughPathStack small_stack(double h, std::size_t n_max, std::uint64_t seed) {
  const std::size_t cells = 16;
  const auto kbar = rfbm::test::table(h, cells);
  const auto path = sample_wiener(Grid(1.0, cells), 2, seed);
  std::vector<Window> windows;
  for (std::size_t s = 0; s <= 16; s += 4)
    for (std::size_t t = s; t <= 16; t += 4) windows.push_back({s, t});
  return build_stack(n_max, windows, path, kbar);
}

}  // namespace

TEST_CASE("Chen and shuffle hold on a computed stack") {
  const auto stack = small_stack(0.3, 3, 21);
  for (std::size_t n = 1; n <= 3; ++n)
    for (const auto& tuple : all_tuples(2, n)) {
      const auto r = chen_defect(stack, 0, 8, 16, tuple);
      CHECK(r.pass);
      CHECK(r.relative <= 1e-9);
      CHECK(r.identity == "chen");
    }
  for (auto [a, b] : std::vector<std::pair<IndexTuple, IndexTuple>>{
           {{0}, {1}}, {{0}, {0}}, {{1}, {0, 1}}, {{0, 0}, {0}}, {{1, 0}, {1}}}) {
    const auto r = shuffle_defect(stack, 4, 16, a, b);
    CHECK(r.pass);
    CHECK(r.scale > 0.0);
  }
  // empty windows are trivially consistent
  CHECK(chen_defect(stack, 8, 8, 8, {0, 1}).pass);
  CHECK_THROWS_AS(chen_defect(stack, 8, 4, 16, {0}), std::invalid_argument);
  CHECK_THROWS_AS(shuffle_defect(stack, 0, 16, {0, 1}, {0, 1}), std::out_of_range);  // level 4 absent
}

TEST_CASE("defects detect a corrupted stack") {
  auto stack = small_stack(0.3, 2, 22);
  auto level = stack.level(Window{0, 16}, 2);
  std::vector<double> bad(level.begin(), level.end());
  bad[1] *= 1.001;
  stack.set(Window{0, 16}, 2, bad);
  CHECK_FALSE(chen_defect(stack, 0, 8, 16, {0, 1}).pass);
  CHECK(chen_defect(stack, 0, 8, 16, {0, 0}).pass);
  CHECK_FALSE(shuffle_defect(stack, 0, 16, {0}, {1}).pass);
  CHECK(shuffle_defect(stack, 0, 16, {0}, {0}).pass);
}

TEST_CASE("mean estimate") {
  const auto m = mean_estimate({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK_THROWS_AS(mean_estimate({1.0}), std::invalid_argument);
}

TEST_CASE("weighted line fit") {
  // exact line, unit errors: slope SE = 1/sqrt(Sxx)
  const auto f = weighted_line_fit({0, 1, 2}, {1, 3, 5}, {1, 1, 1});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_std_error == doctest::Approx(std::sqrt(0.5)));

  // weighted normal equations solved by hand
  const std::vector<double> x{0, 1, 2, 4}, y{0.1, 0.9, 2.3, 3.8}, s{0.5, 1.0, 2.0, 1.0};
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double w = 1 / (s[i] * s[i]);
    sw += w, swx += w * x[i], swy += w * y[i], swxx += w * x[i] * x[i], swxy += w * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  const auto g = weighted_line_fit(x, y, s);
  CHECK(g.slope == doctest::Approx((sw * swxy - swx * swy) / det));
  CHECK(g.intercept == doctest::Approx((swxx * swy - swx * swxy) / det));
  CHECK(g.slope_std_error == doctest::Approx(std::sqrt(sw / det)));
  CHECK_THROWS_AS(weighted_line_fit({1}, {1}, {1}), std::invalid_argument);
}

TEST_CASE("GRR order") {
  CHECK(grr_order(1, 0.3, 0.24) == 34);  // 2p(0.06) > 4
  CHECK(grr_order(2, 0.3, 0.24) == 17);
  CHECK(grr_order(1, 0.25, 0.0) == 9);   // 2p(0.25) > 4 needs p > 8
  for (std::size_t n = 1; n <= 3; ++n)
    for (double g : {0.05, 0.1, 0.2}) {
      const int p = grr_order(n, 0.3, g);
      CHECK(2.0 * p * n * (0.3 - g) > 4.0);
      CHECK(2.0 * (p - 1) * n * (0.3 - g) <= 4.0);
    }
  CHECK_THROWS_AS(grr_order(1, 0.3, 0.3), std::invalid_argument);
}

TEST_CASE("small scaling study") {
  ScalingConfig cfg;
  cfg.level = 1;
  cfg.hurst = 0.4;
  cfg.cells = 64;
  cfg.samples = 400;
  cfg.seed = 3;
  cfg.slope_tolerance = 0.1;
  const auto kbar = rfbm::test::table(0.4, 64);
  const auto r = scaling_study(cfg, kbar);
  CHECK(r.expected_slope == doctest::Approx(0.8));
  CHECK(r.moments.size() == 4);
  CHECK(r.pass);
  // second moment of the longest window, two components: 2 * 0.5^{0.8}
  CHECK(std::abs(r.moments[0].mean - 2.0 * std::pow(0.5, 0.8)) < 4.0 * r.moments[0].std_error);

  std::ostringstream csv, gp;
  write_csv(csv, r);
  write_gnuplot(gp, r, "scaling.csv");
  CHECK(csv.str().find('\n') != std::string::npos);
  CHECK(gp.str().find("scaling.csv") != std::string::npos);
  CHECK(to_json(r).find("\"slope\"") != std::string::npos);

  cfg.window_sizes = {0.5, 0.25};
  CHECK_THROWS_AS(scaling_study(cfg, kbar), std::invalid_argument);
  cfg.window_sizes = {0.5, 0.25, 0.1, 0.05};
  CHECK_THROWS_AS(scaling_study(cfg, kbar), std::invalid_argument);
  cfg.window_sizes = {0.5, 0.25, 0.125, 0.0625};
  cfg.level = 3;
  CHECK_THROWS_AS(scaling_study(cfg, kbar), std::invalid_argument);
}

TEST_CASE("small Hölder study") {
  HolderConfig cfg;
  cfg.level = 1;
  cfg.hurst = 0.4;
  cfg.gamma = 0.32;
  cfg.control_gamma = 0.44;
  cfg.coarse_cells = 32;
  cfg.seeds = {derive_seed(1, 0), derive_seed(1, 1), derive_seed(1, 2)};
  const auto coarse = rfbm::test::table(0.4, 32);
  const auto fine = rfbm::test::table(0.4, 64);
  const auto r = holder_study(cfg, coarse, fine);
  CHECK(r.grr_p == grr_order(1, 0.4, 0.32));
  CHECK(r.seeds.size() == 3);
  for (const auto& s : r.seeds) {
    CHECK(s.norm_coarse > 0.0);
    CHECK(s.grr_coarse > 0.0);
    CHECK(s.control_ratio() > 1.0);
  }
  CHECK(r.stable);
  CHECK(r.pass());
  cfg.gamma = 0.4;
  CHECK_THROWS_AS(holder_study(cfg, coarse, fine), std::invalid_argument);
}

TEST_CASE("stack level increment") {
  const auto kbar = rfbm::test::table(0.3, 8);
  const auto path = sample_wiener(Grid(1.0, 8), 2, 9);
  const auto stack = build_stack(2, all_windows(Grid(1.0, 8)), path, kbar);
  const auto inc = stack_level_increment(stack, 2);
  CHECK(inc.at(2, 7)[2] == stack.value(Window{2, 7}, {1, 0}));
  CHECK(inc.at(3, 3)[0] == 0.0);
}

TEST_CASE("small Itô study") {
  ItoStratConfig cfg;
  cfg.level = 2;
  cfg.hurst = 0.3;
  cfg.cells = {32, 64, 128};
  cfg.samples = 60;
  const auto a = rfbm::test::table(0.3, 32);
  const auto b = rfbm::test::table(0.3, 64);
  const auto c = rfbm::test::table(0.3, 128);
  const auto r = ito_strat_study(cfg, {&a, &b, &c});
  REQUIRE(r.rms.size() == 3);
  CHECK(r.decreasing);
  CHECK(r.rms[2] < r.rms[0]);
  CHECK_THROWS_AS(ito_strat_study(cfg, {&a, &b}), std::invalid_argument);
}
