#pragma once

// Thin wrappers over Boost.Math quadrature with error reporting.

#include <cmath>
#include <cstdio>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "roughfbm/kernel.hpp"

namespace rfbm::detail {

inline std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

inline void check_quadrature(double value, double err, double l1, double tol, double abs_tol,
                             const std::string& what) {
  if (!std::isfinite(value))
    throw QuadratureError("quadrature produced a non-finite value: " + what);
  // Boost's estimates are conservative; allow a generous factor before giving up.
  if (err > 1e3 * tol * l1 + abs_tol)
    throw QuadratureError("quadrature did not converge (error " + fmt_sci(err) + ", L1 " + fmt_sci(l1) + ", value " + fmt_sci(value) + "): " + what);
}

/// Adaptive Gauss-Kronrod for smooth integrands.
template <class F>
double integrate_smooth(F&& f, double a, double b, double tol, const std::string& what, double abs_tol = 0.0) {
  double err = 0.0;
  double l1 = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, tol, &err, &l1);
  check_quadrature(value, err, l1, tol, abs_tol, what);
  return value;
}

/// Double-exponential rule; tolerates endpoint singularities and kinks.
template <class F>
double integrate_endpoint(F&& f, double a, double b, double tol, const std::string& what, double abs_tol = 0.0) {
  static thread_local boost::math::quadrature::tanh_sinh<double> rule;
  if (!(b > a)) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  // The rule's error estimate degrades on microscopic intervals, so work on
  // (0, 1) and scale back.
  const double width = b - a;
  auto unit = [&](double y) { return f(a + width * y); };
  const double value = width * rule.integrate(unit, 0.0, 1.0, tol, &err, &l1, &levels);
  check_quadrature(value, width * err, width * l1, tol, abs_tol, what);
  return value;
}

/// \int_0^length f(gap) d(gap) where f(gap) ~ gap^{beta-1} as gap -> 0. The
/// substitution gap = x^{1/beta} turns the integrand bounded; f receives the
/// gap itself so callers never form a difference of nearly equal times.
template <class F>
double integrate_from_singularity(F&& f, double length, double beta, double tol, const std::string& what,
                                  double abs_tol = 0.0) {
  if (length <= 0.0) return 0.0;
  const double inv = 1.0 / beta;
  auto g = [&](double x) {
    const double gap = std::pow(x, inv);
    // Underflowed gaps carry no mass; skip them rather than form inf * 0.
    if (!(gap > 0.0)) return 0.0;
    return f(gap) * inv * gap / x;
  };
  return integrate_endpoint(g, 0.0, std::pow(length, beta), tol, what, abs_tol);
}

}  // namespace rfbm::detail
