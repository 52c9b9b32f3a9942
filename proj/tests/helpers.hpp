#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "roughfbm/kernel.hpp"

namespace rfbm::test {

inline const std::string kCache = RFBM_TEST_CACHE;

inline CellAveragedKernel table(double hurst, std::size_t cells, double horizon = 1.0) {
  return cached_cell_averages(FbmKernel(HurstParam(hurst)), Grid(horizon, cells), kCache, 4);
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline std::vector<double> random_values(std::size_t n, std::uint32_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (auto& x : out) x = dist(gen);
  return out;
}

}  // namespace rfbm::test
