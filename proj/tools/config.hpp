#pragma once

// Run configuration: one flat JSON object whose keys double as command line
// flags (--key value).

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rfbm::cli {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double hurst = 0.25;
  std::size_t dim = 2;
  double horizon = 1.0;
  std::size_t cells = 256;
  std::size_t n_max = 2;
  std::uint64_t seed = 1;
  std::size_t samples = 1000;
  // Grid index pairs [s, t]; empty means every pair of points on the mesh
  // with spacing window_stride.
  std::vector<std::array<std::size_t, 2>> windows;
  std::size_t window_stride = 16;
  double tol_q = 1e-8;
  double identity_tol = 1e-9;
  double covariance_tol = 1e-3;
  std::string out_dir = ".";
  std::string cache_dir;
  std::string scheme = "plpc";
  std::size_t threads = 1;
  double c_h = 0.0;  // 0 selects the closed form
  std::size_t level = 1;
  double gamma = 0.0;          // 0 selects 0.8 H
  double control_gamma = 0.0;  // 0 selects 1.1 H
  std::size_t seeds = 10;
  std::vector<double> window_sizes{0.5, 0.25, 0.125, 0.0625};
  double slope_tolerance = 0.0;  // 0 selects 0.05 n
  std::size_t level_guard = 4;
};

/// Every key accepted in a config file, in output order.
const std::vector<std::string>& config_keys();
bool is_string_key(const std::string& key);

/// Overlays the entries of `j` onto `config`. Unknown keys and wrong types are
/// usage errors.
void apply_json(RunConfig& config, const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

RunConfig load_config_file(const std::string& path);

/// Flag text to a JSON value: string keys keep the text, others parse it as JSON.
nlohmann::json flag_value(const std::string& key, const std::string& text);

/// Throws UsageError on the first violated invariant.
void validate(const RunConfig& config);

double resolved_gamma(const RunConfig& config);
double resolved_control_gamma(const RunConfig& config);
double resolved_slope_tolerance(const RunConfig& config);

}  // namespace rfbm::cli
