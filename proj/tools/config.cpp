#include "config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <type_traits>

#include "roughfbm/kernel.hpp"

namespace rfbm::cli {
namespace {

using nlohmann::json;

struct Field {
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
  bool is_string = false;
};

template <class T>
T get_as(const std::string& key, const json& v) {
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw UsageError("config key '" + key + "' expects a number");
    return v.get<double>();
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) throw UsageError("config key '" + key + "' expects a non-negative integer");
    return v.get<T>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw UsageError("config key '" + key + "' expects a string");
    return v.get<std::string>();
  } else {
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw UsageError("config key '" + key + "' has the wrong shape");
    }
  }
}

template <class T>
Field field(const std::string& key, T RunConfig::*member) {
  Field f;
  f.set = [key, member](RunConfig& c, const json& v) { c.*member = get_as<T>(key, v); };
  f.get = [member](const RunConfig& c) { return json(c.*member); };
  f.is_string = std::is_same_v<T, std::string>;
  return f;
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const auto table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto add = [&t](const std::string& key, auto member) { t.emplace_back(key, field(key, member)); };
    add("hurst", &RunConfig::hurst);
    add("dim", &RunConfig::dim);
    add("horizon", &RunConfig::horizon);
    add("cells", &RunConfig::cells);
    add("n_max", &RunConfig::n_max);
    add("seed", &RunConfig::seed);
    add("samples", &RunConfig::samples);
    add("windows", &RunConfig::windows);
    add("window_stride", &RunConfig::window_stride);
    add("tol_q", &RunConfig::tol_q);
    add("identity_tol", &RunConfig::identity_tol);
    add("covariance_tol", &RunConfig::covariance_tol);
    add("out_dir", &RunConfig::out_dir);
    add("cache_dir", &RunConfig::cache_dir);
    add("scheme", &RunConfig::scheme);
    add("threads", &RunConfig::threads);
    add("c_h", &RunConfig::c_h);
    add("level", &RunConfig::level);
    add("gamma", &RunConfig::gamma);
    add("control_gamma", &RunConfig::control_gamma);
    add("seeds", &RunConfig::seeds);
    add("window_sizes", &RunConfig::window_sizes);
    add("slope_tolerance", &RunConfig::slope_tolerance);
    add("level_guard", &RunConfig::level_guard);
    return t;
  }();
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& [name, f] : fields())
    if (name == key) return f;
  throw UsageError("unknown config key '" + key + "'");
}

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, f] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

bool is_string_key(const std::string& key) { return find_field(key).is_string; }

void apply_json(RunConfig& config, const json& j) {
  if (!j.is_object()) throw UsageError("config must be a flat JSON object");
  for (const auto& [key, value] : j.items()) find_field(key).set(config, value);
}

json to_json(const RunConfig& config) {
  json j = json::object();
  for (const auto& [name, f] : fields()) j[name] = f.get(config);
  return j;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file " + path + " is not valid JSON: " + e.what());
  }
  RunConfig config;
  apply_json(config, j);
  return config;
}

json flag_value(const std::string& key, const std::string& text) {
  if (is_string_key(key)) return json(text);
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    throw UsageError("flag --" + key + " expects a JSON value, got '" + text + "'");
  }
}

void validate(const RunConfig& c) {
  if (!(c.hurst > 0.0 && c.hurst < 0.5)) throw UsageError("H out of range (0,1/2)");
  const std::size_t cap = HurstParam(c.hurst).level_cap();
  if (c.dim < 1) throw UsageError("dim must be at least 1");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) throw UsageError("horizon must be positive");
  if (!power_of_two(c.cells)) throw UsageError("cells must be a power of two");
  if (c.n_max < 1 || c.n_max > cap)
    throw UsageError("n_max must lie in [1, floor(1/H)] = [1, " + std::to_string(cap) + "]");
  if (c.level < 1 || c.level > cap)
    throw UsageError("level must lie in [1, floor(1/H)] = [1, " + std::to_string(cap) + "]");
  if (c.samples < 1) throw UsageError("samples must be positive");
  if (c.threads < 1) throw UsageError("threads must be positive");
  if (c.seeds < 1) throw UsageError("seeds must be positive");
  if (!(c.tol_q > 0.0) || !(c.identity_tol > 0.0) || !(c.covariance_tol > 0.0))
    throw UsageError("tolerances must be positive");
  if (c.slope_tolerance < 0.0) throw UsageError("slope_tolerance must be positive (0 selects the default)");
  if (c.c_h < 0.0) throw UsageError("c_h must be positive (0 selects the closed form)");
  if (c.gamma < 0.0 || c.control_gamma < 0.0) throw UsageError("Hölder exponents must be positive");
  if (c.scheme != "plpc") throw UsageError("unknown scheme '" + c.scheme + "' (only plpc is implemented)");
  if (c.window_stride < 1 || c.window_stride > c.cells || c.cells % c.window_stride != 0)
    throw UsageError("window_stride must divide cells");
  for (const auto& w : c.windows)
    if (w[0] > w[1] || w[1] > c.cells)
      throw UsageError("window [" + std::to_string(w[0]) + ", " + std::to_string(w[1]) +
                       "] must satisfy 0 <= s <= t <= cells");
  for (double h : c.window_sizes)
    if (!(h > 0.0) || h > c.horizon) throw UsageError("window_sizes must lie in (0, horizon]");
}

double resolved_gamma(const RunConfig& c) { return c.gamma > 0.0 ? c.gamma : 0.8 * c.hurst; }
double resolved_control_gamma(const RunConfig& c) {
  return c.control_gamma > 0.0 ? c.control_gamma : 1.1 * c.hurst;
}
double resolved_slope_tolerance(const RunConfig& c) {
  return c.slope_tolerance > 0.0 ? c.slope_tolerance : 0.05 * static_cast<double>(c.level);
}

}  // namespace rfbm::cli
