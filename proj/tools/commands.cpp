#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roughfbm/combinat.hpp"
#include "roughfbm/iterated.hpp"
#include "roughfbm/kernel.hpp"
#include "roughfbm/rng.hpp"
#include "roughfbm/verify.hpp"
#include "roughfbm/version.hpp"
#include "roughfbm/wiener.hpp"

namespace rfbm::cli {
namespace {

using nlohmann::json;

FbmKernel make_kernel(const RunConfig& c) {
  const HurstParam h(c.hurst);
  return c.c_h > 0.0 ? FbmKernel(h, c.c_h, c.tol_q) : FbmKernel(h, c.tol_q);
}

CellAveragedKernel kernel_table(const RunConfig& c, std::size_t cells) {
  return cached_cell_averages(make_kernel(c), Grid(c.horizon, cells), c.cache_dir, c.threads);
}

std::filesystem::path output(const RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.out_dir);
  return std::filesystem::path(c.out_dir) / name;
}

std::ofstream open_output(const RunConfig& c, const std::string& name) {
  const auto path = output(c, name);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Prepended to every CSV and script so each file alone reproduces its run.
void comment_header(std::ostream& out, const std::string& command, const RunConfig& c) {
  out << "# command=" << command << "\n# version=" << kToolVersion << "\n# config=" << to_json(c).dump() << '\n';
}

json provenance(const std::string& command, const RunConfig& c) {
  return {{"command", command}, {"version", kToolVersion}, {"config", to_json(c)}};
}

void write_report(const RunConfig& c, const std::string& name, const std::string& command, json body) {
  json j{{"provenance", provenance(command, c)}};
  for (auto& [key, value] : body.items()) j[key] = std::move(value);
  open_output(c, name) << j.dump(1) << '\n';
}

std::vector<Window> config_windows(const RunConfig& c) {
  std::vector<Window> out;
  if (!c.windows.empty()) {
    for (const auto& w : c.windows) out.push_back({w[0], w[1]});
    return out;
  }
  for (std::size_t s = 0; s <= c.cells; s += c.window_stride)
    for (std::size_t t = s; t <= c.cells; t += c.window_stride) out.push_back({s, t});
  return out;
}

RoughPathStack simulate_stack(const RunConfig& c, const WienerPath& path, const CellAveragedKernel& kbar) {
  StackOptions options;
  options.threads = c.threads;
  options.level_guard = c.level_guard;
  return build_stack(c.n_max, config_windows(c), path, kbar, options);
}

std::string tuple_text(const IndexTuple& t) {
  std::string s;
  for (std::size_t a = 0; a < t.size(); ++a) s += (a ? " " : "") + std::to_string(t[a] + 1);
  return s;
}

IndexTuple parse_tuple(const std::string& text) {
  IndexTuple t;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      throw UsageError("bad index tuple '" + text + "'");
    }
    if (v < 1 || used != item.size()) throw UsageError("index tuples are 1-based: '" + text + "'");
    t.push_back(static_cast<std::size_t>(v - 1));
  }
  return t;
}

struct DefectSummary {
  std::size_t checks = 0;
  std::size_t failures = 0;
  DefectReport worst;
  bool any = false;

  void add(const DefectReport& r) {
    ++checks;
    if (!r.pass) ++failures;
    if (!any || r.relative > worst.relative) worst = r;
    any = true;
  }
  json to_json_value() const {
    json j{{"checks", checks}, {"failures", failures}};
    j["worst"] = any ? json::parse(rfbm::to_json(worst)) : json(nullptr);
    return j;
  }
};

void defect_row(std::ostream& out, const DefectReport& r) {
  const auto& p = r.points;
  out << r.identity << ',';
  if (p.size() == 3)
    out << p[0] << ',' << p[1] << ',' << p[2];
  else
    out << p[0] << ",," << p[1];
  out << ',' << tuple_text(r.left) << ',' << tuple_text(r.right) << ',' << r.defect << ',' << r.scale << ','
      << r.relative << ',' << (r.pass ? 1 : 0) << '\n';
}

}  // namespace

int cmd_kernel_check(const RunConfig& c) {
  const FbmKernel kernel = make_kernel(c);
  bool pass = true;
  json cov = json::array();
  for (auto [s, t] : covariance_probe_pairs()) {
    const auto r = covariance_check(kernel, s, t);
    const bool ok = r.abs_error <= c.covariance_tol;
    pass = pass && ok;
    cov.push_back({{"s", s}, {"t", t}, {"computed", r.computed}, {"target", r.target}, {"abs_error", r.abs_error},
                   {"pass", ok}});
  }
  json lemmas = json::array();
  for (const auto& p : lemma_sweep(kernel)) {
    pass = pass && p.pass;
    json entry{{"lemma", p.lemma}, {"ratio", p.ratio}, {"bound", p.bound}, {"pass", p.pass}};
    if (p.lemma == "beta_A") {
      entry["k"] = p.k_level;
      entry["A"] = p.x;
    } else {
      entry[p.lemma == "Ist" ? "s" : "v"] = p.x;
      entry["t"] = p.t;
    }
    lemmas.push_back(std::move(entry));
  }
  write_report(c, "kernel_report.json", "kernel-check",
               {{"H", c.hurst},
                {"c_H", kernel.normalization()},
                {"covariance_tol", c.covariance_tol},
                {"covariance", cov},
                {"lemmas", lemmas},
                {"pass", pass}});
  std::cout << "kernel-check H=" << c.hurst << " c_H=" << std::setprecision(10) << kernel.normalization() << ": "
            << (pass ? "pass" : "FAIL") << '\n';
  return pass ? kExitPass : kExitGateFailure;
}

int cmd_simulate(const RunConfig& c) {
  const Grid grid(c.horizon, c.cells);
  const auto kbar = kernel_table(c, c.cells);
  const WienerPath path = sample_wiener(grid, c.dim, c.seed);
  const RoughPathStack stack = simulate_stack(c, path, kbar);

  {
    auto out = open_output(c, "wiener.csv");
    comment_header(out, "simulate", c);
    path.write_csv(out);
  }
  {
    auto out = open_output(c, "fbm.csv");
    comment_header(out, "simulate", c);
    synthesize_fbm(path, kbar).write_csv(out);
  }
  {
    auto out = open_output(c, "stack.csv");
    comment_header(out, "simulate", c);
    stack.write_csv(out);
  }
  {
    std::ostringstream text;
    stack.write_json(text);
    json j = json::parse(text.str());
    j["run"] = provenance("simulate", c);
    open_output(c, "stack.json") << j.dump(1) << '\n';
  }
  std::cout << "simulate: " << stack.windows().size() << " windows, levels 1.." << c.n_max << " -> "
            << c.out_dir << '\n';
  return kExitPass;
}

int cmd_verify(const RunConfig& c, const std::string& which, const std::string& stack_file) {
  if (which != "chen" && which != "shuffle" && which != "both")
    throw UsageError("verify expects chen, shuffle or both, got '" + which + "'");
  const RoughPathStack stack = [&] {
    if (stack_file.empty()) {
      const auto kbar = kernel_table(c, c.cells);
      return simulate_stack(c, sample_wiener(Grid(c.horizon, c.cells), c.dim, c.seed), kbar);
    }
    std::ifstream in(stack_file);
    if (!in) throw UsageError("cannot open stack file " + stack_file);
    return RoughPathStack::read_json(in);
  }();
  const std::size_t d = stack.dim();
  const std::size_t n_max = stack.n_max();
  const auto windows = stack.windows();
  auto has = [&](std::size_t s, std::size_t t, std::size_t n) { return stack.contains({s, t}, n); };

  auto csv = open_output(c, "verify_" + which + ".csv");
  comment_header(csv, "verify", c);
  csv << std::setprecision(17) << "identity,s,u,t,left,right,defect,scale,relative,pass\n";
  json body = json::object();

  if (which != "shuffle") {
    DefectSummary summary;
    std::vector<std::size_t> points;
    for (auto w : windows) {
      points.push_back(w.s);
      points.push_back(w.t);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    for (std::size_t n = 2; n <= n_max; ++n) {
      const auto tuples = all_tuples(d, n);
      for (std::size_t a = 0; a < points.size(); ++a)
        for (std::size_t b = a + 1; b < points.size(); ++b)
          for (std::size_t e = b + 1; e < points.size(); ++e) {
            const std::size_t s = points[a], u = points[b], t = points[e];
            bool present = true;
            for (std::size_t m = 1; m <= n && present; ++m) present = has(s, t, m) && has(s, u, m) && has(u, t, m);
            if (!present) continue;
            for (const auto& tuple : tuples) {
              const auto r = chen_defect(stack, s, u, t, tuple, c.identity_tol);
              summary.add(r);
              defect_row(csv, r);
            }
          }
    }
    body["chen"] = summary.to_json_value();
  }
  if (which != "chen") {
    DefectSummary summary;
    for (auto w : windows) {
      if (w.s == w.t) continue;
      for (std::size_t n = 1; n < n_max; ++n)
        for (std::size_t m = 1; n + m <= n_max; ++m) {
          if (!has(w.s, w.t, n + m)) continue;
          for (const auto& a : all_tuples(d, n))
            for (const auto& b : all_tuples(d, m)) {
              const auto r = shuffle_defect(stack, w.s, w.t, a, b, c.identity_tol);
              summary.add(r);
              defect_row(csv, r);
            }
        }
    }
    body["shuffle"] = summary.to_json_value();
  }

  bool pass = true;
  for (auto& [name, s] : body.items()) {
    pass = pass && s["failures"].get<std::size_t>() == 0;
    std::cout << "verify " << name << ": " << s["checks"] << " checks, " << s["failures"] << " failures";
    if (!s["worst"].is_null()) std::cout << ", worst relative defect " << s["worst"]["relative"];
    std::cout << '\n';
  }
  body["identity_tol"] = c.identity_tol;
  body["pass"] = pass;
  write_report(c, "verify_" + which + "_report.json", "verify", body);
  return pass ? kExitPass : kExitGateFailure;
}

int cmd_scaling(const RunConfig& c) {
  ScalingConfig sc;
  sc.level = c.level;
  sc.hurst = c.hurst;
  sc.horizon = c.horizon;
  sc.cells = c.cells;
  sc.dim = c.dim;
  sc.window_sizes = c.window_sizes;
  sc.samples = c.samples;
  sc.seed = c.seed;
  sc.threads = c.threads;
  sc.slope_tolerance = resolved_slope_tolerance(c);
  const auto kbar = kernel_table(c, c.cells);
  const ScalingReport r = scaling_study(sc, kbar);
  {
    auto out = open_output(c, "scaling.csv");
    comment_header(out, "scaling", c);
    write_csv(out, r);
  }
  {
    auto out = open_output(c, "scaling.gp");
    comment_header(out, "scaling", c);
    write_gnuplot(out, r, "scaling.csv");
  }
  write_report(c, "scaling_report.json", "scaling", {{"scaling", json::parse(rfbm::to_json(r))}});
  std::cout << "scaling level " << r.level << " H=" << r.hurst << ": slope " << r.slope << " +- "
            << r.slope_half_width << " (expected " << r.expected_slope << " +- " << r.tolerance << ") "
            << (r.pass ? "pass" : "FAIL") << '\n';
  return r.pass ? kExitPass : kExitGateFailure;
}

int cmd_holder(const RunConfig& c) {
  HolderConfig hc;
  hc.level = c.level;
  hc.hurst = c.hurst;
  hc.gamma = resolved_gamma(c);
  hc.control_gamma = resolved_control_gamma(c);
  if (hc.gamma >= c.hurst) throw UsageError("holder requires gamma < H");
  hc.horizon = c.horizon;
  hc.coarse_cells = c.cells;
  hc.dim = c.dim;
  hc.threads = c.threads;
  hc.seeds.clear();
  for (std::size_t i = 0; i < c.seeds; ++i) hc.seeds.push_back(derive_seed(c.seed, i));
  const auto coarse = kernel_table(c, c.cells);
  const auto fine = kernel_table(c, 2 * c.cells);
  const HolderReport r = holder_study(hc, coarse, fine);
  {
    auto out = open_output(c, "holder.csv");
    comment_header(out, "holder", c);
    write_csv(out, r);
  }
  write_report(c, "holder_report.json", "holder", {{"holder", json::parse(rfbm::to_json(r))}});
  std::cout << "holder level " << r.level << " H=" << r.hurst << " gamma=" << r.gamma << ": mean ratio "
            << r.mean_norm_ratio << ", control " << r.mean_control_ratio << ", stable=" << r.stable
            << ", control grows=" << r.control_grows << ' ' << (r.pass() ? "pass" : "FAIL") << '\n';
  return r.pass() ? kExitPass : kExitGateFailure;
}

int cmd_ito(const RunConfig& c) {
  if (c.level < 2) throw UsageError("ito needs level >= 2");
  ItoStratConfig ic;
  ic.level = c.level;
  ic.hurst = c.hurst;
  ic.horizon = c.horizon;
  ic.cells = {c.cells, 2 * c.cells, 4 * c.cells};
  ic.samples = c.samples;
  ic.seed = c.seed;
  ic.threads = c.threads;
  std::vector<CellAveragedKernel> tables;
  for (auto n : ic.cells) tables.push_back(kernel_table(c, n));
  std::vector<const CellAveragedKernel*> kbars;
  for (const auto& t : tables) kbars.push_back(&t);
  const ItoStratReport r = ito_strat_study(ic, kbars);
  write_report(c, "ito_report.json", "ito", {{"ito", json::parse(rfbm::to_json(r))}});
  std::cout << "ito level " << r.level << " H=" << r.hurst << ": rms";
  for (double v : r.rms) std::cout << ' ' << v;
  std::cout << (r.decreasing ? " decreasing, pass" : " not decreasing, FAIL") << '\n';
  return r.decreasing ? kExitPass : kExitGateFailure;
}

int cmd_enumerate(const std::string& what, const std::string& a, const std::string& b, int n, int k, int j) {
  if (what == "shuffles") {
    std::cout << rfbm::to_json(shuffles(parse_tuple(a), parse_tuple(b))) << '\n';
  } else if (what == "compositions") {
    std::cout << rfbm::to_json(compositions(n, k)) << '\n';
  } else if (what == "valleys") {
    if (n < 1 || j < 1 || j > n) throw UsageError("valleys needs 1 <= j <= n");
    std::cout << rfbm::to_json(valley_interleavings(static_cast<std::size_t>(n), static_cast<std::size_t>(j))) << '\n';
  } else {
    throw UsageError("enumerate expects shuffles, compositions or valleys");
  }
  return kExitPass;
}

}  // namespace rfbm::cli
