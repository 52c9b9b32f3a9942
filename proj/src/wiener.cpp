#include "roughfbm/wiener.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "roughfbm/rng.hpp"

namespace rfbm {

namespace {

// Streams separating the base draws from bridge midpoints of each refinement.
constexpr std::uint32_t kBaseStream = 0;
constexpr std::uint32_t kBridgeStream = 1;

void check_same_grid(const WienerPath& path, const CellAveragedKernel& kbar) {
  if (!(path.grid() == kbar.grid())) throw std::invalid_argument("Wiener path and kernel table live on different grids");
}

}  // namespace

WienerPath::WienerPath(Grid grid, std::size_t dim, std::uint64_t seed, std::vector<double> increments,
                       std::size_t refinements)
    : grid_(grid), dim_(dim), seed_(seed), refinements_(refinements), increments_(std::move(increments)) {
  if (dim_ == 0) throw std::invalid_argument("Wiener path needs at least one component");
  if (increments_.size() != grid_.cells() * dim_) throw std::invalid_argument("increment count does not match grid");
}

WienerPath sample_wiener(const Grid& grid, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("Wiener path needs at least one component");
  const double sd = std::sqrt(grid.step());
  std::vector<double> inc(grid.cells() * dim);
  for (std::size_t m = 0; m < grid.cells(); ++m)
    for (std::size_t i = 0; i < dim; ++i)
      inc[m * dim + i] = sd * counter_normal(seed, m, static_cast<std::uint32_t>(i), kBaseStream);
  return WienerPath(grid, dim, seed, std::move(inc));
}

WienerPath WienerPath::refine() const {
  const Grid fine(grid_.horizon(), 2 * grid_.cells());
  // Midpoint of a Brownian bridge over a coarse cell: mean half the coarse
  // increment, variance step/4.
  const double sd = std::sqrt(grid_.step()) / 2.0;
  const auto level = static_cast<std::uint32_t>(refinements_ + 1);
  std::vector<double> inc(fine.cells() * dim_);
  for (std::size_t m = 0; m < grid_.cells(); ++m)
    for (std::size_t i = 0; i < dim_; ++i) {
      const double half = 0.5 * increment(m, i);
      const double xi = sd * counter_normal(seed_, m, static_cast<std::uint32_t>(i), kBridgeStream + level);
      inc[(2 * m) * dim_ + i] = half + xi;
      inc[(2 * m + 1) * dim_ + i] = half - xi;
    }
  return WienerPath(fine, dim_, seed_, std::move(inc), refinements_ + 1);
}

void WienerPath::write_csv(std::ostream& out) const {
  out << "# kind=wiener\n# seed=" << seed_ << "\n# N=" << grid_.cells() << "\n# T=" << std::setprecision(17)
      << grid_.horizon() << "\n# d=" << dim_ << "\n# refinements=" << refinements_ << '\n';
  out << "cell,component,increment\n";
  for (std::size_t m = 0; m < grid_.cells(); ++m)
    for (std::size_t i = 0; i < dim_; ++i) out << m << ',' << (i + 1) << ',' << increment(m, i) << '\n';
}

WienerPath WienerPath::read_csv(std::istream& in) {
  std::map<std::string, std::string> meta;
  std::string line;
  std::vector<std::string> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        const auto key_start = line.find_first_not_of("# ");
        meta[line.substr(key_start, eq - key_start)] = line.substr(eq + 1);
      }
      continue;
    }
    if (!header_seen) {
      if (line != "cell,component,increment") throw std::runtime_error("unexpected Wiener CSV header: " + line);
      header_seen = true;
      continue;
    }
    rows.push_back(line);
  }
  for (const char* key : {"seed", "N", "T", "d"})
    if (!meta.count(key)) throw std::runtime_error(std::string("Wiener CSV lacks provenance field ") + key);
  const Grid grid(std::stod(meta["T"]), std::stoull(meta["N"]));
  const std::size_t dim = std::stoull(meta["d"]);
  const std::size_t refinements = meta.count("refinements") ? std::stoull(meta["refinements"]) : 0;
  std::vector<double> inc(grid.cells() * dim, 0.0);
  std::vector<bool> seen(inc.size(), false);
  for (const auto& row : rows) {
    std::istringstream fields(row);
    std::string cell, comp, value;
    std::getline(fields, cell, ',');
    std::getline(fields, comp, ',');
    std::getline(fields, value, ',');
    const std::size_t m = std::stoull(cell);
    const std::size_t i = std::stoull(comp);
    if (m >= grid.cells() || i == 0 || i > dim) throw std::runtime_error("Wiener CSV row out of range: " + row);
    inc[m * dim + (i - 1)] = std::stod(value);
    seen[m * dim + (i - 1)] = true;
  }
  for (bool s : seen)
    if (!s) throw std::runtime_error("Wiener CSV is missing increments");
  return WienerPath(grid, dim, std::stoull(meta["seed"]), std::move(inc), refinements);
}

// ---------------------------------------------------------------------------

FbmPath::FbmPath(Grid grid, std::size_t dim, std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
  if (values_.size() != grid_.points() * dim_) throw std::invalid_argument("fBm value count does not match grid");
}

void FbmPath::write_csv(std::ostream& out) const {
  out << "t";
  for (std::size_t i = 0; i < dim_; ++i) out << ",B(" << (i + 1) << ')';
  out << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < grid_.points(); ++k) {
    out << grid_.point(k);
    for (std::size_t i = 0; i < dim_; ++i) out << ',' << value(k, i);
    out << '\n';
  }
}

double fbm_value(const WienerPath& path, const CellAveragedKernel& kbar, std::size_t k, std::size_t component) {
  check_same_grid(path, kbar);
  const auto row = kbar.row(k);
  double acc = 0.0;
  for (std::size_t m = 0; m < row.size(); ++m) acc += row[m] * path.increment(m, component);
  return acc;
}

FbmPath synthesize_fbm(const WienerPath& path, const CellAveragedKernel& kbar) {
  check_same_grid(path, kbar);
  const std::size_t d = path.dim();
  std::vector<double> values(path.grid().points() * d);
  for (std::size_t k = 0; k < path.grid().points(); ++k)
    for (std::size_t i = 0; i < d; ++i) values[k * d + i] = fbm_value(path, kbar, k, i);
  return FbmPath(path.grid(), d, std::move(values));
}

}  // namespace rfbm
