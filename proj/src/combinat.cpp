#include "roughfbm/combinat.hpp"

#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rfbm {

int Composition::total() const { return std::accumulate(parts.begin(), parts.end(), 0); }

int Composition::prefix(std::size_t j) const {
  return std::accumulate(parts.begin(), parts.begin() + static_cast<std::ptrdiff_t>(j), 0);
}

namespace {

// Walks every way of merging two chains, keeping the order inside each.
template <class Emit>
void merge_chains(std::size_t left, std::size_t right, std::vector<bool>& take_left, Emit&& emit) {
  if (left == 0 && right == 0) {
    emit(take_left);
    return;
  }
  if (left > 0) {
    take_left.push_back(true);
    merge_chains(left - 1, right, take_left, emit);
    take_left.pop_back();
  }
  if (right > 0) {
    take_left.push_back(false);
    merge_chains(left, right - 1, take_left, emit);
    take_left.pop_back();
  }
}

}  // namespace

std::vector<IndexTuple> shuffles(const IndexTuple& a, const IndexTuple& b) {
  std::vector<IndexTuple> out;
  std::vector<bool> pattern;
  merge_chains(a.size(), b.size(), pattern, [&](const std::vector<bool>& take_a) {
    IndexTuple merged;
    merged.reserve(take_a.size());
    std::size_t ia = 0, ib = 0;
    for (bool from_a : take_a) merged.push_back(from_a ? a[ia++] : b[ib++]);
    out.push_back(std::move(merged));
  });
  return out;
}

std::vector<Composition> compositions(int n, int k) {
  std::vector<Composition> out;
  // k parts of size 1 or 2 summing to n means n - k twos.
  const int twos = n - k;
  if (n < 1 || k < 1 || twos < 0 || twos > k) return out;
  std::vector<bool> pattern;
  merge_chains(static_cast<std::size_t>(k - twos), static_cast<std::size_t>(twos), pattern,
               [&](const std::vector<bool>& ones_first) {
                 Composition c;
                 for (bool one : ones_first) c.parts.push_back(one ? 1 : 2);
                 out.push_back(std::move(c));
               });
  return out;
}

std::vector<ValleyInterleaving> valley_interleavings(std::size_t n, std::size_t j) {
  if (j < 1 || j > n) throw std::invalid_argument("valley index must satisfy 1 <= j <= n");
  const std::size_t valley = j - 1;
  // Ascending left chain: u_{j-1} < ... < u_1, i.e. coordinates valley-1 down to 0.
  std::vector<std::size_t> left;
  for (std::size_t c = valley; c-- > 0;) left.push_back(c);
  std::vector<std::size_t> right;
  for (std::size_t c = valley + 1; c < n; ++c) right.push_back(c);

  std::vector<ValleyInterleaving> out;
  std::vector<bool> pattern;
  merge_chains(left.size(), right.size(), pattern, [&](const std::vector<bool>& take_left) {
    ValleyInterleaving v;
    v.order.reserve(n);
    v.order.push_back(valley);
    std::size_t il = 0, ir = 0;
    for (bool from_left : take_left) v.order.push_back(from_left ? left[il++] : right[ir++]);
    out.push_back(std::move(v));
  });
  return out;
}

std::vector<IndexTuple> all_tuples(std::size_t dim, std::size_t n) {
  std::vector<IndexTuple> out;
  IndexTuple cur(n, 0);
  while (true) {
    out.push_back(cur);
    std::size_t a = n;
    while (a > 0 && ++cur[a - 1] == dim) cur[--a] = 0;
    if (a == 0) break;
  }
  return out;
}

std::size_t tuple_rank(const IndexTuple& tuple, std::size_t dim) {
  std::size_t r = 0;
  for (std::size_t c : tuple) {
    if (c >= dim) throw std::out_of_range("component index beyond dimension");
    r = r * dim + c;
  }
  return r;
}

std::string to_json(const std::vector<IndexTuple>& tuples) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& t : tuples) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c : t) row.push_back(c + 1);
    j.push_back(row);
  }
  return j.dump();
}

std::string to_json(const std::vector<Composition>& comps) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : comps) j.push_back(c.parts);
  return j.dump();
}

std::string to_json(const std::vector<ValleyInterleaving>& orders) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& o : orders) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c : o.order) row.push_back(c + 1);
    j.push_back(row);
  }
  return j.dump();
}

}  // namespace rfbm
