#pragma once

// Index combinatorics: shuffles of index tuples, {1,2}-compositions and the
// ascending-simplex decomposition of the valley regions
//   A_j^n = { u_j = min(u), u_1 > ... > u_{j-1}, u_{j+1} < ... < u_n }.

#include <cstddef>
#include <string>
#include <vector>

namespace rfbm {

/// Ordered component indices (i_1, ..., i_n), 0-based.
using IndexTuple = std::vector<std::size_t>;

/// Parts in {1, 2}; prefix(j) = n_1 + ... + n_j.
struct Composition {
  std::vector<int> parts;

  int total() const;
  int prefix(std::size_t j) const;
  bool operator==(const Composition&) const = default;
};

/// A linear extension of the valley order: `order[p]` is the 0-based
/// coordinate that occupies slot p of the ascending chain v_0 < v_1 < ...
struct ValleyInterleaving {
  std::vector<std::size_t> order;
  bool operator==(const ValleyInterleaving&) const = default;
};

/// All C(n+m, n) position interleavings of a and b, with multiplicity.
std::vector<IndexTuple> shuffles(const IndexTuple& a, const IndexTuple& b);

/// D_n^k: tuples in {1,2}^k summing to n, lexicographic order. Empty outside
/// ceil(n/2) <= k <= n.
std::vector<Composition> compositions(int n, int k);

/// The C(n-1, j-1) ascending orders realizing A_j^n, for 1 <= j <= n (j is
/// 1-based to match the valley index).
std::vector<ValleyInterleaving> valley_interleavings(std::size_t n, std::size_t j);

/// All d^n index tuples in lexicographic order.
std::vector<IndexTuple> all_tuples(std::size_t dim, std::size_t n);

/// Lexicographic rank of a tuple among all_tuples(dim, n).
std::size_t tuple_rank(const IndexTuple& tuple, std::size_t dim);

/// JSON text of an enumeration, 1-based as in mathematical notation.
std::string to_json(const std::vector<IndexTuple>& tuples);
std::string to_json(const std::vector<Composition>& comps);
std::string to_json(const std::vector<ValleyInterleaving>& orders);

}  // namespace rfbm
