#pragma once

// Straight-line reference implementations. None of these call into the
// library's metric code; they work from raw edge lists and label vectors.

#include "drcl/rng.hpp"
#include "drcl/tag/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<std::vector<double>> dense_adjacency(int n, const std::vector<drcl::tag::Edge>& edges) {
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (auto [u, v] : edges) {
    a[u][v] = 1.0;
    a[v][u] = 1.0;
  }
  return a;
}

/// (1/2M) Σ_ij (a_ij - d_i d_j / 2M) [c_i == c_j], as a double loop.
inline double modularity(int n, const std::vector<drcl::tag::Edge>& edges, const std::vector<int>& c) {
  const auto a = dense_adjacency(n, edges);
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i) d[i] = std::accumulate(a[i].begin(), a[i].end(), 0.0);
  const double two_m = std::accumulate(d.begin(), d.end(), 0.0);
  double q = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (c[i] == c[j]) q += a[i][j] - d[i] * d[j] / two_m;
    }
  }
  return q / two_m;
}

/// -(1/2M) Σ_ij Σ_k (a_ij - d_i d_j / 2M) r_ik r_jk.
inline double soft_modularity_loss(int n, const std::vector<drcl::tag::Edge>& edges,
                                   const std::vector<std::vector<double>>& r) {
  const auto a = dense_adjacency(n, edges);
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i) d[i] = std::accumulate(a[i].begin(), a[i].end(), 0.0);
  const double two_m = std::accumulate(d.begin(), d.end(), 0.0);
  const std::size_t k = r.front().size();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double overlap = 0.0;
      for (std::size_t c = 0; c < k; ++c) overlap += r[i][c] * r[j][c];
      total += (a[i][j] - d[i] * d[j] / two_m) * overlap;
    }
  }
  return -total / two_m;
}

/// Every set partition of n items as a restricted growth string.
inline std::vector<std::vector<int>> all_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  const auto rec = [&](auto&& self, int i, int used) -> void {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (int c = 0; c <= used; ++c) {
      cur[i] = c;
      self(self, i + 1, std::max(used, c + 1));
    }
  };
  if (n > 0) {
    cur[0] = 0;
    rec(rec, 1, 1);
  }
  return out;
}

inline double best_modularity(int n, const std::vector<drcl::tag::Edge>& edges) {
  double best = -1.0;
  for (const auto& p : all_partitions(n)) best = std::max(best, modularity(n, edges, p));
  return best;
}

inline double entropy_of(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [label, c] : counts) h -= c / n * std::log(c / n);
  return h;
}

/// Mutual information over the arithmetic mean of entropies; 1 when both are
/// single clusters, 0 when only one is.
inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> ca;
  std::map<int, double> cb;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    joint[{a[i], b[i]}] += 1;
  }
  const double ha = entropy_of(ca, n);
  const double hb = entropy_of(cb, n);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    const double pij = c / n;
    mi += pij * std::log(pij / ((ca[key.first] / n) * (cb[key.second] / n)));
  }
  return std::clamp(mi / ((ha + hb) / 2.0), 0.0, 1.0);
}

/// Adjusted Rand index from explicit pair counting.
inline double ari(const std::vector<int>& a, const std::vector<int>& b) {
  double both = 0.0;
  double same_a = 0.0;
  double same_b = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      both += (sa && sb) ? 1.0 : 0.0;
      same_a += sa ? 1.0 : 0.0;
      same_b += sb ? 1.0 : 0.0;
      pairs += 1.0;
    }
  }
  if (pairs == 0.0) return 1.0;
  const double expected = same_a * same_b / pairs;
  const double top = (same_a + same_b) / 2.0;
  if (top == expected) return 1.0;
  return (both - expected) / (top - expected);
}

inline std::vector<int> densify(const std::vector<int>& v, int& k) {
  std::map<int, int> ids;
  for (int x : v) ids.emplace(x, 0);
  k = 0;
  for (auto& [x, id] : ids) id = k++;
  std::vector<int> out;
  for (int x : v) out.push_back(ids[x]);
  return out;
}

/// Best matched fraction over every bijection of the padded label sets.
inline double acc(const std::vector<int>& truth, const std::vector<int>& pred) {
  int kt = 0;
  int kp = 0;
  const auto t = densify(truth, kt);
  const auto p = densify(pred, kp);
  std::vector<int> perm(std::max(kt, kp));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < t.size(); ++i) hit += perm[p[i]] == t[i] ? 1 : 0;
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(t.size());
}

/// Two triangles {0,1,2} and {3,4,5} joined by the edge (2,3).
inline drcl::tag::TextAttributedGraph barbell() {
  return drcl::tag::TextAttributedGraph::build(
      6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}}, std::vector<std::string>(6, "x"));
}

struct RandomCase {
  drcl::tag::TextAttributedGraph graph;
  std::vector<int> a;
  std::vector<int> b;
};

/// Random graph on 2..7 nodes with at least one edge, plus two random labelings
/// with at most `max_k` labels each.
inline RandomCase random_case(std::uint64_t seed, int max_k = 5) {
  drcl::SeededRng rng(seed);
  const int n = 2 + static_cast<int>(rng.below(6));
  std::vector<drcl::tag::Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(0.5)) edges.emplace_back(i, j);
    }
  }
  if (edges.empty()) edges.emplace_back(0, 1);
  const auto draw = [&] {
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(max_k, n))));
    std::vector<int> out(n);
    for (auto& x : out) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    return out;
  };
  auto a = draw();
  auto b = draw();
  return {drcl::tag::TextAttributedGraph::build(n, edges, std::vector<std::string>(n, "x")), a, b};
}

}  // namespace oracle
