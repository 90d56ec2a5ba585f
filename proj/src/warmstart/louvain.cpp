#include "drcl/warmstart/warmstart.hpp"

#include "drcl/eval/metrics.hpp"
#include "drcl/rng.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

namespace drcl::warmstart {
namespace {

/// Symmetric weighted graph; self-loop weight counts both directions of every
/// collapsed internal edge, so strength() sums to 2M at every level.
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;  // excludes self-loops
  std::vector<double> self_loop;
  std::vector<double> strength;

  int size() const { return static_cast<int>(adj.size()); }
};

LevelGraph from_graph(const tag::TextAttributedGraph& g) {
  LevelGraph lg;
  const int n = g.node_count();
  lg.adj.resize(static_cast<std::size_t>(n));
  lg.self_loop.assign(static_cast<std::size_t>(n), 0.0);
  lg.strength.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j : g.neighbors()[i]) lg.adj[i].emplace_back(j, 1.0);
    lg.strength[i] = g.degrees()[i];
  }
  return lg;
}

/// Local moving until a full sweep makes no move. Returns true if any node moved.
bool local_moves(const LevelGraph& g, std::vector<int>& community, double two_m,
                 const std::vector<int>& order, const std::function<void()>& after_sweep) {
  const int n = g.size();
  std::vector<double> total(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) total[community[i]] += g.strength[i];

  std::vector<double> link(static_cast<std::size_t>(n), 0.0);
  std::vector<int> touched;
  bool any_move = false;
  for (;;) {
    bool moved = false;
    for (int i : order) {
      const int own = community[i];
      const double ki = g.strength[i];
      touched.clear();
      for (auto [j, w] : g.adj[i]) {
        const int c = community[j];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += w;
      }
      total[own] -= ki;
      const double own_gain = link[own] - total[own] * ki / two_m;

      int best = own;
      double best_gain = own_gain;
      std::sort(touched.begin(), touched.end());
      for (int c : touched) {
        if (c == own) continue;
        const double gain = link[c] - total[c] * ki / two_m;
        // Candidates arrive in ascending id order, so ties keep the lowest id.
        if (gain > best_gain + 1e-12 * std::max(1.0, std::abs(best_gain))) {
          best = c;
          best_gain = gain;
        }
      }
      total[best] += ki;
      for (int c : touched) link[c] = 0.0;
      if (best != own) {
        community[i] = best;
        moved = true;
      }
    }
    if (!moved) break;
    any_move = true;
    after_sweep();
  }
  return any_move;
}

std::vector<int> renumber(const std::vector<int>& community, int& count) {
  std::map<int, int> ids;
  std::vector<int> out(community.size());
  for (std::size_t i = 0; i < community.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(community[i], static_cast<int>(ids.size()));
    out[i] = it->second;
  }
  count = static_cast<int>(ids.size());
  return out;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<int>& community, int count) {
  LevelGraph out;
  out.adj.resize(static_cast<std::size_t>(count));
  out.self_loop.assign(static_cast<std::size_t>(count), 0.0);
  out.strength.assign(static_cast<std::size_t>(count), 0.0);
  std::vector<std::map<int, double>> acc(static_cast<std::size_t>(count));
  for (int i = 0; i < g.size(); ++i) {
    const int ci = community[i];
    out.strength[ci] += g.strength[i];
    out.self_loop[ci] += g.self_loop[i];
    for (auto [j, w] : g.adj[i]) {
      const int cj = community[j];
      if (ci == cj) out.self_loop[ci] += w;
      else acc[ci][cj] += w;
    }
  }
  for (int c = 0; c < count; ++c) {
    for (auto [d, w] : acc[c]) out.adj[c].emplace_back(d, w);
  }
  return out;
}

}  // namespace

LouvainResult louvain(const tag::TextAttributedGraph& graph, std::uint64_t seed) {
  if (graph.edge_count() == 0) {
    throw ValidationError(
        "louvain: graph has no edges; structural warm start is impossible, use a feature-only "
        "clustering (e.g. k-means on node features) instead");
  }
  const int n = graph.node_count();
  const double two_m = 2.0 * graph.edge_count();
  SeededRng rng(seed);

  LouvainResult result;
  std::vector<int> node_to_level(static_cast<std::size_t>(n));
  std::iota(node_to_level.begin(), node_to_level.end(), 0);
  LevelGraph level = from_graph(graph);
  std::vector<int> community(static_cast<std::size_t>(n));
  std::iota(community.begin(), community.end(), 0);

  const auto record = [&] {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[i] = community[node_to_level[i]];
    result.pass_modularity.push_back(eval::modularity_q(graph, labels));
  };
  record();

  for (;;) {
    std::vector<int> order(static_cast<std::size_t>(level.size()));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<int>(order));
    ++result.levels;
    const bool moved = local_moves(level, community, two_m, order, record);
    if (!moved) break;

    int count = 0;
    const auto dense = renumber(community, count);
    level = aggregate(level, dense, count);
    for (auto& v : node_to_level) v = dense[v];
    community.resize(static_cast<std::size_t>(count));
    std::iota(community.begin(), community.end(), 0);
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[i] = community[node_to_level[i]];
  result.labels = LabelVector(std::move(labels), 0).compacted();
  return result;
}

}  // namespace drcl::warmstart
