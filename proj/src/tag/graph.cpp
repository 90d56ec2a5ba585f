#include "drcl/tag/graph.hpp"

#include <algorithm>
#include <cmath>

namespace drcl::tag {

TextAttributedGraph TextAttributedGraph::build(int n, std::vector<Edge> raw_edges,
                                               std::vector<std::string> texts,
                                               std::optional<MatrixX> features,
                                               std::optional<LabelVector> truth,
                                               EdgeCleanup* cleanup) {
  if (n < 0) throw ValidationError("node count must be non-negative");
  if (static_cast<int>(texts.size()) != n) {
    throw ValidationError("expected " + std::to_string(n) + " texts, got " +
                          std::to_string(texts.size()));
  }
  if (features && features->rows() != n) {
    throw ValidationError("feature matrix has " + std::to_string(features->rows()) +
                          " rows for " + std::to_string(n) + " nodes");
  }
  if (truth && static_cast<int>(truth->size()) != n) {
    throw ValidationError("truth labels do not cover every node");
  }

  EdgeCleanup stats;
  std::vector<Edge> edges;
  edges.reserve(raw_edges.size());
  for (auto [u, v] : raw_edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw ValidationError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                            ") references a node outside 0.." + std::to_string(n - 1));
    }
    if (u == v) {
      ++stats.self_loops;
      continue;
    }
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges.begin(), edges.end());
  const auto unique_end = std::unique(edges.begin(), edges.end());
  stats.duplicates = static_cast<std::size_t>(edges.end() - unique_end);
  edges.erase(unique_end, edges.end());
  if (cleanup) *cleanup = stats;

  TextAttributedGraph g;
  g.n_ = n;
  g.edges_ = std::move(edges);
  g.texts_ = std::move(texts);
  g.features_ = std::move(features);
  g.truth_ = std::move(truth);

  std::vector<Eigen::Triplet<Real>> triplets;
  triplets.reserve(2 * g.edges_.size());
  g.neighbors_.assign(static_cast<std::size_t>(n), {});
  g.degrees_ = Eigen::VectorXi::Zero(n);
  for (auto [u, v] : g.edges_) {
    triplets.emplace_back(u, v, 1.0);
    triplets.emplace_back(v, u, 1.0);
    g.neighbors_[u].push_back(v);
    g.neighbors_[v].push_back(u);
    ++g.degrees_[u];
    ++g.degrees_[v];
  }
  for (auto& list : g.neighbors_) std::sort(list.begin(), list.end());
  g.adjacency_.resize(n, n);
  g.adjacency_.setFromTriplets(triplets.begin(), triplets.end());
  g.adjacency_.makeCompressed();
  return g;
}

void TextAttributedGraph::set_original_ids(std::vector<std::string> ids) {
  if (static_cast<int>(ids.size()) != n_) throw ValidationError("original id map has wrong size");
  original_ids_ = std::move(ids);
}

bool TextAttributedGraph::operator==(const TextAttributedGraph& other) const {
  if (n_ != other.n_ || edges_ != other.edges_ || texts_ != other.texts_ ||
      truth_ != other.truth_ || original_ids_ != other.original_ids_) {
    return false;
  }
  if (features_.has_value() != other.features_.has_value()) return false;
  if (features_ && (features_->rows() != other.features_->rows() ||
                    features_->cols() != other.features_->cols() ||
                    *features_ != *other.features_)) {
    return false;
  }
  return true;
}

SparseMatrix normalized_adjacency(const TextAttributedGraph& graph) {
  const int n = graph.node_count();
  VectorX inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(graph.degrees()[i] + 1.0);

  std::vector<Eigen::Triplet<Real>> triplets;
  triplets.reserve(2 * graph.edges().size() + static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, inv_sqrt[i] * inv_sqrt[i]);
  for (auto [u, v] : graph.edges()) {
    const Real w = inv_sqrt[u] * inv_sqrt[v];
    triplets.emplace_back(u, v, w);
    triplets.emplace_back(v, u, w);
  }
  SparseMatrix out(n, n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

}  // namespace drcl::tag
