#pragma once

#include "drcl/common.hpp"
#include "drcl/labels.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace drcl::tag {

using Edge = std::pair<int, int>;

/// Counts of input edges discarded while building a graph.
struct EdgeCleanup {
  std::size_t duplicates = 0;
  std::size_t self_loops = 0;
};

/// Undirected, unweighted graph whose nodes carry text, optional numeric
/// features and optional held-out labels.
///
/// Invariants (checked at construction): the adjacency is symmetric with a
/// zero diagonal, degrees are its row sums, texts has n entries and the
/// feature matrix, when present, has n rows. Immutable afterwards.
class TextAttributedGraph {
 public:
  /// Builds the graph from a raw edge list. Self-loops and duplicate pairs
  /// (in either orientation) are dropped and counted in `cleanup`.
  static TextAttributedGraph build(int n, std::vector<Edge> raw_edges,
                                   std::vector<std::string> texts,
                                   std::optional<MatrixX> features = std::nullopt,
                                   std::optional<LabelVector> truth = std::nullopt,
                                   EdgeCleanup* cleanup = nullptr);

  int node_count() const noexcept { return n_; }
  /// M = |E|.
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  /// Deduplicated edges with first < second, sorted.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const SparseMatrix& adjacency() const noexcept { return adjacency_; }
  const Eigen::VectorXi& degrees() const noexcept { return degrees_; }
  const std::vector<std::vector<int>>& neighbors() const noexcept { return neighbors_; }

  const std::vector<std::string>& texts() const noexcept { return texts_; }
  const std::optional<MatrixX>& features() const noexcept { return features_; }
  const std::optional<LabelVector>& truth() const noexcept { return truth_; }

  /// Original node ids from the input file; empty for generated graphs.
  const std::vector<std::string>& original_ids() const noexcept { return original_ids_; }
  void set_original_ids(std::vector<std::string> ids);

  bool operator==(const TextAttributedGraph& other) const;

 private:
  TextAttributedGraph() = default;

  int n_ = 0;
  std::vector<Edge> edges_;
  SparseMatrix adjacency_;
  Eigen::VectorXi degrees_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::string> texts_;
  std::optional<MatrixX> features_;
  std::optional<LabelVector> truth_;
  std::vector<std::string> original_ids_;
};

/// Ã = D̂^{-1/2} (A + I) D̂^{-1/2} with D̂ the degree matrix of A + I.
SparseMatrix normalized_adjacency(const TextAttributedGraph& graph);

}  // namespace drcl::tag
