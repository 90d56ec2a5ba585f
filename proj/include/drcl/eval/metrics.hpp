#pragma once

#include "drcl/common.hpp"
#include "drcl/labels.hpp"
#include "drcl/tag/graph.hpp"

#include <optional>
#include <span>
#include <vector>

namespace drcl::eval {

/// Contingency counts between two labelings. Labels are compacted to dense
/// indices in ascending order of their values before counting.
struct ConfusionMatrix {
  MatrixX counts;  // k_true x k_pred
  VectorX row_totals;
  VectorX col_totals;
  double total = 0.0;

  static ConfusionMatrix from(std::span<const int> truth, std::span<const int> pred);
};

/// Returned by dunn() when every cluster has zero diameter.
inline constexpr double kDunnSentinel = 1e12;

/// Hard-partition modularity (1/2M) Σ_ij (a_ij - d_i d_j / 2M) [c_i == c_j].
double modularity_q(const tag::TextAttributedGraph& graph, std::span<const int> labels);

/// Mutual information over the arithmetic mean of the two entropies (natural log).
double nmi(std::span<const int> a, std::span<const int> b);
double ari(std::span<const int> a, std::span<const int> b);

/// Best matched fraction over label bijections (Hungarian on the confusion matrix).
double acc(std::span<const int> truth, std::span<const int> pred);

/// Predicted clusters are relabeled by the accuracy-optimal bijection, then
/// per-class F1 is averaged over the true classes. A class with no matched
/// cluster scores 0.
double macro_f1(std::span<const int> truth, std::span<const int> pred);

/// Optimal bijection from predicted cluster to true class, keyed by the
/// compacted indices of ConfusionMatrix::from. -1 for unmatched clusters.
std::vector<int> best_mapping(const ConfusionMatrix& confusion);

/// Davies–Bouldin index with Euclidean centroid distances.
double dbi(const MatrixX& points, std::span<const int> labels);

/// Dunn index: smallest single-linkage gap between clusters over the largest
/// cluster diameter. kDunnSentinel when all diameters vanish; 0 with fewer than 2 clusters.
double dunn(const MatrixX& points, std::span<const int> labels);

/// The seven per-partition numbers reported per epoch. External metrics are
/// empty when no ground truth is available.
struct MetricSet {
  double dbi = 0.0;
  double di = 0.0;
  double q = 0.0;
  std::optional<double> nmi;
  std::optional<double> acc;
  std::optional<double> f1;
  std::optional<double> ari;

  bool operator==(const MetricSet&) const = default;
};

/// Computes all seven. External metrics use only the nodes that carry a truth label.
MetricSet evaluate_partition(const tag::TextAttributedGraph& graph, const MatrixX& embedding,
                             std::span<const int> labels,
                             const std::optional<LabelVector>& truth);

}  // namespace drcl::eval
