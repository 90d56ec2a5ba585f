#pragma once

#include "drcl/labels.hpp"
#include "drcl/tag/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace drcl::warmstart {

enum class ProtoSource { Structural, Semantic };

/// Disjoint, non-empty node groups from which community centers are formed.
struct ProtoCommunities {
  std::vector<std::vector<int>> groups;
  ProtoSource source = ProtoSource::Structural;

  int k() const noexcept { return static_cast<int>(groups.size()); }
  /// Throws ValidationError unless groups are non-empty, disjoint and inside 0..n-1.
  void validate(int n) const;
};

struct LouvainResult {
  LabelVector labels;
  /// Modularity of the induced partition of the input graph after every
  /// local-move sweep, across all aggregation levels.
  std::vector<double> pass_modularity;
  int levels = 0;
};

/// Multi-level Louvain modularity optimization on the unweighted adjacency.
/// Each sweep visits nodes in a seeded shuffled order; a node moves only on
/// strictly positive gain and equal-gain candidates resolve to the lowest
/// community id. Final labels are numbered by first appearance in node order.
LouvainResult louvain(const tag::TextAttributedGraph& graph, std::uint64_t seed);

struct FilterStats {
  std::vector<int> sizes;
  double mu = 0.0;
  double sigma = 0.0;  // population standard deviation
  double threshold = 0.0;  // mu + 0.5 * sigma
};

struct FilterResult {
  ProtoCommunities proto;
  /// Retained communities renumbered 0..k-1 (in order of original label),
  /// filtered nodes set to kUnassigned.
  LabelVector labels;
  FilterStats stats;
  std::vector<std::string> warnings;
};

/// Keeps communities whose size reaches mu + 0.5 sigma of the size list.
/// When nothing survives, the single largest community is kept and a warning recorded.
FilterResult size_filter(const LabelVector& labels);

/// Group i is the set of nodes labeled i; unassigned nodes are skipped and
/// empty labels produce no group.
ProtoCommunities proto_from_labels(const LabelVector& labels, ProtoSource source);

}  // namespace drcl::warmstart
