#pragma once

#include "drcl/cycle/report.hpp"
#include "drcl/gcn/gcn_cdm.hpp"
#include "drcl/tag/graph.hpp"
#include "drcl/tsmm/train.hpp"
#include "drcl/warmstart/warmstart.hpp"

#include <cstdint>
#include <vector>

namespace drcl::cycle {

struct DrclConfig {
  int epochs = 20;
  /// First epoch at which the semantic groups may replace the structural ones.
  int switch_epoch = 10;
  double lambda = 0.001;
  gcn::GcnConfig gcn;
  tsmm::TsmmConfig tsmm;
  /// Fresh GCN-CDM parameters every epoch; otherwise reuse them when shapes allow.
  bool reinit_gcn = true;
  /// Continue TSMM training from the previous epoch's weights.
  bool warm_tsmm = true;
  bool timings = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Semantic groups iff epoch >= switch_epoch, epoch is even and they exist.
const warmstart::ProtoCommunities& select_proto(int epoch, const warmstart::ProtoCommunities& structural,
                                                const warmstart::ProtoCommunities* semantic,
                                                int switch_epoch = 10);

/// The raw features at epoch 0, the text features afterwards.
const MatrixX& select_features(int epoch, const MatrixX& x, const MatrixX* x_text);

struct AgreementReport {
  /// permutation[label of a] = matched label of b, -1 when unmatched.
  std::vector<int> permutation;
  double fraction = 0.0;
};

/// Best one-to-one relabeling of `a` onto `b` and the share of nodes it matches.
AgreementReport agreement(std::span<const int> a, std::span<const int> b);

/// Node features when the graph has them, else bag-of-words rows over its texts.
MatrixX input_features(const tag::TextAttributedGraph& graph, const DrclConfig& config);

struct WarmStart {
  warmstart::LouvainResult louvain;
  warmstart::FilterResult filter;
};

WarmStart warm_start(const tag::TextAttributedGraph& graph, const DrclConfig& config);

struct DrclResult {
  LabelVector y_c;
  LabelVector y_t;
  MatrixX h;       // final GCN-CDM embeddings
  MatrixX x_text;  // final TSMM features
  RunReport report;
};

DrclResult run_drcl(const tag::TextAttributedGraph& graph, const DrclConfig& config);

/// Warm start plus GCN-CDM on the raw features with structural groups every epoch.
RunReport ablate_without_tsmm(const tag::TextAttributedGraph& graph, const DrclConfig& config);

/// k-means on the text features of a finished run, with the warm-start k.
RunReport ablate_without_gcn(const tag::TextAttributedGraph& graph, const DrclResult& full,
                             const DrclConfig& config);
RunReport ablate_without_gcn(const tag::TextAttributedGraph& graph, const DrclConfig& config);

/// TSMM trained on ceil(fraction * |train split|) true labels, scored on the
/// held-out split. The training budget matches a full run: epochs x passes.
SupervisionRow supervised_fraction_run(const tag::TextAttributedGraph& graph, double fraction,
                                       const DrclConfig& config);

/// Truth-supervised rows for every fraction, plus the pseudo-label row of a
/// full run scored on the same held-out nodes when `pseudo` is given.
SupervisionReport supervision_comparison(const tag::TextAttributedGraph& graph,
                                         const std::vector<double>& fractions,
                                         const DrclConfig& config, const DrclResult* pseudo);

}  // namespace drcl::cycle
