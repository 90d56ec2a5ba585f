#pragma once

#include "drcl/tsmm/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace drcl::tsmm {

struct SplitPlan {
  std::vector<int> train;
  std::vector<int> test;
};

/// Seeded split of the labeled nodes (label >= 0). Stratified by label when
/// every class present has at least two members, else a plain shuffle.
SplitPlan split_nodes(const LabelVector& labels, double train_fraction, std::uint64_t seed);

/// `count` nodes drawn from `pool`, allocated across labels in proportion to
/// their share of the pool (largest remainders first, lowest label on ties).
std::vector<int> stratified_subset(const std::vector<int>& pool, const LabelVector& labels,
                                   int count, std::uint64_t seed);

struct TrainResult {
  TsmmModel model;
  /// Held-out accuracy against the supervising labels, eval_stages per pass.
  std::vector<double> staged_acc;
  std::vector<double> batch_losses;
  /// Mean training cross-entropy over the last pass.
  double loss = 0.0;
  SplitPlan split;
  std::vector<std::string> warnings;
};

/// Vocabulary from `texts` plus freshly initialized parameters.
TsmmModel init_model(std::span<const std::string> texts, int k, const TsmmConfig& config);

/// Fits the classifier to `labels` on a seeded split of the labeled nodes.
/// Continues from `warm` when given, else starts from init_model. The
/// learning-rate schedule spans the passes of this call.
TrainResult train_tsmm(std::span<const std::string> texts, const LabelVector& labels,
                       const TsmmConfig& config, std::optional<TsmmModel> warm = std::nullopt);

/// Same, on an explicit split.
TrainResult train_on_split(std::span<const std::string> texts, const LabelVector& labels,
                           const SplitPlan& split, const TsmmConfig& config, TsmmModel model);

struct Extraction {
  MatrixX features;  // n x d_model pooled embeddings
  MatrixX probs;     // n x k
  LabelVector labels;
};

Extraction extract_all(std::span<const std::string> texts, const TsmmModel& model);

/// Plain accuracy of the model's predictions on `nodes` against `labels`.
double accuracy_on(std::span<const std::string> texts, const std::vector<int>& nodes,
                   const LabelVector& labels, const TsmmModel& model);

}  // namespace drcl::tsmm
