#pragma once

#include "drcl/eval/metrics.hpp"
#include "drcl/labels.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace drcl::cycle {

inline constexpr int kReportSchemaVersion = 1;

struct EpochRecord {
  int epoch = 0;
  std::string proto_source;  // "structural" or "semantic"
  int k = 0;
  /// Modularity loss after the last GCN-CDM step, before and after lambda.
  std::optional<double> loss_gcn;
  std::optional<double> loss_gcn_scaled;
  std::optional<double> loss_tsmm;
  /// lambda * loss_gcn + loss_tsmm.
  std::optional<double> loss_total;
  std::vector<double> staged_acc;
  eval::MetricSet metrics;
  std::optional<double> agreement;

  bool operator==(const EpochRecord&) const = default;
};

struct WarmStartSummary {
  int louvain_communities = 0;
  std::vector<double> pass_modularity;
  std::vector<int> sizes;
  double mu = 0.0;
  double sigma = 0.0;
  double threshold = 0.0;
  int k = 0;
  int dropped_nodes = 0;

  bool operator==(const WarmStartSummary&) const = default;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;

  bool operator==(const StageTiming&) const = default;
};

struct RunReport {
  int schema_version = kReportSchemaVersion;
  /// "drcl", "ablate-no-tsmm" or "ablate-no-gcn".
  std::string kind = "drcl";
  std::map<std::string, std::string> config;
  WarmStartSummary warm_start;
  std::vector<EpochRecord> epochs;
  /// Metrics of the final partition (the last epoch, or the k-means clustering).
  std::optional<eval::MetricSet> final_metrics;
  std::vector<int> final_y_c;
  std::vector<int> final_y_t;
  std::vector<std::string> warnings;
  std::vector<StageTiming> timings;

  bool operator==(const RunReport&) const = default;
};

struct SupervisionRow {
  std::string supervision;  // "truth" or "pseudo"
  double fraction = 0.0;
  int labels_used = 0;
  double acc = 0.0;
  double f1 = 0.0;
  double ari = 0.0;

  bool operator==(const SupervisionRow&) const = default;
};

struct SupervisionReport {
  int schema_version = kReportSchemaVersion;
  std::map<std::string, std::string> config;
  int test_nodes = 0;
  std::vector<SupervisionRow> rows;
  std::vector<std::string> warnings;

  bool operator==(const SupervisionReport&) const = default;
};

}  // namespace drcl::cycle
