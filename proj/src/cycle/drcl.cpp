#include "drcl/cycle/drcl.hpp"

#include "drcl/eval/hungarian.hpp"
#include "drcl/eval/kmeans.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace drcl::cycle {
namespace {

const char* source_name(warmstart::ProtoSource s) {
  return s == warmstart::ProtoSource::Structural ? "structural" : "semantic";
}

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<StageTiming>& sink) : sink_(sink) {}

  template <typename F>
  auto time(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Commit {
      Stopwatch* self;
      const std::string& stage;
      std::chrono::steady_clock::time_point start;
      ~Commit() {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        self->add(stage, dt.count());
      }
    } commit{this, stage, start};
    return f();
  }

 private:
  void add(const std::string& stage, double seconds) {
    for (auto& t : sink_) {
      if (t.stage == stage) {
        t.seconds += seconds;
        return;
      }
    }
    sink_.push_back({stage, seconds});
  }

  std::vector<StageTiming>& sink_;
};

/// Rethrows module failures with the epoch prefixed, keeping the error category.
template <typename F>
auto in_epoch(int epoch, F&& f) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError("epoch " + std::to_string(epoch) + ": " + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError("epoch " + std::to_string(epoch) + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("epoch " + std::to_string(epoch) + ": " + e.what());
  }
}

WarmStartSummary summarize(const WarmStart& ws) {
  WarmStartSummary s;
  s.louvain_communities = ws.louvain.labels.k;
  s.pass_modularity = ws.louvain.pass_modularity;
  s.sizes = ws.filter.stats.sizes;
  s.mu = ws.filter.stats.mu;
  s.sigma = ws.filter.stats.sigma;
  s.threshold = ws.filter.stats.threshold;
  s.k = ws.filter.proto.k();
  s.dropped_nodes = static_cast<int>(
      std::count(ws.filter.labels.labels.begin(), ws.filter.labels.labels.end(), kUnassigned));
  return s;
}

gcn::GcnConfig gcn_config_for(const DrclConfig& config, int epoch) {
  auto g = config.gcn;
  g.loss_scale = config.lambda;
  g.seed = derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(config.reinit_gcn ? epoch : 0));
  return g;
}

tsmm::TsmmConfig tsmm_config_for(const DrclConfig& config, int epoch) {
  auto t = config.tsmm;
  t.seed = derive_seed(config.seed, 2000 + static_cast<std::uint64_t>(epoch));
  return t;
}

std::vector<std::string> texts_of(const tag::TextAttributedGraph& graph) {
  return {graph.texts().begin(), graph.texts().end()};
}

}  // namespace

void DrclConfig::validate() const {
  if (epochs < 1) throw ValidationError("drcl: epochs must be >= 1");
  if (switch_epoch < 0) throw ValidationError("drcl: switch_epoch must be >= 0");
  if (!(lambda >= 0.0)) throw ValidationError("drcl: lambda must be non-negative");
  gcn.validate();
  tsmm.validate();
}

const warmstart::ProtoCommunities& select_proto(int epoch, const warmstart::ProtoCommunities& structural,
                                                const warmstart::ProtoCommunities* semantic,
                                                int switch_epoch) {
  if (semantic && epoch >= switch_epoch && epoch % 2 == 0) return *semantic;
  return structural;
}

const MatrixX& select_features(int epoch, const MatrixX& x, const MatrixX* x_text) {
  if (epoch == 0) return x;
  if (!x_text) {
    throw ValidationError("select_features: text features missing at epoch " + std::to_string(epoch));
  }
  return *x_text;
}

AgreementReport agreement(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DimensionError("agreement: label vectors differ in length");
  if (a.empty()) return {{}, 1.0};
  int ka = 0;
  int kb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || b[i] < 0) throw ValidationError("agreement: labels must be fully assigned");
    ka = std::max(ka, a[i] + 1);
    kb = std::max(kb, b[i] + 1);
  }
  MatrixX counts = MatrixX::Zero(ka, kb);
  for (std::size_t i = 0; i < a.size(); ++i) counts(a[i], b[i]) += 1.0;
  const auto assignment = eval::hungarian(-counts);

  AgreementReport out;
  out.permutation.assign(static_cast<std::size_t>(ka), -1);
  double matched = 0.0;
  for (int la = 0; la < ka; ++la) {
    const int lb = assignment[static_cast<std::size_t>(la)];
    if (lb < kb) {
      out.permutation[static_cast<std::size_t>(la)] = lb;
      matched += counts(la, lb);
    }
  }
  out.fraction = matched / static_cast<double>(a.size());
  return out;
}

MatrixX input_features(const tag::TextAttributedGraph& graph, const DrclConfig& config) {
  if (graph.features()) return *graph.features();
  const auto texts = texts_of(graph);
  const auto vocab = tsmm::Vocab::build(texts, config.tsmm.min_freq, config.tsmm.max_seq_len);
  MatrixX x = tsmm::bag_of_words(texts, vocab);
  if (x.cols() == 0) throw ValidationError("input features: texts contain no words");
  return x;
}

WarmStart warm_start(const tag::TextAttributedGraph& graph, const DrclConfig& config) {
  WarmStart ws;
  ws.louvain = warmstart::louvain(graph, derive_seed(config.seed, 1));
  ws.filter = warmstart::size_filter(ws.louvain.labels);
  return ws;
}

DrclResult run_drcl(const tag::TextAttributedGraph& graph, const DrclConfig& config) {
  config.validate();
  DrclResult result;
  auto& report = result.report;
  report.kind = "drcl";
  Stopwatch clock(report.timings);

  const MatrixX x = clock.time("features", [&] { return input_features(graph, config); });
  const auto texts = texts_of(graph);
  const WarmStart ws = clock.time("warm_start", [&] { return warm_start(graph, config); });
  report.warm_start = summarize(ws);
  report.warnings = ws.filter.warnings;
  const int k = ws.filter.proto.k();

  std::optional<warmstart::ProtoCommunities> semantic;
  std::optional<gcn::EncoderParams> gcn_params;
  std::optional<tsmm::TsmmModel> text_model;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    in_epoch(epoch, [&] {
      const auto& proto =
          select_proto(epoch, ws.filter.proto, semantic ? &*semantic : nullptr, config.switch_epoch);
      const MatrixX& features = select_features(epoch, x, epoch > 0 ? &result.x_text : nullptr);

      const auto gcn_cfg = gcn_config_for(config, epoch);
      const auto g = clock.time("gcn", [&] {
        return gcn::train_gcn_cdm(graph, features, proto, gcn_cfg,
                                  config.reinit_gcn || !gcn_params ? nullptr : &*gcn_params);
      });
      gcn_params = g.params;
      result.y_c = LabelVector(g.labels.labels, k);
      result.h = g.h;

      const auto t = clock.time("tsmm", [&] {
        return tsmm::train_tsmm(texts, result.y_c, tsmm_config_for(config, epoch),
                                config.warm_tsmm ? std::move(text_model) : std::nullopt);
      });
      const auto ex = clock.time("extract", [&] { return tsmm::extract_all(texts, t.model); });
      text_model = t.model;
      result.x_text = ex.features;
      result.y_t = ex.labels;
      semantic = warmstart::proto_from_labels(result.y_t, warmstart::ProtoSource::Semantic);
      if (semantic->k() < k) {
        report.warnings.push_back("epoch " + std::to_string(epoch) + ": text labels use " +
                                  std::to_string(semantic->k()) + " of " + std::to_string(k) +
                                  " classes");
      }
      for (const auto& w : t.warnings) report.warnings.push_back("epoch " + std::to_string(epoch) + ": " + w);

      EpochRecord rec;
      rec.epoch = epoch;
      rec.proto_source = source_name(proto.source);
      rec.k = proto.k();
      rec.loss_gcn = g.final_loss;
      rec.loss_gcn_scaled = config.lambda * g.final_loss;
      rec.loss_tsmm = t.loss;
      rec.loss_total = *rec.loss_gcn_scaled + t.loss;
      rec.staged_acc = t.staged_acc;
      rec.metrics = clock.time("metrics", [&] {
        return eval::evaluate_partition(graph, result.h, result.y_c.labels, graph.truth());
      });
      rec.agreement = agreement(result.y_c.labels, result.y_t.labels).fraction;
      report.epochs.push_back(std::move(rec));
      return 0;
    });
  }
  report.final_metrics = report.epochs.back().metrics;
  report.final_y_c = result.y_c.labels;
  report.final_y_t = result.y_t.labels;
  if (!config.timings) report.timings.clear();
  return result;
}

RunReport ablate_without_tsmm(const tag::TextAttributedGraph& graph, const DrclConfig& config) {
  config.validate();
  RunReport report;
  report.kind = "ablate-no-tsmm";
  Stopwatch clock(report.timings);
  const MatrixX x = clock.time("features", [&] { return input_features(graph, config); });
  const WarmStart ws = clock.time("warm_start", [&] { return warm_start(graph, config); });
  report.warm_start = summarize(ws);
  report.warnings = ws.filter.warnings;

  std::optional<gcn::EncoderParams> params;
  LabelVector y_c;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    in_epoch(epoch, [&] {
      const auto g = clock.time("gcn", [&] {
        return gcn::train_gcn_cdm(graph, x, ws.filter.proto, gcn_config_for(config, epoch),
                                  config.reinit_gcn || !params ? nullptr : &*params);
      });
      params = g.params;
      y_c = g.labels;
      EpochRecord rec;
      rec.epoch = epoch;
      rec.proto_source = source_name(ws.filter.proto.source);
      rec.k = ws.filter.proto.k();
      rec.loss_gcn = g.final_loss;
      rec.loss_gcn_scaled = config.lambda * g.final_loss;
      rec.loss_total = rec.loss_gcn_scaled;
      rec.metrics = clock.time("metrics", [&] {
        return eval::evaluate_partition(graph, g.h, g.labels.labels, graph.truth());
      });
      report.epochs.push_back(std::move(rec));
      return 0;
    });
  }
  report.final_metrics = report.epochs.back().metrics;
  report.final_y_c = y_c.labels;
  if (!config.timings) report.timings.clear();
  return report;
}

RunReport ablate_without_gcn(const tag::TextAttributedGraph& graph, const DrclResult& full,
                             const DrclConfig& config) {
  RunReport report;
  report.kind = "ablate-no-gcn";
  report.warm_start = full.report.warm_start;
  report.warnings = full.report.warnings;
  Stopwatch clock(report.timings);
  const int k = full.report.warm_start.k;
  const auto km = clock.time("kmeans", [&] {
    return eval::kmeans(full.x_text, k, derive_seed(config.seed, 3));
  });
  report.final_metrics = clock.time("metrics", [&] {
    return eval::evaluate_partition(graph, full.x_text, km.labels.labels, graph.truth());
  });
  report.final_y_t = km.labels.labels;
  if (!config.timings) report.timings.clear();
  return report;
}

RunReport ablate_without_gcn(const tag::TextAttributedGraph& graph, const DrclConfig& config) {
  return ablate_without_gcn(graph, run_drcl(graph, config), config);
}

namespace {

struct HeldOut {
  tsmm::SplitPlan split;
  int n_train = 0;
};

HeldOut truth_split(const tag::TextAttributedGraph& graph, const DrclConfig& config) {
  if (!graph.truth()) throw ValidationError("supervised run: graph has no ground-truth labels");
  HeldOut h;
  h.split = tsmm::split_nodes(*graph.truth(), config.tsmm.train_fraction, derive_seed(config.seed, 4));
  h.n_train = static_cast<int>(h.split.train.size());
  return h;
}

SupervisionRow score(const std::string& kind, double fraction, int used,
                     const std::vector<int>& test, const LabelVector& truth,
                     const std::vector<int>& predicted) {
  std::vector<int> t;
  std::vector<int> p;
  for (int v : test) {
    t.push_back(truth[static_cast<std::size_t>(v)]);
    p.push_back(predicted[static_cast<std::size_t>(v)]);
  }
  SupervisionRow row;
  row.supervision = kind;
  row.fraction = fraction;
  row.labels_used = used;
  if (!t.empty()) {
    row.acc = eval::acc(t, p);
    row.f1 = eval::macro_f1(t, p);
    row.ari = eval::ari(t, p);
  }
  return row;
}

}  // namespace

SupervisionRow supervised_fraction_run(const tag::TextAttributedGraph& graph, double fraction,
                                       const DrclConfig& config) {
  config.validate();
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("supervised run: fraction must lie in (0, 1]");
  }
  const auto held = truth_split(graph, config);
  const auto& truth = *graph.truth();
  const int used = static_cast<int>(std::ceil(fraction * held.n_train - 1e-9));
  tsmm::SplitPlan plan;
  plan.train = tsmm::stratified_subset(held.split.train, truth, used, derive_seed(config.seed, 5));
  plan.test = held.split.test;

  auto tcfg = config.tsmm;
  tcfg.seed = derive_seed(config.seed, 6);
  tcfg.passes = config.tsmm.passes * config.epochs;
  const auto texts = texts_of(graph);
  auto model = tsmm::init_model(texts, truth.k, tcfg);
  const auto trained = tsmm::train_on_split(texts, truth, plan, tcfg, std::move(model));
  const auto ex = tsmm::extract_all(texts, trained.model);
  return score("truth", fraction, used, plan.test, truth, ex.labels.labels);
}

SupervisionReport supervision_comparison(const tag::TextAttributedGraph& graph,
                                         const std::vector<double>& fractions,
                                         const DrclConfig& config, const DrclResult* pseudo) {
  SupervisionReport report;
  const auto held = truth_split(graph, config);
  report.test_nodes = static_cast<int>(held.split.test.size());
  for (double f : fractions) report.rows.push_back(supervised_fraction_run(graph, f, config));
  if (pseudo) {
    report.rows.push_back(
        score("pseudo", 0.0, 0, held.split.test, *graph.truth(), pseudo->y_t.labels));
    report.warnings = pseudo->report.warnings;
  }
  return report;
}

}  // namespace drcl::cycle
