#include "drcl/tsmm/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace drcl::tsmm {
namespace {

std::map<int, std::vector<int>> by_label(const std::vector<int>& nodes, const LabelVector& labels) {
  std::map<int, std::vector<int>> groups;
  for (int v : nodes) groups[labels[static_cast<std::size_t>(v)]].push_back(v);
  return groups;
}

/// Optimizer steps in one pass: batches are cut at every stage boundary.
long steps_per_pass(long n_train, long batch_size, long stages) {
  long steps = 0;
  long processed = 0;
  for (long stage = 1; stage <= stages; ++stage) {
    const long boundary = (stage * n_train + stages - 1) / stages;
    while (processed < boundary) {
      processed += std::min(batch_size, boundary - processed);
      ++steps;
    }
  }
  return steps;
}

RowVectorX predict_probs(const TsmmModel& model, const std::vector<int>& ids) {
  Tape tape;
  const auto bm = bind(tape, model, false);
  const Var logits = classify(bm, encode_text(bm, ids));
  return ad::softmax_rows_value<Real>(logits.value()).row(0);
}

}  // namespace

SplitPlan split_nodes(const LabelVector& labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("split: train_fraction must lie strictly between 0 and 1");
  }
  std::vector<int> eligible;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) eligible.push_back(static_cast<int>(i));
  }
  SeededRng rng(seed);
  SplitPlan plan;
  auto groups = by_label(eligible, labels);
  const bool stratify =
      std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.second.size() >= 2; });
  if (stratify) {
    for (auto& [label, members] : groups) {
      rng.shuffle(std::span<int>(members));
      const auto size = static_cast<double>(members.size());
      auto n_train = static_cast<std::size_t>(std::lround(train_fraction * size));
      n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
      plan.train.insert(plan.train.end(), members.begin(), members.begin() + n_train);
      plan.test.insert(plan.test.end(), members.begin() + n_train, members.end());
    }
  } else {
    rng.shuffle(std::span<int>(eligible));
    auto n_train = static_cast<std::size_t>(std::lround(train_fraction * eligible.size()));
    if (eligible.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, eligible.size() - 1);
    else n_train = eligible.size();
    plan.train.assign(eligible.begin(), eligible.begin() + n_train);
    plan.test.assign(eligible.begin() + n_train, eligible.end());
  }
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  return plan;
}

std::vector<int> stratified_subset(const std::vector<int>& pool, const LabelVector& labels,
                                   int count, std::uint64_t seed) {
  if (count < 0 || count > static_cast<int>(pool.size())) {
    throw ValidationError("stratified_subset: count " + std::to_string(count) + " outside 0.." +
                          std::to_string(pool.size()));
  }
  auto groups = by_label(pool, labels);
  const double total = static_cast<double>(pool.size());
  std::vector<std::pair<int, std::size_t>> quota;  // label, floor share
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (const auto& [label, members] : groups) {
    const double exact = count * static_cast<double>(members.size()) / total;
    const auto base = static_cast<std::size_t>(std::floor(exact));
    quota.emplace_back(label, base);
    remainders.emplace_back(exact - static_cast<double>(base), label);
    assigned += static_cast<int>(base);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < count && i < remainders.size(); ++i, ++assigned) {
    for (auto& q : quota) {
      if (q.first == remainders[i].second) ++q.second;
    }
  }

  SeededRng rng(seed);
  std::vector<int> out;
  for (const auto& [label, take] : quota) {
    auto members = groups[label];
    rng.shuffle(std::span<int>(members));
    out.insert(out.end(), members.begin(), members.begin() + static_cast<long>(take));
  }
  std::sort(out.begin(), out.end());
  return out;
}

TsmmModel init_model(std::span<const std::string> texts, int k, const TsmmConfig& config) {
  config.validate();
  SeededRng rng(derive_seed(config.seed, 100));
  return TsmmModel::init(Vocab::build(texts, config.min_freq, config.max_seq_len), k, config, rng);
}

TrainResult train_tsmm(std::span<const std::string> texts, const LabelVector& labels,
                       const TsmmConfig& config, std::optional<TsmmModel> warm) {
  config.validate();
  if (labels.size() != texts.size()) {
    throw DimensionError("train_tsmm: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(texts.size()) + " texts");
  }
  const auto split = split_nodes(labels, config.train_fraction, derive_seed(config.seed, 0));
  TsmmModel model = warm && warm->k == labels.k ? std::move(*warm) : init_model(texts, labels.k, config);
  return train_on_split(texts, labels, split, config, std::move(model));
}

TrainResult train_on_split(std::span<const std::string> texts, const LabelVector& labels,
                           const SplitPlan& split, const TsmmConfig& config, TsmmModel model) {
  config.validate();
  if (split.train.empty()) throw ValidationError("train_tsmm: no labeled training nodes");
  for (int v : split.train) {
    const int y = labels[static_cast<std::size_t>(v)];
    if (y < 0 || y >= model.k) {
      throw ValidationError("train_tsmm: label " + std::to_string(y) + " of node " +
                            std::to_string(v) + " outside 0.." + std::to_string(model.k - 1));
    }
  }

  TrainResult result;
  result.split = split;
  std::set<int> present;
  for (int v : split.train) present.insert(labels[static_cast<std::size_t>(v)]);
  if (static_cast<int>(present.size()) < model.k) {
    result.warnings.push_back("tsmm: training split covers " + std::to_string(present.size()) +
                              " of " + std::to_string(model.k) + " classes");
  }

  std::vector<std::vector<int>> ids(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) ids[i] = model.vocab.tokenize(texts[i]);
  // Without a held-out part the stages report training accuracy.
  const auto& eval_nodes = split.test.empty() ? split.train : split.test;

  const auto n_train = static_cast<long>(split.train.size());
  const long per_pass = steps_per_pass(n_train, config.batch_size, config.eval_stages);
  ad::LrSchedule schedule{config.lr, config.warmup_ratio, std::max<long>(1, per_pass * config.passes)};
  ad::Adam<Real> adamw({.weight_decay = config.weight_decay, .decoupled = true});
  auto refs = model.refs();
  long step = 0;

  for (int pass = 0; pass < config.passes; ++pass) {
    std::vector<int> order = split.train;
    SeededRng rng(derive_seed(config.seed, 1 + static_cast<std::uint64_t>(pass)));
    rng.shuffle(std::span<int>(order));

    double loss_sum = 0.0;
    long processed = 0;
    int stage = 1;
    while (processed < n_train) {
      // Batches never straddle a stage boundary, so every stage is evaluated exactly there.
      const long boundary = (stage * n_train + config.eval_stages - 1) / config.eval_stages;
      const long size = std::min<long>(config.batch_size, boundary - processed);

      Tape tape;
      const auto bm = bind(tape, model, true);
      std::vector<Var> pooled;
      std::vector<int> targets;
      for (long i = processed; i < processed + size; ++i) {
        const int v = order[static_cast<std::size_t>(i)];
        pooled.push_back(encode_text(bm, ids[static_cast<std::size_t>(v)]));
        targets.push_back(labels[static_cast<std::size_t>(v)]);
      }
      const Var logits = classify(bm, ad::concat_rows<Real>(pooled));
      const Var loss = cross_entropy(ad::row_softmax(logits), targets);
      if (!std::isfinite(loss.item())) {
        throw NumericalError("tsmm: non-finite loss at step " + std::to_string(step));
      }
      tape.backward(loss);
      std::vector<MatrixX> grads;
      grads.reserve(bm.vars.size());
      for (const auto& v : bm.vars) grads.push_back(tape.grad(v));
      adamw.step(refs, grads, schedule.at(step));
      ++step;

      result.batch_losses.push_back(loss.item());
      loss_sum += loss.item() * static_cast<double>(size);
      processed += size;
      while (stage <= config.eval_stages &&
             processed >= (stage * n_train + config.eval_stages - 1) / config.eval_stages) {
        result.staged_acc.push_back(accuracy_on(texts, eval_nodes, labels, model));
        ++stage;
      }
    }
    result.loss = loss_sum / static_cast<double>(n_train);
  }
  result.model = std::move(model);
  return result;
}

double accuracy_on(std::span<const std::string> texts, const std::vector<int>& nodes,
                   const LabelVector& labels, const TsmmModel& model) {
  if (nodes.empty()) return 0.0;
  int hits = 0;
  for (int v : nodes) {
    const auto p = predict_probs(model, model.vocab.tokenize(texts[static_cast<std::size_t>(v)]));
    hits += predict_label(p) == labels[static_cast<std::size_t>(v)];
  }
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

Extraction extract_all(std::span<const std::string> texts, const TsmmModel& model) {
  const auto n = static_cast<Eigen::Index>(texts.size());
  Extraction out;
  out.features.resize(n, model.d_model());
  out.probs.resize(n, model.k);
  std::vector<int> labels(texts.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    Tape tape;
    const auto bm = bind(tape, model, false);
    const Var x = encode_text(bm, model.vocab.tokenize(texts[static_cast<std::size_t>(i)]));
    out.features.row(i) = x.value().row(0);
    out.probs.row(i) = ad::softmax_rows_value<Real>(classify(bm, x).value()).row(0);
    labels[static_cast<std::size_t>(i)] = predict_label(out.probs.row(i));
  }
  out.labels = LabelVector(std::move(labels), model.k);
  return out;
}

}  // namespace drcl::tsmm
