#include "drcl/eval/metrics.hpp"

#include "drcl/eval/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace drcl::eval {
namespace {

void require_same_length(std::span<const int> a, std::span<const int> b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": label vectors differ in length (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw ValidationError(std::string(what) + ": empty label vectors");
}

std::vector<int> dense(std::span<const int> labels, int& k) {
  std::map<int, int> ids;
  for (int v : labels) {
    if (v < 0) throw ValidationError("metrics need fully assigned labels");
    ids.emplace(v, 0);
  }
  int next = 0;
  for (auto& [value, id] : ids) id = next++;
  k = next;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int v : labels) out.push_back(ids[v]);
  return out;
}

double entropy(const VectorX& totals, double n) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < totals.size(); ++i) {
    if (totals[i] > 0) h -= totals[i] / n * std::log(totals[i] / n);
  }
  return h;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

/// Cluster members grouped by dense label.
std::vector<std::vector<Eigen::Index>> members_of(std::span<const int> labels) {
  int k = 0;
  const auto ids = dense(labels, k);
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < ids.size(); ++i) members[ids[i]].push_back(static_cast<Eigen::Index>(i));
  return members;
}

}  // namespace

ConfusionMatrix ConfusionMatrix::from(std::span<const int> truth, std::span<const int> pred) {
  require_same_length(truth, pred, "confusion");
  int kt = 0;
  int kp = 0;
  const auto t = dense(truth, kt);
  const auto p = dense(pred, kp);
  ConfusionMatrix c;
  c.counts = MatrixX::Zero(kt, kp);
  for (std::size_t i = 0; i < t.size(); ++i) c.counts(t[i], p[i]) += 1.0;
  c.row_totals = c.counts.rowwise().sum();
  c.col_totals = c.counts.colwise().sum().transpose();
  c.total = static_cast<double>(t.size());
  return c;
}

double modularity_q(const tag::TextAttributedGraph& graph, std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != graph.node_count()) {
    throw DimensionError("modularity_q: label count differs from node count");
  }
  const double m = graph.edge_count();
  if (m == 0) throw ValidationError("modularity_q: graph has no edges");
  int k = 0;
  const auto ids = dense(labels, k);
  std::vector<double> internal(static_cast<std::size_t>(k), 0.0);
  std::vector<double> degree_sum(static_cast<std::size_t>(k), 0.0);
  for (auto [u, v] : graph.edges()) {
    if (ids[u] == ids[v]) internal[ids[u]] += 1.0;
  }
  for (int i = 0; i < graph.node_count(); ++i) degree_sum[ids[i]] += graph.degrees()[i];
  double q = 0.0;
  for (int c = 0; c < k; ++c) {
    const double share = degree_sum[c] / (2.0 * m);
    q += internal[c] / m - share * share;
  }
  return q;
}

double nmi(std::span<const int> a, std::span<const int> b) {
  const auto c = ConfusionMatrix::from(a, b);
  const double n = c.total;
  const double ha = entropy(c.row_totals, n);
  const double hb = entropy(c.col_totals, n);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  double mi = 0.0;
  for (Eigen::Index i = 0; i < c.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.counts.cols(); ++j) {
      const double nij = c.counts(i, j);
      if (nij > 0) mi += nij / n * std::log(n * nij / (c.row_totals[i] * c.col_totals[j]));
    }
  }
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

double ari(std::span<const int> a, std::span<const int> b) {
  const auto c = ConfusionMatrix::from(a, b);
  double index = 0.0;
  for (Eigen::Index i = 0; i < c.counts.size(); ++i) index += choose2(c.counts.data()[i]);
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (Eigen::Index i = 0; i < c.row_totals.size(); ++i) sum_a += choose2(c.row_totals[i]);
  for (Eigen::Index j = 0; j < c.col_totals.size(); ++j) sum_b += choose2(c.col_totals[j]);
  const double pairs = choose2(c.total);
  if (pairs == 0.0) return 1.0;
  const double expected = sum_a * sum_b / pairs;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

std::vector<int> best_mapping(const ConfusionMatrix& confusion) {
  // Rows of the cost are predicted clusters so the answer is indexed by cluster.
  // Among matchings with the most agreeing nodes, prefer the largest summed
  // pair F1; the F1 term totals less than one count, so it only breaks ties.
  const Eigen::Index kt = confusion.counts.rows();
  const Eigen::Index kp = confusion.counts.cols();
  const double eps = 0.5 / static_cast<double>(std::max(kt, kp) + 1);
  MatrixX cost(kp, kt);
  for (Eigen::Index p = 0; p < kp; ++p) {
    for (Eigen::Index t = 0; t < kt; ++t) {
      const double tp = confusion.counts(t, p);
      const double f1 = tp > 0.0 ? 2.0 * tp / (confusion.row_totals[t] + confusion.col_totals[p]) : 0.0;
      cost(p, t) = -(tp + eps * f1);
    }
  }
  const auto assignment = hungarian(cost);
  std::vector<int> mapping(static_cast<std::size_t>(confusion.counts.cols()), -1);
  for (Eigen::Index p = 0; p < confusion.counts.cols(); ++p) {
    const int t = assignment[static_cast<std::size_t>(p)];
    if (t < confusion.counts.rows()) mapping[static_cast<std::size_t>(p)] = t;
  }
  return mapping;
}

double acc(std::span<const int> truth, std::span<const int> pred) {
  const auto c = ConfusionMatrix::from(truth, pred);
  const auto mapping = best_mapping(c);
  double matched = 0.0;
  for (std::size_t p = 0; p < mapping.size(); ++p) {
    if (mapping[p] >= 0) matched += c.counts(mapping[p], static_cast<Eigen::Index>(p));
  }
  return matched / c.total;
}

double macro_f1(std::span<const int> truth, std::span<const int> pred) {
  const auto c = ConfusionMatrix::from(truth, pred);
  const auto mapping = best_mapping(c);
  double total = 0.0;
  for (Eigen::Index t = 0; t < c.counts.rows(); ++t) {
    const auto it = std::find(mapping.begin(), mapping.end(), static_cast<int>(t));
    if (it == mapping.end()) continue;
    const auto p = static_cast<Eigen::Index>(it - mapping.begin());
    const double tp = c.counts(t, p);
    if (tp == 0.0) continue;
    const double precision = tp / c.col_totals[p];
    const double recall = tp / c.row_totals[t];
    total += 2.0 * precision * recall / (precision + recall);
  }
  return total / static_cast<double>(c.counts.rows());
}

double dbi(const MatrixX& points, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows()) {
    throw DimensionError("dbi: label count differs from point count");
  }
  const auto members = members_of(labels);
  const auto k = members.size();
  if (k < 2) return 0.0;
  MatrixX centroids(static_cast<Eigen::Index>(k), points.cols());
  VectorX scatter(static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) {
    RowVectorX centroid = RowVectorX::Zero(points.cols());
    for (auto i : members[c]) centroid += points.row(i);
    centroid /= static_cast<double>(members[c].size());
    double s = 0.0;
    for (auto i : members[c]) s += (points.row(i) - centroid).norm();
    centroids.row(static_cast<Eigen::Index>(c)) = centroid;
    scatter[static_cast<Eigen::Index>(c)] = s / static_cast<double>(members[c].size());
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const auto a = static_cast<Eigen::Index>(i);
      const auto b = static_cast<Eigen::Index>(j);
      const double spread = scatter[a] + scatter[b];
      const double gap = (centroids.row(a) - centroids.row(b)).norm();
      const double ratio = gap > 0.0 ? spread / gap : (spread > 0.0 ? kDunnSentinel : 0.0);
      worst = std::max(worst, ratio);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

double dunn(const MatrixX& points, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows()) {
    throw DimensionError("dunn: label count differs from point count");
  }
  int k = 0;
  const auto ids = dense(labels, k);
  if (k < 2) return 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  double max_diameter = 0.0;
  const auto n = points.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (points.row(i) - points.row(j)).norm();
      if (ids[i] == ids[j]) max_diameter = std::max(max_diameter, d);
      else min_gap = std::min(min_gap, d);
    }
  }
  if (max_diameter < 1e-12) return kDunnSentinel;
  return min_gap / max_diameter;
}

MetricSet evaluate_partition(const tag::TextAttributedGraph& graph, const MatrixX& embedding,
                             std::span<const int> labels,
                             const std::optional<LabelVector>& truth) {
  MetricSet out;
  out.dbi = dbi(embedding, labels);
  out.di = dunn(embedding, labels);
  out.q = graph.edge_count() > 0 ? modularity_q(graph, labels) : 0.0;
  if (truth) {
    std::vector<int> t;
    std::vector<int> p;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if ((*truth)[i] < 0) continue;
      t.push_back((*truth)[i]);
      p.push_back(labels[i]);
    }
    if (!t.empty()) {
      out.nmi = nmi(t, p);
      out.acc = acc(t, p);
      out.f1 = macro_f1(t, p);
      out.ari = ari(t, p);
    }
  }
  return out;
}

}  // namespace drcl::eval
