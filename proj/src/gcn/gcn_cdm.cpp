#include "drcl/gcn/gcn_cdm.hpp"

#include <cmath>

namespace drcl::gcn {

void GcnConfig::validate() const {
  if (!(delta > 0.0)) throw ValidationError("gcn: delta must be positive");
  if (similarity_sign != 1 && similarity_sign != -1) {
    throw ValidationError("gcn: similarity_sign must be +1 or -1");
  }
  if (steps < 0) throw ValidationError("gcn: steps must be non-negative");
  if (layers < 1 || hidden_dim < 1) throw ValidationError("gcn: layers and hidden_dim must be >= 1");
  if (!(lr >= 0.0) || !(weight_decay >= 0.0) || !(loss_scale >= 0.0)) {
    throw ValidationError("gcn: lr, weight_decay and loss_scale must be non-negative");
  }
}

EncoderParams EncoderParams::init(Eigen::Index input_dim, const GcnConfig& config, SeededRng& rng) {
  EncoderParams p;
  Eigen::Index fan_in = input_dim;
  for (int l = 0; l < config.layers; ++l) {
    p.weights.push_back(ad::glorot_uniform<Real>(fan_in, config.hidden_dim, rng));
    p.slopes.push_back(MatrixX::Constant(1, 1, 0.25));
    fan_in = config.hidden_dim;
  }
  return p;
}

std::vector<ad::ParamRef<Real>> EncoderParams::refs() {
  std::vector<ad::ParamRef<Real>> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back({"gcn.W" + std::to_string(l), &weights[l]});
    out.push_back({"gcn.prelu" + std::to_string(l), &slopes[l]});
  }
  return out;
}

GraphOperators GraphOperators::from(const tag::TextAttributedGraph& graph) {
  GraphOperators ops;
  ops.a_norm = tag::normalized_adjacency(graph);
  ops.adjacency = graph.adjacency();
  ops.degree_row = graph.degrees().cast<Real>().transpose();
  ops.two_m = 2.0 * graph.edge_count();
  return ops;
}

SparseMatrix pooling_matrix(const warmstart::ProtoCommunities& proto, int n) {
  proto.validate(n);
  std::vector<Eigen::Triplet<Real>> triplets;
  for (int i = 0; i < proto.k(); ++i) {
    const auto& group = proto.groups[i];
    const Real w = 1.0 / static_cast<Real>(group.size());
    for (int v : group) triplets.emplace_back(i, v, w);
  }
  SparseMatrix pool(proto.k(), n);
  pool.setFromTriplets(triplets.begin(), triplets.end());
  return pool;
}

namespace {

Var encode_on(const GraphOperators& ops, Var x, std::span<const Var> weights,
              std::span<const Var> slopes) {
  Var h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = ad::prelu(ad::spmm(ops.a_norm, ad::matmul(h, weights[l])), slopes[l]);
  }
  return ad::l2_normalize_rows(h);
}

Var relations_on(Var h, Var s, const GcnConfig& config) {
  const Var logits = ad::matmul(h, ad::transpose(s));
  return ad::row_softmax(ad::scale(logits, config.similarity_sign * config.delta));
}

Var modularity_on(Tape& tape, const GraphOperators& ops, Var r) {
  if (ops.two_m <= 0.0) throw ValidationError("modularity loss: graph has no edges");
  const Var internal = ad::sum(ad::hadamard(r, ad::spmm(ops.adjacency, r)));
  const Var degree_mass = ad::matmul(tape.constant(ops.degree_row), r);
  const Var expected = ad::scale(ad::sum(ad::hadamard(degree_mass, degree_mass)), 1.0 / ops.two_m);
  return ad::scale(ad::sub(internal, expected), -1.0 / ops.two_m);
}

std::vector<Var> bind_params(Tape& tape, const std::vector<MatrixX>& values, bool trainable) {
  std::vector<Var> out;
  for (const auto& v : values) out.push_back(trainable ? tape.leaf(v) : tape.constant(v));
  return out;
}

}  // namespace

ForwardPass forward(Tape& tape, const GraphOperators& ops, const SparseMatrix& pool, Var x,
                    std::span<const Var> weights, std::span<const Var> slopes,
                    const GcnConfig& config) {
  if (x.rows() != ops.a_norm.rows()) {
    throw DimensionError("gcn encode: feature rows " + std::to_string(x.rows()) + " vs " +
                         std::to_string(ops.a_norm.rows()) + " nodes");
  }
  if (weights.empty() || weights.size() != slopes.size()) {
    throw DimensionError("gcn encode: need one slope per weight matrix");
  }
  ForwardPass fp;
  fp.h = encode_on(ops, x, weights, slopes);
  fp.s = ad::spmm(pool, fp.h);
  fp.r = relations_on(fp.h, fp.s, config);
  fp.loss = modularity_on(tape, ops, fp.r);
  return fp;
}

MatrixX encode(const GraphOperators& ops, const MatrixX& x, const EncoderParams& params) {
  if (x.rows() != ops.a_norm.rows()) {
    throw DimensionError("gcn encode: feature rows " + std::to_string(x.rows()) + " vs " +
                         std::to_string(ops.a_norm.rows()) + " nodes");
  }
  Tape tape;
  const auto w = bind_params(tape, params.weights, false);
  const auto s = bind_params(tape, params.slopes, false);
  return encode_on(ops, tape.constant(x), w, s).value();
}

MatrixX compute_centers(const MatrixX& h, const warmstart::ProtoCommunities& proto) {
  return pooling_matrix(proto, static_cast<int>(h.rows())) * h;
}

MatrixX soft_relations(const MatrixX& h, const MatrixX& centers, const GcnConfig& config) {
  if (centers.rows() == 0) throw ValidationError("soft_relations: no centers");
  if (centers.cols() != h.cols()) throw DimensionError("soft_relations: center width mismatch");
  Tape tape;
  return relations_on(tape.constant(h), tape.constant(centers), config).value();
}

LabelVector harden(const MatrixX& r) {
  std::vector<int> labels(static_cast<std::size_t>(r.rows()));
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < r.cols(); ++j) {
      if (r(i, j) > r(i, best)) best = j;
    }
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return {std::move(labels), static_cast<int>(r.cols())};
}

double modularity_loss(const MatrixX& r, const tag::TextAttributedGraph& graph) {
  if (r.rows() != graph.node_count()) throw DimensionError("modularity_loss: R rows vs node count");
  const auto ops = GraphOperators::from(graph);
  Tape tape;
  return modularity_on(tape, ops, tape.constant(r)).item();
}

GcnResult train_gcn_cdm(const tag::TextAttributedGraph& graph, const MatrixX& x,
                        const warmstart::ProtoCommunities& proto, const GcnConfig& config,
                        const EncoderParams* warm) {
  config.validate();
  if (proto.k() == 0) throw ValidationError("gcn-cdm: no proto-communities");
  const int n = graph.node_count();
  if (x.rows() != n) {
    throw DimensionError("gcn-cdm: feature rows " + std::to_string(x.rows()) + " vs " +
                         std::to_string(n) + " nodes");
  }
  const auto ops = GraphOperators::from(graph);
  const auto pool = pooling_matrix(proto, n);

  SeededRng rng(config.seed);
  GcnResult result;
  const bool fits = warm && static_cast<int>(warm->weights.size()) == config.layers &&
                    warm->weights.front().rows() == x.cols() &&
                    warm->weights.front().cols() == config.hidden_dim;
  result.params = fits ? *warm : EncoderParams::init(x.cols(), config, rng);
  ad::Adam<Real> adam({.weight_decay = config.weight_decay, .decoupled = false});
  auto refs = result.params.refs();

  for (int step = 0; step < config.steps; ++step) {
    Tape tape;
    const auto w = bind_params(tape, result.params.weights, true);
    const auto s = bind_params(tape, result.params.slopes, true);
    const auto fp = forward(tape, ops, pool, tape.constant(x), w, s, config);
    const double loss = fp.loss.item();
    if (!std::isfinite(loss)) {
      throw NumericalError("gcn-cdm: non-finite loss at step " + std::to_string(step));
    }

    StepRecord record{step, loss, std::nullopt};
    if (config.metrics_every > 0 && step % config.metrics_every == 0) {
      const auto labels = harden(fp.r.value());
      record.metrics = eval::evaluate_partition(graph, fp.h.value(), labels.labels, graph.truth());
    }
    result.history.push_back(std::move(record));

    tape.backward(ad::scale(fp.loss, config.loss_scale));
    std::vector<MatrixX> grads;
    for (std::size_t l = 0; l < w.size(); ++l) {
      grads.push_back(tape.grad(w[l]));
      grads.push_back(tape.grad(s[l]));
    }
    adam.step(refs, grads, config.lr);
  }

  Tape tape;
  const auto w = bind_params(tape, result.params.weights, false);
  const auto s = bind_params(tape, result.params.slopes, false);
  const auto fp = forward(tape, ops, pool, tape.constant(x), w, s, config);
  result.h = fp.h.value();
  result.r = fp.r.value();
  result.labels = harden(result.r);
  result.final_loss = fp.loss.item();
  if (!std::isfinite(result.final_loss)) {
    throw NumericalError("gcn-cdm: non-finite loss after step " + std::to_string(config.steps));
  }
  return result;
}

}  // namespace drcl::gcn
