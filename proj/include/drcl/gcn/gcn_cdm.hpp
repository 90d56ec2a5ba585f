#pragma once

#include "drcl/ad/ops.hpp"
#include "drcl/ad/optim.hpp"
#include "drcl/eval/metrics.hpp"
#include "drcl/labels.hpp"
#include "drcl/tag/graph.hpp"
#include "drcl/warmstart/warmstart.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace drcl::gcn {

using Tape = ad::Tape<Real>;
using Var = ad::Var<Real>;

struct GcnConfig {
  /// Softmax temperature applied to center similarities.
  double delta = 30.0;
  /// +1: r_v = softmax(+delta * S h_v), the most similar center is most likely.
  /// -1: the literal negative-sign form.
  int similarity_sign = 1;
  int hidden_dim = 64;
  int layers = 1;
  int steps = 300;
  double lr = 1e-3;
  double weight_decay = 5e-3;
  /// Multiplier on the modularity loss before backward (lambda of the joint objective).
  double loss_scale = 1.0;
  /// Evaluate the seven metrics every this many steps (0 = never during training).
  int metrics_every = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One weight matrix and one PReLU slope per layer.
struct EncoderParams {
  std::vector<MatrixX> weights;
  std::vector<MatrixX> slopes;  // 1x1 each, initialized to 0.25

  static EncoderParams init(Eigen::Index input_dim, const GcnConfig& config, SeededRng& rng);
  std::vector<ad::ParamRef<Real>> refs();
};

/// Graph-side constants shared by every training step.
struct GraphOperators {
  SparseMatrix a_norm;     // D̂^{-1/2}(A+I)D̂^{-1/2}
  SparseMatrix adjacency;  // A
  MatrixX degree_row;      // 1 x n
  double two_m = 0.0;

  static GraphOperators from(const tag::TextAttributedGraph& graph);
};

/// k x n averaging operator: row i holds 1/|c_i| on the members of group i.
SparseMatrix pooling_matrix(const warmstart::ProtoCommunities& proto, int n);

struct ForwardPass {
  Var h;     // n x hidden, unit rows
  Var s;     // k x hidden centers
  Var r;     // n x k soft relations
  Var loss;  // unscaled soft-modularity loss
};

/// Records encode -> centers -> soft relations -> modularity loss on `tape`.
/// `x` is the raw input feature matrix.
ForwardPass forward(Tape& tape, const GraphOperators& ops, const SparseMatrix& pool, Var x,
                    std::span<const Var> weights, std::span<const Var> slopes,
                    const GcnConfig& config);

// Value-level entry points; each one is the corresponding slice of forward().

MatrixX encode(const GraphOperators& ops, const MatrixX& x, const EncoderParams& params);
/// Row i is the plain mean of the embeddings of group i (not re-normalized).
MatrixX compute_centers(const MatrixX& h, const warmstart::ProtoCommunities& proto);
MatrixX soft_relations(const MatrixX& h, const MatrixX& centers, const GcnConfig& config);
/// Row-wise argmax; ties go to the lowest index.
LabelVector harden(const MatrixX& r);
/// -(1/2M)[Σ_k R_kᵀ A R_k - (1/2M) Σ_k (dᵀ R_k)²].
double modularity_loss(const MatrixX& r, const tag::TextAttributedGraph& graph);

struct StepRecord {
  int step = 0;
  double loss = 0.0;
  std::optional<eval::MetricSet> metrics;
};

struct GcnResult {
  EncoderParams params;
  MatrixX h;
  MatrixX r;
  LabelVector labels;
  double final_loss = 0.0;
  std::vector<StepRecord> history;
};

/// Runs `config.steps` Adam updates (weight decay folded into the gradient)
/// on the scaled modularity loss. Centers are recomputed from the fixed
/// groups and the current embeddings inside every step and differentiated
/// through. Starts from `warm` when its shapes fit `x`, else from a seeded
/// initialization. Returns the state after the last update.
GcnResult train_gcn_cdm(const tag::TextAttributedGraph& graph, const MatrixX& x,
                        const warmstart::ProtoCommunities& proto, const GcnConfig& config,
                        const EncoderParams* warm = nullptr);

}  // namespace drcl::gcn
