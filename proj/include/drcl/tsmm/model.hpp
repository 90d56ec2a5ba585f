#pragma once

#include "drcl/ad/ops.hpp"
#include "drcl/ad/optim.hpp"
#include "drcl/labels.hpp"
#include "drcl/rng.hpp"
#include "drcl/tsmm/scan.hpp"
#include "drcl/tsmm/tokenizer.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace drcl::tsmm {

using Tape = ad::Tape<Real>;
using Var = ad::Var<Real>;

struct TsmmConfig {
  double lr = 3e-3;
  double warmup_ratio = 0.001;
  double train_fraction = 0.7;
  /// Held-out evaluations per pass, evenly spaced over the training samples.
  int eval_stages = 10;
  /// Passes over the training split per train_tsmm call.
  int passes = 1;
  int d_model = 64;
  int state_dim = 16;
  int layers = 2;
  int batch_size = 16;
  double weight_decay = 0.01;
  int min_freq = 1;
  int max_seq_len = 64;
  /// Feed x_{t-1} instead of x_t into the state update.
  bool input_lag = false;
  /// Make B and C per-token projections of the layer input.
  bool selective_bc = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SsmLayer {
  MatrixX w_delta;  // d x d
  MatrixX b_delta;  // 1 x d
  MatrixX a_raw;    // d x N, A = -softplus(a_raw)
  MatrixX b;        // d x N, or the d x N projection u -> B_t when selective
  MatrixX c;        // same as b
  MatrixX w_out;    // d x d, added to the residual stream
};

struct TsmmModel {
  Vocab vocab;
  int k = 0;
  bool input_lag = false;
  bool selective_bc = false;
  MatrixX embedding;  // |V| x d
  std::vector<SsmLayer> layers;
  MatrixX head_w;  // k x d
  MatrixX head_b;  // 1 x k

  /// Glorot-uniform initialization of every parameter.
  static TsmmModel init(Vocab vocab, int k, const TsmmConfig& config, SeededRng& rng);

  int d_model() const { return static_cast<int>(embedding.cols()); }
  std::vector<ad::ParamRef<Real>> refs();
};

/// The model's parameters recorded on one tape, in refs() order.
struct BoundModel {
  const TsmmModel* model = nullptr;
  std::vector<Var> vars;

  Var embedding() const { return vars[0]; }
  Var layer(std::size_t l, std::size_t slot) const { return vars[1 + 6 * l + slot]; }
  Var head_w() const { return vars[vars.size() - 2]; }
  Var head_b() const { return vars[vars.size() - 1]; }
};

BoundModel bind(Tape& tape, const TsmmModel& model, bool trainable);

/// One SSM block: u (L x d) -> u + scan(u) W_out.
Var ssm_layer(const BoundModel& bm, std::size_t layer, Var u);

/// Final-layer outputs for a token id sequence, L x d.
Var encode_tokens(const BoundModel& bm, const std::vector<int>& ids);

/// Mean over the outputs of non-pad tokens, 1 x d.
Var encode_text(const BoundModel& bm, const std::vector<int>& ids);

/// Logits x Wᵀ + b for a batch of pooled rows.
Var classify(const BoundModel& bm, Var x);

/// Mean of -log max(p_{i,y_i}, 1e-12) over the rows of `probs`.
Var cross_entropy(Var probs, const std::vector<int>& labels);

/// Row argmax with lowest-index ties.
int predict_label(const RowVectorX& p);

}  // namespace drcl::tsmm
