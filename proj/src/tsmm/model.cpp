#include "drcl/tsmm/model.hpp"

#include <string>

namespace drcl::tsmm {

void TsmmConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("tsmm: train_fraction must lie strictly between 0 and 1");
  }
  if (!(lr >= 0.0) || !(weight_decay >= 0.0)) {
    throw ValidationError("tsmm: lr and weight_decay must be non-negative");
  }
  if (!(warmup_ratio >= 0.0 && warmup_ratio <= 1.0)) {
    throw ValidationError("tsmm: warmup_ratio must lie in [0, 1]");
  }
  if (eval_stages < 1 || passes < 0 || batch_size < 1) {
    throw ValidationError("tsmm: eval_stages and batch_size must be >= 1, passes >= 0");
  }
  if (d_model < 1 || state_dim < 1 || layers < 1) {
    throw ValidationError("tsmm: d_model, state_dim and layers must be >= 1");
  }
  if (min_freq < 1 || max_seq_len < 1) {
    throw ValidationError("tsmm: min_freq and max_seq_len must be >= 1");
  }
}

TsmmModel TsmmModel::init(Vocab vocab, int k, const TsmmConfig& config, SeededRng& rng) {
  config.validate();
  if (k < 1) throw ValidationError("tsmm: need at least one class");
  TsmmModel m;
  m.k = k;
  m.input_lag = config.input_lag;
  m.selective_bc = config.selective_bc;
  const Eigen::Index d = config.d_model;
  const Eigen::Index n = config.state_dim;
  m.embedding = ad::glorot_uniform<Real>(vocab.size(), d, rng);
  for (int l = 0; l < config.layers; ++l) {
    SsmLayer layer;
    layer.w_delta = ad::glorot_uniform<Real>(d, d, rng);
    layer.b_delta = ad::glorot_uniform<Real>(1, d, rng);
    layer.a_raw = ad::glorot_uniform<Real>(d, n, rng);
    layer.b = ad::glorot_uniform<Real>(d, n, rng);
    layer.c = ad::glorot_uniform<Real>(d, n, rng);
    layer.w_out = ad::glorot_uniform<Real>(d, d, rng);
    m.layers.push_back(std::move(layer));
  }
  m.head_w = ad::glorot_uniform<Real>(k, d, rng);
  m.head_b = ad::glorot_uniform<Real>(1, k, rng);
  m.vocab = std::move(vocab);
  return m;
}

std::vector<ad::ParamRef<Real>> TsmmModel::refs() {
  std::vector<ad::ParamRef<Real>> out{{"tsmm.embedding", &embedding}};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = "tsmm.layer" + std::to_string(l) + ".";
    auto& layer = layers[l];
    out.push_back({p + "w_delta", &layer.w_delta});
    out.push_back({p + "b_delta", &layer.b_delta});
    out.push_back({p + "a_raw", &layer.a_raw});
    out.push_back({p + "b", &layer.b});
    out.push_back({p + "c", &layer.c});
    out.push_back({p + "w_out", &layer.w_out});
  }
  out.push_back({"tsmm.head_w", &head_w});
  out.push_back({"tsmm.head_b", &head_b});
  return out;
}

BoundModel bind(Tape& tape, const TsmmModel& model, bool trainable) {
  BoundModel bm;
  bm.model = &model;
  const auto put = [&](const MatrixX& v) {
    bm.vars.push_back(trainable ? tape.leaf(v) : tape.constant(v));
  };
  put(model.embedding);
  for (const auto& layer : model.layers) {
    put(layer.w_delta);
    put(layer.b_delta);
    put(layer.a_raw);
    put(layer.b);
    put(layer.c);
    put(layer.w_out);
  }
  put(model.head_w);
  put(model.head_b);
  return bm;
}

Var ssm_layer(const BoundModel& bm, std::size_t layer, Var u) {
  const bool selective = bm.model->selective_bc;
  const Var delta = ad::softplus(ad::add_row(ad::matmul(u, bm.layer(layer, 0)), bm.layer(layer, 1)));
  const Var a = ad::scale(ad::softplus(bm.layer(layer, 2)), -1.0);
  const Var b = selective ? ad::matmul(u, bm.layer(layer, 3)) : bm.layer(layer, 3);
  const Var c = selective ? ad::matmul(u, bm.layer(layer, 4)) : bm.layer(layer, 4);
  const Var x = bm.model->input_lag ? ad::shift_rows_down(u) : u;
  const Var y = selective_scan(x, delta, a, b, c, selective);
  return ad::add(u, ad::matmul(y, bm.layer(layer, 5)));
}

Var encode_tokens(const BoundModel& bm, const std::vector<int>& ids) {
  if (ids.empty()) throw ValidationError("tsmm: empty token sequence");
  Var u = ad::gather_rows(bm.embedding(), ids);
  for (std::size_t l = 0; l < bm.model->layers.size(); ++l) u = ssm_layer(bm, l, u);
  return u;
}

Var encode_text(const BoundModel& bm, const std::vector<int>& ids) {
  std::vector<char> mask(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) mask[i] = ids[i] != Vocab::kPad;
  return ad::masked_mean(encode_tokens(bm, ids), std::move(mask));
}

Var classify(const BoundModel& bm, Var x) {
  return ad::add_row(ad::matmul(x, ad::transpose(bm.head_w())), bm.head_b());
}

Var cross_entropy(Var probs, const std::vector<int>& labels) {
  for (int y : labels) {
    if (y < 0 || y >= probs.cols()) {
      throw ValidationError("cross_entropy: label " + std::to_string(y) + " outside 0.." +
                            std::to_string(probs.cols() - 1));
    }
  }
  const Var picked = ad::select_per_row(probs, labels);
  return ad::scale(ad::mean(ad::log(picked, 1e-12)), -1.0);
}

int predict_label(const RowVectorX& p) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < p.size(); ++j) {
    if (p(j) > p(best)) best = j;
  }
  return static_cast<int>(best);
}

}  // namespace drcl::tsmm
