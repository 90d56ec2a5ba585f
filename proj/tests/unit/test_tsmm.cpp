#include <doctest.h>

#include "drcl/ad/gradcheck.hpp"
#include "drcl/tag/synthetic.hpp"
#include "drcl/tsmm/train.hpp"

#include <cmath>
#include <numbers>
#include <set>

using namespace drcl;
using namespace drcl::tsmm;

namespace {

MatrixX random(Eigen::Index r, Eigen::Index c, SeededRng& rng, double lo = -1.0, double hi = 1.0) {
  MatrixX m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

MatrixX scalar(double v) { return MatrixX::Constant(1, 1, v); }

TsmmConfig tiny_config() {
  TsmmConfig c;
  c.d_model = 4;
  c.state_dim = 4;
  c.layers = 1;
  return c;
}

TsmmModel tiny_model(const TsmmConfig& config, std::uint64_t seed, int k = 3) {
  const std::vector<std::string> corpus{"alpha beta gamma delta", "beta gamma", "delta alpha epsilon"};
  SeededRng rng(seed);
  return TsmmModel::init(Vocab::build(corpus), k, config, rng);
}

tag::TextAttributedGraph separable(std::uint64_t seed) {
  tag::SyntheticSpec spec;
  spec.k = 2;
  spec.block_sizes = {50, 50};
  spec.p_in = 0.1;
  spec.p_out = 0.01;
  spec.seed = seed;
  return tag::generate_sbm_tag(spec);
}

TsmmConfig small_training() {
  TsmmConfig c;
  c.d_model = 16;
  c.state_dim = 4;
  c.layers = 1;
  c.lr = 1e-2;
  c.passes = 4;
  c.seed = 11;
  return c;
}

MatrixX run_encode(const TsmmModel& m, const std::vector<int>& ids) {
  Tape tape;
  return encode_text(bind(tape, m, false), ids).value();
}

}  // namespace

TEST_CASE("tokenizer examples") {
  const std::vector<std::string> corpus{"Graph graph GRAPH node", "node, edge! rare"};
  const auto v = Vocab::build(corpus);
  const auto ids = v.tokenize("Graph graph GRAPH");
  REQUIRE(ids.size() == 3);
  CHECK(ids[0] == ids[1]);
  CHECK(ids[1] == ids[2]);
  CHECK(ids[0] == 2);  // most frequent word first
  CHECK(v.word(v.id("node")) == "node");
  CHECK(split_words("node,edge!  Rare") == std::vector<std::string>{"node", "edge", "rare"});
  CHECK(v.tokenize("") == std::vector<int>{Vocab::kOov});
  CHECK(v.tokenize("unseen") == std::vector<int>{Vocab::kOov});

  const auto cut = Vocab::build(corpus, 2);
  CHECK(cut.id("rare") == Vocab::kOov);
  CHECK(cut.id("node") != Vocab::kOov);

  const auto short_seq = Vocab::build(corpus, 1, 4);
  CHECK(short_seq.tokenize("node node node node node node").size() == 4);
}

TEST_CASE("bag of words rows are term frequencies") {
  const std::vector<std::string> texts{"a b b", "c", "zzz"};
  const auto v = Vocab::build(std::span<const std::string>(texts.data(), 2));
  const MatrixX bow = bag_of_words(texts, v);
  CHECK(bow.rows() == 3);
  CHECK(bow.cols() == v.size() - 2);
  CHECK(bow.row(0).sum() == doctest::Approx(1.0));
  CHECK(bow(0, v.id("b") - 2) == doctest::Approx(2.0 / 3.0));
  CHECK(bow.row(2).isZero());
}

TEST_CASE("scan: scalar closed form") {
  const MatrixX y = scan_values<double>(scalar(1.0), scalar(std::numbers::ln2), scalar(-1.0), scalar(1.0),
                                        scalar(2.0), false);
  CHECK(y(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

  MatrixX x(2, 1);
  x << 1, 0;
  MatrixX d(2, 1);
  d << std::numbers::ln2, std::numbers::ln2;
  // h1 = 0.5, h2 = 0.5 * 0.5, y = 2h.
  const MatrixX y2 = scan_values<double>(x, d, scalar(-1.0), scalar(1.0), scalar(2.0), false);
  CHECK(y2(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("scan: all-zero input gives all-zero output") {
  SeededRng rng(2);
  const MatrixX y = scan_values<double>(MatrixX::Zero(5, 3), random(5, 3, rng, 0.1, 1.0), random(3, 4, rng, -2, -0.1),
                                        random(3, 4, rng), random(3, 4, rng), false);
  CHECK(y.isZero());
}

TEST_CASE("scan: the small-step limit is continuous") {
  const double t = kScanLimitThreshold;
  for (const double side : {1.0, -1.0}) {
    const double below = detail::phi(side * t * (1 - 1e-3));
    const double above = detail::phi(side * t * (1 + 1e-3));
    CHECK(std::abs(below - above) < 1e-6);
  }
  for (const double z : {1e-3, -1e-3}) {
    CHECK(std::abs(detail::phi(z) - (1 + z / 2 + z * z / 6 + z * z * z / 24)) < 1e-12);
  }
  // |ΔA| = 1e-9 takes the limit branch; the exact input coefficient there is ΔB(1 + O(1e-9)).
  const double delta = 1e-9;
  const MatrixX y = scan_values<double>(scalar(3.0), scalar(delta), scalar(-1.0), scalar(2.0), scalar(1.0), false);
  const double exact = std::expm1(-delta) / -delta * delta * 2.0 * 3.0;
  CHECK(std::abs(y(0, 0) - exact) < 1e-6 * std::abs(exact));
  CHECK(std::abs(detail::phi_prime(1e-5) - (std::exp(1e-5) * 1e-5 - std::expm1(1e-5)) / 1e-10) < 1e-6);
}

TEST_CASE("scan: gradient matches central differences on both branches") {
  SeededRng rng(5);
  for (const bool per_token : {false, true}) {
    const ad::ScalarFunction<double> f = [&](Tape&, const std::vector<Var>& p) {
      return ad::sum(ad::hadamard(selective_scan(p[0], p[1], p[2], p[3], p[4], per_token), p[0]));
    };
    const Eigen::Index rows = per_token ? 4 : 3;
    for (int trial = 0; trial < 10; ++trial) {
      const auto report = ad::check_gradient<double>(
          f, {random(4, 3, rng), random(4, 3, rng, 0.1, 1.0), random(3, 2, rng, -2.0, -0.1), random(rows, 2, rng),
              random(rows, 2, rng)});
      CHECK(report.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("scan: non-finite states name the token") {
  MatrixX x(3, 1);
  x << 1, 1e308, 1e308;
  try {
    scan_values<double>(x, scalar(1.0).replicate(3, 1), scalar(-1e-12), scalar(1e10), scalar(1.0), false);
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("token 1") != std::string::npos);
  }
}

TEST_CASE("scan is causal") {
  auto config = tiny_config();
  for (const bool lag : {false, true}) {
    config.input_lag = lag;
    const auto m = tiny_model(config, 3);
    const std::vector<int> ids{2, 3, 4, 5, 6, 2};
    Tape tape;
    const auto bm = bind(tape, m, false);
    const MatrixX base = encode_tokens(bm, ids).value();
    for (std::size_t t = 0; t < ids.size(); ++t) {
      auto changed = ids;
      changed[t] = changed[t] == 6 ? 3 : 6;
      const MatrixX out = encode_tokens(bm, changed).value();
      const auto prefix = static_cast<Eigen::Index>(t);
      CHECK(out.topRows(prefix) == base.topRows(prefix));
      if (!lag) CHECK(out.row(prefix) != base.row(prefix));
    }
  }
}

TEST_CASE("encode_text: mean pooling and pad invariance") {
  const auto m = tiny_model(tiny_config(), 4);
  Tape tape;
  const auto bm = bind(tape, m, false);
  const MatrixX one = encode_text(bm, {3}).value();
  CHECK(one == encode_tokens(bm, {3}).value());

  const std::vector<int> ids{2, 4, 5};
  const MatrixX tokens = encode_tokens(bm, ids).value();
  CHECK(encode_text(bm, ids).value().isApprox(tokens.colwise().mean()));
  for (const int pads : {0, 4, 16}) {
    auto padded = ids;
    padded.insert(padded.end(), pads, Vocab::kPad);
    CHECK((run_encode(m, padded) - run_encode(m, ids)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("classify and softmax examples") {
  auto m = tiny_model(tiny_config(), 6);
  m.head_w.setZero();
  m.head_b.setZero();
  Tape tape;
  const auto bm = bind(tape, m, false);
  const MatrixX p = ad::row_softmax(classify(bm, encode_text(bm, {2, 3}))).value();
  CHECK(p.isApprox(MatrixX::Constant(1, 3, 1.0 / 3.0)));

  auto shifted = tiny_model(tiny_config(), 6);
  auto base = shifted;
  shifted.head_b.array() += 4.2;
  Tape t2;
  const auto b1 = bind(t2, base, false);
  const auto b2 = bind(t2, shifted, false);
  const MatrixX p1 = ad::row_softmax(classify(b1, encode_text(b1, {2, 4}))).value();
  const MatrixX p2 = ad::row_softmax(classify(b2, encode_text(b2, {2, 4}))).value();
  CHECK(p1.isApprox(p2, 1e-12));

  MatrixX logits(1, 2);
  logits << std::numbers::ln2, 0.0;
  const MatrixX q = ad::row_softmax(t2.constant(logits)).value();
  CHECK(q(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(q(0, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("predict_label") {
  CHECK(predict_label(RowVectorX{{0.2, 0.7, 0.1}}) == 1);
  CHECK(predict_label(RowVectorX{{0.5, 0.5}}) == 0);
  CHECK(predict_label(RowVectorX{{0.0, 0.0, 1.0}}) == 2);
}

TEST_CASE("cross entropy examples") {
  Tape t;
  CHECK(cross_entropy(t.constant(MatrixX{{0.0, 1.0}}), {1}).item() == doctest::Approx(0.0));
  CHECK(cross_entropy(t.constant(MatrixX::Constant(2, 4, 0.25)), {0, 3}).item() == doctest::Approx(std::log(4.0)));
  CHECK(cross_entropy(t.constant(MatrixX::Constant(2, 2, 0.5)), {0, 1}).item() == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy(t.constant(MatrixX{{1.0, 0.0}}), {1}).item() == doctest::Approx(-std::log(1e-12)));
  CHECK_THROWS_AS(cross_entropy(t.constant(MatrixX::Constant(1, 2, 0.5)), {2}), ValidationError);
}

TEST_CASE("cross entropy gradient through classify, pooling and a one-layer scan") {
  for (const bool selective : {false, true}) {
    for (const bool lag : {false, true}) {
      auto config = tiny_config();
      config.selective_bc = selective;
      config.input_lag = lag;
      const auto m = tiny_model(config, 9);
      TsmmModel copy = m;
      std::vector<MatrixX> values;
      for (const auto& r : copy.refs()) values.push_back(*r.value);
      const std::vector<int> ids{2, 3, 4, 5};
      const ad::ScalarFunction<double> f = [&](Tape&, const std::vector<Var>& p) {
        const BoundModel bm{&m, p};
        const Var probs = ad::row_softmax(classify(bm, encode_text(bm, ids)));
        return cross_entropy(probs, {1});
      };
      const auto report = ad::check_gradient<double>(f, values);
      CAPTURE(selective);
      CAPTURE(lag);
      CHECK(report.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("splits") {
  const LabelVector labels({0, 0, 0, 0, 1, 1, 1, 1, 1, 1, kUnassigned}, 2);
  const auto s = split_nodes(labels, 0.5, 3);
  CHECK(s.train.size() + s.test.size() == 10);
  const auto count = [&](const std::vector<int>& v, int l) {
    return std::count_if(v.begin(), v.end(), [&](int i) { return labels[i] == l; });
  };
  CHECK(count(s.train, 0) == 2);
  CHECK(count(s.train, 1) == 3);
  CHECK(std::find(s.train.begin(), s.train.end(), 10) == s.train.end());
  CHECK(std::find(s.test.begin(), s.test.end(), 10) == s.test.end());
  CHECK(split_nodes(labels, 0.5, 3).train == s.train);

  std::vector<int> pool{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto sub = stratified_subset(pool, labels, 5, 1);
  CHECK(sub.size() == 5);
  CHECK(count(sub, 0) == 2);
  CHECK(count(sub, 1) == 3);
  CHECK(std::set<int>(sub.begin(), sub.end()).size() == 5);
}

TEST_CASE("training: staged accuracy cadence and separable data") {
  const auto g = separable(1);
  const auto config = small_training();
  const auto r = train_tsmm(g.texts(), *g.truth(), config);
  CHECK(r.staged_acc.size() == static_cast<std::size_t>(config.eval_stages * config.passes));
  CHECK(r.staged_acc.back() >= 0.95);
  CHECK(r.split.train.size() == 70);
  CHECK(r.split.test.size() == 30);

  auto one_pass = config;
  one_pass.passes = 1;
  CHECK(train_tsmm(g.texts(), *g.truth(), one_pass).staged_acc.size() == 10);

  // Training loss falls over the run.
  const auto& losses = r.batch_losses;
  REQUIRE(losses.size() >= 20);
  const auto third = losses.size() / 3;
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < third; ++i) {
    head += losses[i];
    tail += losses[losses.size() - 1 - i];
  }
  CHECK(tail < head);
}

TEST_CASE("training: shuffled labels stay near chance") {
  const auto g = separable(2);
  double mean_acc = 0.0;
  const int runs = 5;
  for (int s = 0; s < runs; ++s) {
    auto labels = g.truth()->labels;
    SeededRng rng(100 + s);
    rng.shuffle(std::span<int>(labels));
    auto config = small_training();
    config.seed = 50 + s;
    mean_acc += train_tsmm(g.texts(), LabelVector(labels, 2), config).staged_acc.back();
  }
  mean_acc /= runs;
  CHECK(mean_acc <= 0.5 + 0.1);
}

TEST_CASE("training warns when the split misses a class") {
  std::vector<std::string> texts{"a b", "a c", "b c", "c d"};
  const LabelVector labels({0, 0, 0, 1}, 2);
  const auto config = tiny_config();
  const auto r = train_on_split(texts, labels, {{0, 1, 2}, {3}}, config, init_model(texts, 2, config));
  CHECK(r.warnings.size() == 1);
  CHECK(r.staged_acc.size() == 10);
}

TEST_CASE("extraction is deterministic and consistent") {
  const auto g = separable(3);
  auto config = small_training();
  config.passes = 1;
  const auto r = train_tsmm(g.texts(), *g.truth(), config);
  const auto a = extract_all(g.texts(), r.model);
  const auto b = extract_all(g.texts(), r.model);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.features.rows() == g.node_count());
  CHECK(a.labels.fully_assigned());
  for (Eigen::Index i = 0; i < a.probs.rows(); ++i) {
    CHECK(a.labels[static_cast<std::size_t>(i)] == predict_label(a.probs.row(i)));
  }
  CHECK(accuracy_on(g.texts(), r.split.test, *g.truth(), r.model) == doctest::Approx(r.staged_acc.back()));
}

TEST_CASE("training is deterministic and can continue from a warm model") {
  const auto g = separable(4);
  auto config = small_training();
  config.passes = 1;
  const auto a = train_tsmm(g.texts(), *g.truth(), config);
  const auto b = train_tsmm(g.texts(), *g.truth(), config);
  CHECK(a.model.embedding == b.model.embedding);
  CHECK(a.staged_acc == b.staged_acc);
  const auto warm = train_tsmm(g.texts(), *g.truth(), config, a.model);
  CHECK(warm.model.embedding != a.model.embedding);
  CHECK(warm.model.vocab.size() == a.model.vocab.size());
}
