#include <doctest.h>

#include "oracles.hpp"

#include "drcl/ad/gradcheck.hpp"
#include "drcl/gcn/gcn_cdm.hpp"
#include "drcl/tag/synthetic.hpp"

#include <cmath>

using namespace drcl;
using namespace drcl::gcn;
using warmstart::ProtoCommunities;
using warmstart::ProtoSource;

namespace {

MatrixX random(Eigen::Index r, Eigen::Index c, SeededRng& rng, double lo = -1.0, double hi = 1.0) {
  MatrixX m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

MatrixX one_hot(const std::vector<int>& labels, int k) {
  MatrixX r = MatrixX::Zero(static_cast<Eigen::Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) r(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return r;
}

std::vector<std::vector<double>> rows_of(const MatrixX& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  }
  return out;
}

double entropy(const RowVectorX& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

EncoderParams identity_params(int d) {
  EncoderParams p;
  p.weights.push_back(MatrixX::Identity(d, d));
  p.slopes.push_back(MatrixX::Constant(1, 1, 0.25));
  return p;
}

tag::TextAttributedGraph two_block(std::uint64_t seed) {
  tag::SyntheticSpec spec;
  spec.k = 2;
  spec.block_sizes = {30, 30};
  spec.p_in = 0.3;
  spec.p_out = 0.02;
  spec.seed = seed;
  return tag::generate_sbm_tag(spec);
}

}  // namespace

TEST_CASE("encode examples") {
  const auto single = tag::TextAttributedGraph::build(1, {}, {"a"});
  MatrixX x(1, 2);
  x << 3, 4;
  const MatrixX h = encode(GraphOperators::from(single), x, identity_params(2));
  CHECK(h(0, 0) == doctest::Approx(0.6));
  CHECK(h(0, 1) == doctest::Approx(0.8));

  const auto pair = tag::TextAttributedGraph::build(2, {{0, 1}}, {"a", "b"});
  MatrixX same(2, 3);
  same << 1, -2, 0.5, 1, -2, 0.5;
  SeededRng rng(1);
  GcnConfig config;
  config.hidden_dim = 5;
  const auto params = EncoderParams::init(3, config, rng);
  const MatrixX hp = encode(GraphOperators::from(pair), same, params);
  CHECK((hp.row(0) - hp.row(1)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("encode rows have unit norm and follow node relabeling") {
  const auto g = two_block(2);
  SeededRng rng(4);
  GcnConfig config;
  config.hidden_dim = 8;
  const auto params = EncoderParams::init(5, config, rng);
  const MatrixX x = random(g.node_count(), 5, rng);
  const MatrixX h = encode(GraphOperators::from(g), x, params);
  CHECK((h.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-9);

  std::vector<int> perm(static_cast<std::size_t>(g.node_count()));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<int>(perm));
  std::vector<tag::Edge> edges;
  for (auto [u, v] : g.edges()) edges.emplace_back(perm[u], perm[v]);
  const auto pg = tag::TextAttributedGraph::build(g.node_count(), edges, g.texts());
  MatrixX px(x.rows(), x.cols());
  for (int i = 0; i < g.node_count(); ++i) px.row(perm[i]) = x.row(i);
  const MatrixX ph = encode(GraphOperators::from(pg), px, params);
  for (int i = 0; i < g.node_count(); ++i) CHECK((ph.row(perm[i]) - h.row(i)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("compute_centers examples") {
  MatrixX h(3, 2);
  h << 1, 0, 0, 1, 0.6, -0.8;
  const MatrixX s = compute_centers(h, {{{0, 1}, {2}}, ProtoSource::Structural});
  CHECK(s(0, 0) == 0.5);
  CHECK(s(0, 1) == 0.5);
  CHECK(s.row(1) == h.row(2));

  MatrixX sym(2, 2);
  sym << 0.6, 0.8, -0.6, -0.8;
  CHECK(compute_centers(sym, {{{0, 1}}, ProtoSource::Structural}).isZero());
}

TEST_CASE("soft_relations examples") {
  GcnConfig config;
  MatrixX h(2, 2);
  h << 1, 0, 0, 1;
  MatrixX one(1, 2);
  one << 0.3, 0.4;
  CHECK(soft_relations(h, one, config).isApprox(MatrixX::Ones(2, 1)));

  MatrixX centers(2, 2);
  centers << 1, 1, 1, 1;
  const MatrixX equal = soft_relations(h, centers, config);
  CHECK(equal(0, 0) == doctest::Approx(0.5));
  CHECK(equal(0, 1) == doctest::Approx(0.5));

  MatrixX distinct(2, 2);
  distinct << 0.9, 0.1, 0.2, 0.7;
  GcnConfig soft = config;
  soft.delta = 1.0;
  const MatrixX sharp_r = soft_relations(h, distinct, config);
  const MatrixX soft_r = soft_relations(h, distinct, soft);
  CHECK(entropy(sharp_r.row(0)) < entropy(soft_r.row(0)));
  CHECK(sharp_r(0, 0) > 0.99);

  GcnConfig literal = config;
  literal.similarity_sign = -1;
  CHECK(soft_relations(h, distinct, literal)(0, 0) < 0.01);
}

TEST_CASE("soft relations are row-stochastic") {
  SeededRng rng(12);
  GcnConfig config;
  for (int t = 0; t < 50; ++t) {
    const MatrixX r = soft_relations(random(7, 4, rng), random(3, 4, rng), config);
    CHECK((r.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(r.minCoeff() >= 0.0);
  }
}

TEST_CASE("harden examples and temperature invariance") {
  MatrixX r(3, 3);
  r << 0.2, 0.7, 0.1, 0.5, 0.5, 0.0, 0, 0, 1;
  CHECK(harden(r).labels == std::vector<int>{1, 0, 2});
  CHECK(harden(one_hot({2, 0, 1}, 3)).labels == std::vector<int>{2, 0, 1});

  SeededRng rng(19);
  GcnConfig a;
  a.delta = 1.0;
  GcnConfig b;
  b.delta = 37.5;
  for (int t = 0; t < 20; ++t) {
    const MatrixX h = random(10, 3, rng);
    const MatrixX s = random(4, 3, rng);
    CHECK(harden(soft_relations(h, s, a)) == harden(soft_relations(h, s, b)));
  }
}

TEST_CASE("modularity loss examples") {
  const auto g = oracle::barbell();
  CHECK(modularity_loss(MatrixX::Constant(6, 3, 1.0 / 3.0), g) == doctest::Approx(0.0).scale(1.0));
  CHECK(std::abs(modularity_loss(one_hot({0, 0, 0, 1, 1, 1}, 2), g) + 5.0 / 14.0) < 1e-12);
}

TEST_CASE("modularity loss equals the double-sum oracle and -Q for one-hot rows") {
  SeededRng rng(23);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto c = oracle::random_case(seed + 500);
    const int n = c.graph.node_count();
    MatrixX r = random(n, 3, rng, 0.01, 1.0);
    r = r.array().colwise() / r.rowwise().sum().array();
    CHECK(std::abs(modularity_loss(r, c.graph) - oracle::soft_modularity_loss(n, c.graph.edges(), rows_of(r))) < 1e-12);

    const auto dense = LabelVector::from_raw(c.a).compacted();
    const MatrixX hot = one_hot(dense.labels, dense.k);
    CHECK(std::abs(modularity_loss(hot, c.graph) + eval::modularity_q(c.graph, c.a)) < 1e-12);
  }
}

TEST_CASE("modularity loss gradient through encode, centers and soft relations") {
  const auto g = oracle::barbell();
  const auto ops = GraphOperators::from(g);
  const ProtoCommunities proto{{{0, 1}, {4, 5}}, ProtoSource::Structural};
  const auto pool = pooling_matrix(proto, 6);
  SeededRng rng(31);
  const MatrixX x = random(6, 3, rng);
  for (const double delta : {1.0, 30.0}) {
    GcnConfig config;
    config.delta = delta;
    const ad::ScalarFunction<double> f = [&](Tape& tape, const std::vector<Var>& p) {
      const std::vector<Var> w{p[0]};
      const std::vector<Var> s{p[1]};
      return forward(tape, ops, pool, tape.constant(x), w, s, config).loss;
    };
    for (int trial = 0; trial < 5; ++trial) {
      const auto report = ad::check_gradient<double>(f, {random(3, 4, rng), MatrixX::Constant(1, 1, 0.25)});
      CAPTURE(delta);
      CHECK(report.max_rel_error < 1e-4);
      CHECK_FALSE(report.unreliable);
    }
  }
}

TEST_CASE("training: zero steps returns the initialization") {
  const auto g = two_block(3);
  SeededRng rng(2);
  const MatrixX x = random(g.node_count(), 6, rng);
  const ProtoCommunities proto{{{0, 1, 2}, {40, 41}}, ProtoSource::Structural};
  GcnConfig config;
  config.steps = 0;
  config.hidden_dim = 8;
  config.seed = 5;
  const auto r = train_gcn_cdm(g, x, proto, config);
  SeededRng init_rng(5);
  const auto init = EncoderParams::init(6, config, init_rng);
  CHECK(r.params.weights.front() == init.weights.front());
  const auto ops = GraphOperators::from(g);
  const MatrixX h = encode(ops, x, init);
  CHECK(r.h.isApprox(h, 1e-14));
  CHECK(r.r.isApprox(soft_relations(h, compute_centers(h, proto), config), 1e-14));
  CHECK(r.history.empty());
  CHECK(r.labels.size() == static_cast<std::size_t>(g.node_count()));
}

TEST_CASE("training lowers the loss window by window") {
  const auto g = two_block(1);
  SeededRng rng(8);
  const MatrixX x = random(g.node_count(), 10, rng);
  std::vector<int> a, b;
  for (int i = 0; i < 30; ++i) (i < 15 ? a : b).push_back(i);
  for (int i = 30; i < 60; ++i) (i < 45 ? a : b).push_back(i);
  // Deliberately mixed groups so training has something to fix.
  const ProtoCommunities proto{{a, b}, ProtoSource::Structural};
  GcnConfig config;
  config.hidden_dim = 16;
  config.lr = 1e-2;
  config.seed = 3;
  const auto r = train_gcn_cdm(g, x, proto, config);
  REQUIRE(r.history.size() == 300);
  std::vector<double> windows;
  for (std::size_t start = 0; start + 50 <= r.history.size(); start += 50) {
    double m = 0.0;
    for (std::size_t i = start; i < start + 50; ++i) m += r.history[i].loss;
    windows.push_back(m / 50.0);
  }
  for (std::size_t i = 1; i < windows.size(); ++i) {
    CHECK(windows[i] <= windows[i - 1] + 0.05 * std::abs(windows[i - 1]));
  }
  CHECK(r.final_loss < r.history.front().loss);
}

TEST_CASE("training records metrics, reuses warm parameters and labels dropped nodes") {
  const auto g = two_block(5);
  SeededRng rng(9);
  const MatrixX x = random(g.node_count(), 4, rng);
  const ProtoCommunities proto{{{0, 1, 2, 3}, {30, 31, 32}}, ProtoSource::Structural};
  GcnConfig config;
  config.steps = 20;
  config.hidden_dim = 6;
  config.metrics_every = 10;
  const auto r = train_gcn_cdm(g, x, proto, config);
  CHECK(r.history[0].metrics.has_value());
  CHECK_FALSE(r.history[1].metrics.has_value());
  CHECK(r.history[10].metrics.has_value());
  CHECK(r.labels.fully_assigned());
  CHECK(r.labels.k == 2);

  GcnConfig none = config;
  none.steps = 0;
  const auto warm = train_gcn_cdm(g, x, proto, none, &r.params);
  CHECK(warm.params.weights.front() == r.params.weights.front());
  CHECK(warm.h.isApprox(r.h));

  GcnConfig wider = none;
  wider.hidden_dim = 7;
  const auto fresh = train_gcn_cdm(g, x, proto, wider, &r.params);
  CHECK(fresh.params.weights.front().cols() == 7);
}

TEST_CASE("training rejects bad input") {
  const auto g = two_block(5);
  const ProtoCommunities proto{{{0}}, ProtoSource::Structural};
  GcnConfig config;
  CHECK_THROWS_AS(train_gcn_cdm(g, MatrixX::Zero(3, 2), proto, config), DimensionError);
  CHECK_THROWS_AS(train_gcn_cdm(g, MatrixX::Zero(60, 2), ProtoCommunities{}, config), ValidationError);
  config.delta = 0.0;
  CHECK_THROWS_AS(train_gcn_cdm(g, MatrixX::Zero(60, 2), proto, config), ValidationError);
}
