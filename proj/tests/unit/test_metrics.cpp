#include <doctest.h>

#include "oracles.hpp"

#include "drcl/eval/hungarian.hpp"
#include "drcl/eval/kmeans.hpp"
#include "drcl/eval/metrics.hpp"

#include <numeric>

using namespace drcl;
using namespace drcl::eval;

namespace {

using Labels = std::vector<int>;

double assignment_cost(const MatrixX& cost, const std::vector<int>& assign) {
  double c = 0.0;
  for (Eigen::Index r = 0; r < cost.rows(); ++r) c += cost(r, assign[static_cast<std::size_t>(r)]);
  return c;
}

Labels permute(const Labels& v, const std::vector<int>& perm) {
  Labels out;
  for (int x : v) out.push_back(perm[static_cast<std::size_t>(x)]);
  return out;
}

}  // namespace

TEST_CASE("modularity examples") {
  const auto g = oracle::barbell();
  CHECK(modularity_q(g, Labels(6, 0)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(modularity_q(g, Labels{0, 0, 0, 1, 1, 1}) == doctest::Approx(5.0 / 14.0).epsilon(1e-15));
  CHECK(oracle::best_modularity(6, g.edges()) == doctest::Approx(5.0 / 14.0).epsilon(1e-15));
  const auto empty = tag::TextAttributedGraph::build(2, {}, {"a", "b"});
  CHECK_THROWS_AS(modularity_q(empty, Labels{0, 1}), ValidationError);
}

TEST_CASE("metrics equal brute-force oracles on random small graphs") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = oracle::random_case(seed);
    const int n = c.graph.node_count();
    CAPTURE(seed);
    CHECK(std::abs(modularity_q(c.graph, c.a) - oracle::modularity(n, c.graph.edges(), c.a)) < 1e-12);
    CHECK(std::abs(nmi(c.a, c.b) - oracle::nmi(c.a, c.b)) < 1e-12);
    CHECK(std::abs(ari(c.a, c.b) - oracle::ari(c.a, c.b)) < 1e-12);
    CHECK(std::abs(acc(c.a, c.b) - oracle::acc(c.a, c.b)) < 1e-12);
  }
}

TEST_CASE("pairwise metrics are symmetric and permutation invariant") {
  for (std::uint64_t seed = 200; seed < 300; ++seed) {
    const auto c = oracle::random_case(seed);
    CHECK(nmi(c.a, c.b) == doctest::Approx(nmi(c.b, c.a)).epsilon(1e-12));
    CHECK(ari(c.a, c.b) == doctest::Approx(ari(c.b, c.a)).epsilon(1e-12));
    const std::vector<int> perm{3, 0, 4, 1, 2};
    CHECK(acc(c.a, permute(c.b, perm)) == doctest::Approx(acc(c.a, c.b)).epsilon(1e-12));
    CHECK(acc(permute(c.a, perm), c.b) == doctest::Approx(acc(c.a, c.b)).epsilon(1e-12));
    CHECK(macro_f1(permute(c.a, perm), permute(c.b, perm)) ==
          doctest::Approx(macro_f1(c.a, c.b)).epsilon(1e-12));
  }
}

TEST_CASE("nmi examples") {
  CHECK(nmi(Labels{0, 0, 1, 1}, Labels{5, 5, 7, 7}) == doctest::Approx(1.0));
  CHECK(nmi(Labels{0, 0, 1, 1}, Labels{0, 0, 0, 0}) == doctest::Approx(0.0));
  CHECK(nmi(Labels{0, 0, 1, 1}, Labels{0, 1, 0, 1}) == doctest::Approx(0.0));
  CHECK(nmi(Labels{0, 0, 0}, Labels{1, 1, 1}) == 1.0);
}

TEST_CASE("ari examples") {
  CHECK(ari(Labels{0, 0, 1, 1}, Labels{1, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(ari(Labels{0, 0, 1, 1}, Labels{0, 1, 0, 1}) == doctest::Approx(-0.5));
}

TEST_CASE("acc and f1 examples") {
  CHECK(acc(Labels{0, 0, 1, 1}, Labels{1, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(acc(Labels{0, 0, 1, 1}, Labels{0, 1, 0, 1}) == doctest::Approx(0.5));
  CHECK(acc(Labels{0, 0, 1, 1}, Labels{0, 0, 0, 0}) == doctest::Approx(0.5));
  CHECK(macro_f1(Labels{0, 1, 2}, Labels{2, 0, 1}) == doctest::Approx(1.0));
  CHECK(macro_f1(Labels{0, 0, 1, 1}, Labels{0, 0, 0, 0}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("confusion matrix totals") {
  const auto c = ConfusionMatrix::from(Labels{2, 2, 9, 9, 9}, Labels{0, 1, 1, 1, 0});
  CHECK(c.total == 5.0);
  CHECK(c.counts.sum() == 5.0);
  CHECK(c.counts.minCoeff() >= 0.0);
  CHECK(c.counts(1, 1) == 2.0);
  CHECK_THROWS_AS(ConfusionMatrix::from(Labels{0, 1}, Labels{0}), DimensionError);
}

TEST_CASE("hungarian examples") {
  MatrixX diag(3, 3);
  diag << 0, 5, 5, 5, 0, 5, 5, 5, 0;
  CHECK(hungarian(diag) == std::vector<int>{0, 1, 2});
  MatrixX anti(2, 2);
  anti << 1, 0, 0, 1;
  CHECK(hungarian(anti) == std::vector<int>{1, 0});
}

TEST_CASE("hungarian equals enumeration on random 5x5 costs") {
  SeededRng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    MatrixX cost(5, 5);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = rng.uniform(-10, 10);
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do best = std::min(best, assignment_cost(cost, perm));
    while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(assignment_cost(cost, hungarian(cost)) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("hungarian pads rectangular costs") {
  MatrixX cost(2, 3);
  cost << 5, 1, 9, 2, 8, 0;
  const auto a = hungarian(cost);
  REQUIRE(a.size() == 3);
  CHECK(a[0] == 1);
  CHECK(a[1] == 2);
}

TEST_CASE("davies-bouldin and dunn examples") {
  MatrixX pts(4, 1);
  pts << 0, 2, 10, 12;
  const Labels two{0, 0, 1, 1};
  CHECK(dbi(pts, two) == doctest::Approx(0.2));
  CHECK(dunn(pts, two) == doctest::Approx(4.0));
  CHECK(dbi(pts * 7.5, two) == doctest::Approx(0.2));
  CHECK(dunn(pts * 7.5, two) == doctest::Approx(4.0));

  MatrixX coincident(4, 2);
  coincident << 1, 1, 1, 1, 5, 5, 5, 5;
  CHECK(dbi(coincident, two) == 0.0);
  CHECK(dunn(coincident, two) == kDunnSentinel);
  CHECK(dunn(pts, Labels{0, 0, 0, 0}) == 0.0);
}

TEST_CASE("kmeans") {
  MatrixX pts(4, 2);
  pts << 0, 0, 0, 1, 100, 100, 100, 101;
  const auto one = kmeans(pts, 1, 3);
  CHECK(one.labels.labels == Labels{0, 0, 0, 0});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = kmeans(pts, 2, seed);
    CHECK(r.labels.labels[0] == r.labels.labels[1]);
    CHECK(r.labels.labels[2] == r.labels.labels[3]);
    CHECK(r.labels.labels[0] != r.labels.labels[2]);
    CHECK(r.labels.k == 2);
  }
  SeededRng rng(4);
  MatrixX cloud(60, 3);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) cloud.data()[i] = rng.uniform();
  const auto a = kmeans(cloud, 4, 11);
  const auto b = kmeans(cloud, 4, 11);
  CHECK(a.labels == b.labels);
  CHECK(a.centers == b.centers);
}

TEST_CASE("evaluate_partition only scores labeled nodes") {
  const auto g = tag::TextAttributedGraph::build(
      4, {{0, 1}, {2, 3}}, {"a", "b", "c", "d"}, std::nullopt, LabelVector({0, 0, 1, kUnassigned}, 2));
  MatrixX emb(4, 1);
  emb << 0, 0.1, 5, 5.1;
  const auto m = evaluate_partition(g, emb, Labels{0, 0, 1, 0}, g.truth());
  REQUIRE(m.acc);
  CHECK(*m.acc == doctest::Approx(1.0));
  CHECK(m.q == doctest::Approx(modularity_q(g, Labels{0, 0, 1, 0})));
  const auto none = evaluate_partition(g, emb, Labels{0, 0, 1, 1}, std::nullopt);
  CHECK_FALSE(none.nmi);
  CHECK_FALSE(none.ari);
}
