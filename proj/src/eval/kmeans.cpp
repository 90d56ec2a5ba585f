#include "drcl/eval/kmeans.hpp"

#include "drcl/rng.hpp"

#include <limits>

namespace drcl::eval {
namespace {

int nearest(const RowVectorX& x, const MatrixX& centers, double* dist2 = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const double d = (x - centers.row(c)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist2) *dist2 = best_d;
  return best;
}

MatrixX plus_plus_seeding(const MatrixX& points, int k, SeededRng& rng) {
  const auto n = points.rows();
  MatrixX centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  VectorX d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = (points.row(i) - centers.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total <= 0.0) {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    } else {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    }
    centers.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(i) - centers.row(c)).squaredNorm());
    }
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(const MatrixX& points, int k, std::uint64_t seed, int max_iter) {
  const auto n = points.rows();
  if (k < 1) throw ValidationError("kmeans: k must be >= 1");
  if (n < k) throw ValidationError("kmeans: fewer points than clusters");

  SeededRng rng(seed);
  KMeansResult out;
  out.centers = plus_plus_seeding(points, k, rng);
  std::vector<int> assign(static_cast<std::size_t>(n), -1);

  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = nearest(points.row(i), out.centers);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    out.iterations = iter + 1;
    if (!changed) {
      out.converged = true;
      break;
    }

    MatrixX sums = MatrixX::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[i]) += points.row(i);
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        out.centers.row(c) = sums.row(c) / counts[c];
        continue;
      }
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (points.row(i) - out.centers.row(assign[i])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      out.centers.row(c) = points.row(far);
      assign[far] = c;
    }
  }
  out.labels = LabelVector(std::move(assign), k);
  return out;
}

}  // namespace drcl::eval
