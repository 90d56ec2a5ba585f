#pragma once

#include "drcl/common.hpp"
#include "drcl/labels.hpp"

#include <cstdint>

namespace drcl::eval {

struct KMeansResult {
  LabelVector labels;
  MatrixX centers;
  int iterations = 0;
  bool converged = false;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or `max_iter` is reached. Distance ties go to the lowest center
/// index; a cluster that empties is reseeded at the point farthest from its
/// current center.
KMeansResult kmeans(const MatrixX& points, int k, std::uint64_t seed, int max_iter = 100);

}  // namespace drcl::eval
