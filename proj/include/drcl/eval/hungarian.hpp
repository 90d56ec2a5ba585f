#pragma once

#include "drcl/common.hpp"

#include <vector>

namespace drcl::eval {

/// Minimum-cost assignment. A rectangular cost matrix is padded with zeros
/// to square; the result maps every row of the padded matrix to a column
/// (entries >= cost.cols() are padding columns).
std::vector<int> hungarian(const MatrixX& cost);

}  // namespace drcl::eval
