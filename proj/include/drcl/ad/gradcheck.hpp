#pragma once

#include "drcl/ad/tape.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace drcl::ad {

struct GradCheckReport {
  /// max over coordinates of |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  Eigen::Index worst_index = 0;
  /// Set when some coordinate looks non-differentiable at the sample point:
  /// its one-sided slopes disagree by an amount that does not shrink with the step.
  bool unreliable = false;
  std::size_t coordinates = 0;
};

template <typename Scalar>
using ScalarFunction =
    std::function<Var<Scalar>(Tape<Scalar>&, const std::vector<Var<Scalar>>& params)>;

/// Compares reverse-mode gradients of `f` at `params` with central differences.
template <typename Scalar>
GradCheckReport check_gradient(const ScalarFunction<Scalar>& f, std::vector<Matrix<Scalar>> params,
                               double step = 1e-5, double floor = 1e-6) {
  const auto evaluate = [&](const std::vector<Matrix<Scalar>>& values) {
    Tape<Scalar> tape;
    std::vector<Var<Scalar>> leaves;
    for (const auto& v : values) leaves.push_back(tape.leaf(v));
    return static_cast<double>(f(tape, leaves).item());
  };

  std::vector<Matrix<Scalar>> analytic;
  {
    Tape<Scalar> tape;
    std::vector<Var<Scalar>> leaves;
    for (const auto& v : params) leaves.push_back(tape.leaf(v));
    tape.backward(f(tape, leaves));
    for (const auto& leaf : leaves) analytic.push_back(tape.grad(leaf));
  }

  GradCheckReport report;
  const double base = evaluate(params);
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (Eigen::Index i = 0; i < params[p].size(); ++i) {
      const Scalar original = params[p].data()[i];
      const auto at = [&](double offset) {
        params[p].data()[i] = Scalar(double(original) + offset);
        const double value = evaluate(params);
        params[p].data()[i] = original;
        return value;
      };
      const double plus = at(step);
      const double minus = at(-step);
      const double numeric = (plus - minus) / (2.0 * step);
      const double exact = static_cast<double>(analytic[p].data()[i]);
      const double denom = std::max({std::abs(exact), std::abs(numeric), floor});
      const double rel = std::abs(exact - numeric) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p;
        report.worst_index = i;
      }

      const double jump = std::abs(plus - 2.0 * base + minus) / step;
      const double fine = step / 10.0;
      const double jump_fine = std::abs(at(fine) - 2.0 * base + at(-fine)) / fine;
      const double scale = std::max(1.0, std::abs(numeric));
      if (jump_fine > 1e-6 * scale && jump_fine > 0.5 * jump) report.unreliable = true;
      ++report.coordinates;
    }
  }
  return report;
}

}  // namespace drcl::ad
