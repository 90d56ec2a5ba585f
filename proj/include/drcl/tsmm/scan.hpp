#pragma once

#include "drcl/ad/tape.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace drcl::tsmm {

/// Below this |ΔA| the input coefficient uses its analytic limit ΔB.
inline constexpr double kScanLimitThreshold = 1e-6;

namespace detail {

/// (e^z - 1) / z, and its derivative, with the z -> 0 limits.
template <typename Scalar>
Scalar phi(Scalar z) {
  if (std::abs(z) < Scalar(kScanLimitThreshold)) return Scalar(1);
  return std::expm1(z) / z;
}

template <typename Scalar>
Scalar phi_prime(Scalar z) {
  if (std::abs(z) < Scalar(1e-4)) return Scalar(0.5) + z / Scalar(3) + z * z / Scalar(8);
  return (z * std::exp(z) - std::expm1(z)) / (z * z);
}

/// Shared forward; fills `states` (L blocks of d x N) when requested.
template <typename Scalar>
ad::Matrix<Scalar> scan_forward(const ad::Matrix<Scalar>& x, const ad::Matrix<Scalar>& delta,
                                const ad::Matrix<Scalar>& a, const ad::Matrix<Scalar>& b,
                                const ad::Matrix<Scalar>& c, bool per_token_bc,
                                std::vector<ad::Matrix<Scalar>>* states) {
  const auto len = x.rows();
  const auto d = x.cols();
  const auto n_state = a.cols();
  ad::Matrix<Scalar> h = ad::Matrix<Scalar>::Zero(d, n_state);
  ad::Matrix<Scalar> y(len, d);
  if (states) states->assign(static_cast<std::size_t>(len), ad::Matrix<Scalar>());
  for (Eigen::Index t = 0; t < len; ++t) {
    for (Eigen::Index ch = 0; ch < d; ++ch) {
      const Scalar dt = delta(t, ch);
      Scalar acc = 0;
      for (Eigen::Index s = 0; s < n_state; ++s) {
        const Scalar z = dt * a(ch, s);
        const Scalar bv = per_token_bc ? b(t, s) : b(ch, s);
        const Scalar cv = per_token_bc ? c(t, s) : c(ch, s);
        h(ch, s) = std::exp(z) * h(ch, s) + phi(z) * dt * bv * x(t, ch);
        acc += cv * h(ch, s);
      }
      y(t, ch) = acc;
    }
    if (!h.allFinite()) {
      throw NumericalError("ssm_scan: non-finite state at token " + std::to_string(t));
    }
    if (states) (*states)[static_cast<std::size_t>(t)] = h;
  }
  return y;
}

}  // namespace detail

/// Diagonal selective state-space recurrence, per channel ch and state s:
///   h_t = exp(Δ_t A) h_{t-1} + φ(Δ_t A) Δ_t B x_t,   y_t = Σ_s C h_t,   h_{-1} = 0
/// with φ(z) = (e^z - 1)/z. x and delta are L x d, A is d x N. B and C are
/// d x N, or L x N when `per_token_bc` is set.
template <typename Scalar>
ad::Var<Scalar> selective_scan(ad::Var<Scalar> x, ad::Var<Scalar> delta, ad::Var<Scalar> a,
                               ad::Var<Scalar> b, ad::Var<Scalar> c, bool per_token_bc) {
  auto& tape = *x.tape;
  for (auto v : {delta, a, b, c}) {
    if (v.tape != &tape) throw std::logic_error("selective_scan: operands on different tapes");
  }
  const auto len = x.rows();
  const auto d = x.cols();
  const auto n_state = a.cols();
  const auto bc_rows = per_token_bc ? len : d;
  if (delta.rows() != len || delta.cols() != d || a.rows() != d || b.rows() != bc_rows ||
      b.cols() != n_state || c.rows() != bc_rows || c.cols() != n_state) {
    throw DimensionError("selective_scan: inconsistent shapes (x " + std::to_string(len) + "x" +
                         std::to_string(d) + ", A " + std::to_string(a.rows()) + "x" +
                         std::to_string(n_state) + ")");
  }
  ad::Matrix<Scalar> y = detail::scan_forward<Scalar>(x.value(), delta.value(), a.value(), b.value(),
                                              c.value(), per_token_bc, nullptr);
  const bool rg = tape.requires_grad(x) || tape.requires_grad(delta) || tape.requires_grad(a) ||
                  tape.requires_grad(b) || tape.requires_grad(c);
  return tape.record(
      std::move(y), "selective_scan", rg,
      [x, delta, a, b, c, per_token_bc](ad::Tape<Scalar>& tp, const ad::Matrix<Scalar>& gy) {
        using Mat = ad::Matrix<Scalar>;
        const auto& xv = tp.value(x);
        const auto& dv = tp.value(delta);
        const auto& av = tp.value(a);
        const auto& bv = tp.value(b);
        const auto& cv = tp.value(c);
        std::vector<Mat> states;
        detail::scan_forward<Scalar>(xv, dv, av, bv, cv, per_token_bc, &states);

        const auto len = xv.rows();
        const auto d = xv.cols();
        const auto n_state = av.cols();
        Mat gx = Mat::Zero(len, d);
        Mat gd = Mat::Zero(len, d);
        Mat ga = Mat::Zero(d, n_state);
        Mat gb = Mat::Zero(bv.rows(), n_state);
        Mat gc = Mat::Zero(cv.rows(), n_state);
        Mat gh = Mat::Zero(d, n_state);
        for (Eigen::Index t = len - 1; t >= 0; --t) {
          const Mat& h = states[static_cast<std::size_t>(t)];
          for (Eigen::Index ch = 0; ch < d; ++ch) {
            const Scalar dt = dv(t, ch);
            const Scalar xt = xv(t, ch);
            const Scalar g = gy(t, ch);
            for (Eigen::Index s = 0; s < n_state; ++s) {
              const Eigen::Index bc_row = per_token_bc ? t : ch;
              const Scalar bval = bv(bc_row, s);
              gc(bc_row, s) += g * h(ch, s);
              const Scalar ght = gh(ch, s) + g * cv(bc_row, s);
              const Scalar z = dt * av(ch, s);
              const Scalar decay = std::exp(z);
              const Scalar ph = detail::phi(z);
              const Scalar h_prev = t > 0 ? states[static_cast<std::size_t>(t - 1)](ch, s) : Scalar(0);
              // h_t = decay * h_prev + ph * dt * bval * xt
              const Scalar g_bbar = ght * xt;
              gx(t, ch) += ght * ph * dt * bval;
              const Scalar gz = ght * h_prev * decay + g_bbar * dt * bval * detail::phi_prime(z);
              gd(t, ch) += gz * av(ch, s) + g_bbar * ph * bval;
              ga(ch, s) += gz * dt;
              gb(bc_row, s) += g_bbar * ph * dt;
              gh(ch, s) = ght * decay;
            }
          }
        }
        tp.accumulate(x, gx);
        tp.accumulate(delta, gd);
        tp.accumulate(a, ga);
        tp.accumulate(b, gb);
        tp.accumulate(c, gc);
      });
}

/// Value-only evaluation of selective_scan.
template <typename Scalar>
ad::Matrix<Scalar> scan_values(const ad::Matrix<Scalar>& x, const ad::Matrix<Scalar>& delta,
                               const ad::Matrix<Scalar>& a, const ad::Matrix<Scalar>& b,
                               const ad::Matrix<Scalar>& c, bool per_token_bc) {
  ad::Tape<Scalar> tape;
  return selective_scan(tape.constant(x), tape.constant(delta), tape.constant(a), tape.constant(b),
                        tape.constant(c), per_token_bc)
      .value();
}

}  // namespace drcl::tsmm
