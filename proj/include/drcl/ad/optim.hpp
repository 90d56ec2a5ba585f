#pragma once

#include "drcl/ad/tape.hpp"
#include "drcl/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace drcl::ad {

/// Named reference to a trainable matrix owned by a model.
template <typename Scalar>
struct ParamRef {
  std::string name;
  Matrix<Scalar>* value;
};

/// Adam with bias correction.
///
/// `decoupled == false` is classic Adam with L2 decay folded into the
/// gradient (g + wd * p). `decoupled == true` is AdamW: the moments see the
/// raw gradient and the parameter additionally shrinks by lr * wd * p.
struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  bool decoupled = false;
};

template <typename Scalar>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const noexcept { return config_; }
  long step_count() const noexcept { return t_; }
  const std::vector<Matrix<Scalar>>& first_moments() const noexcept { return m_; }
  const std::vector<Matrix<Scalar>>& second_moments() const noexcept { return v_; }

  /// One update of every parameter. Throws NumericalError naming the first
  /// parameter whose gradient is not finite; nothing is modified in that case.
  void step(const std::vector<ParamRef<Scalar>>& params, const std::vector<Matrix<Scalar>>& grads,
            double lr) {
    if (params.size() != grads.size()) throw DimensionError("adam: parameter/gradient count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& p = *params[i].value;
      if (grads[i].rows() != p.rows() || grads[i].cols() != p.cols()) {
        throw DimensionError("adam: gradient shape mismatch for " + params[i].name);
      }
      if (!grads[i].allFinite()) throw NumericalError("adam: non-finite gradient for " + params[i].name);
    }
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.push_back(Matrix<Scalar>::Zero(p.value->rows(), p.value->cols()));
        v_.push_back(Matrix<Scalar>::Zero(p.value->rows(), p.value->cols()));
      }
    } else if (m_.size() != params.size()) {
      throw DimensionError("adam: parameter list changed between steps");
    }

    ++t_;
    const Scalar b1 = Scalar(config_.beta1);
    const Scalar b2 = Scalar(config_.beta2);
    const Scalar c1 = Scalar(1) - Scalar(std::pow(config_.beta1, double(t_)));
    const Scalar c2 = Scalar(1) - Scalar(std::pow(config_.beta2, double(t_)));
    const Scalar wd = Scalar(config_.weight_decay);
    const Scalar step = Scalar(lr);
    const Scalar eps = Scalar(config_.eps);

    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = *params[i].value;
      Matrix<Scalar> g = grads[i];
      if (!config_.decoupled && wd != Scalar(0)) g += wd * p;
      m_[i] = b1 * m_[i] + (Scalar(1) - b1) * g;
      v_[i] = b2 * v_[i] + (Scalar(1) - b2) * g.cwiseProduct(g);
      const auto m_hat = m_[i].array() / c1;
      const auto v_hat = v_[i].array() / c2;
      if (config_.decoupled && wd != Scalar(0)) p -= step * wd * p;
      p.array() -= step * m_hat / (v_hat.sqrt() + eps);
    }
  }

 private:
  AdamConfig config_;
  std::vector<Matrix<Scalar>> m_;
  std::vector<Matrix<Scalar>> v_;
  long t_ = 0;
};

/// Linear warmup to `peak_lr` over ceil(warmup_ratio * total_steps) steps,
/// then cosine decay to zero at `total_steps`.
struct LrSchedule {
  double peak_lr = 1e-3;
  double warmup_ratio = 0.001;
  long total_steps = 1;

  long warmup_steps() const {
    return static_cast<long>(std::ceil(warmup_ratio * static_cast<double>(total_steps) - 1e-12));
  }

  double at(long step) const {
    const long warm = warmup_steps();
    if (step < warm) return peak_lr * static_cast<double>(step) / static_cast<double>(warm);
    if (total_steps <= warm) return peak_lr;
    const double progress =
        std::min(1.0, static_cast<double>(step - warm) / static_cast<double>(total_steps - warm));
    return peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  }
};

/// Uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)).
template <typename Scalar>
Matrix<Scalar> glorot_uniform(Eigen::Index rows, Eigen::Index cols, SeededRng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix<Scalar> out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = Scalar(rng.uniform(-s, s));
  }
  return out;
}

}  // namespace drcl::ad
