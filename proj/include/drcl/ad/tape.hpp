#pragma once

#include "drcl/common.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace drcl::ad {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
class Tape;

/// Handle to a value recorded on a tape. Cheap to copy; valid while the tape lives.
template <typename Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  int id = -1;

  const Matrix<Scalar>& value() const { return tape->value(*this); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 variable.
  Scalar item() const { return value()(0, 0); }
};

/// Linear record of a computation, replayed in reverse by backward().
///
/// Nodes are appended in evaluation order, so the record is acyclic and the
/// reverse of insertion order is a valid reverse topological order. Each
/// node owns its value, an adjoint (allocated lazily) and a closure that
/// pushes the adjoint into its inputs. A tape belongs to one thread.
template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  using Backward = std::function<void(Tape&, const Mat& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable input.
  Var<Scalar> leaf(Mat value, std::string_view name = "leaf") {
    return push(std::move(value), name, true, {});
  }
  /// Input that never receives a gradient.
  Var<Scalar> constant(Mat value) { return push(std::move(value), "constant", false, {}); }

  /// Records the output of a primitive. The value is checked for NaN/Inf.
  Var<Scalar> record(Mat value, std::string_view op, bool requires_grad, Backward backward) {
    if (!value.allFinite()) {
      throw NumericalError(std::string(op) + ": produced a non-finite value");
    }
    return push(std::move(value), op, requires_grad, std::move(backward));
  }

  const Mat& value(Var<Scalar> v) const { return nodes_[check(v)].value; }
  bool requires_grad(Var<Scalar> v) const { return nodes_[check(v)].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Adds `g` into the adjoint of `v` (no-op for constants).
  void accumulate(Var<Scalar> v, const Mat& g) {
    auto& node = nodes_[check(v)];
    if (!node.requires_grad) return;
    if (node.grad.size() == 0) node.grad = g;
    else node.grad += g;
  }

  /// Reverse sweep from a scalar loss. Afterwards grad() returns d loss / d v
  /// for every node; nodes the loss does not reach get zeros.
  void backward(Var<Scalar> loss) {
    const int root = check(loss);
    if (nodes_[root].value.size() != 1) {
      throw DimensionError("backward: loss must be a 1x1 scalar, got " +
                           std::to_string(nodes_[root].value.rows()) + "x" +
                           std::to_string(nodes_[root].value.cols()));
    }
    for (auto& node : nodes_) node.grad.resize(0, 0);
    nodes_[root].grad = Mat::Ones(1, 1);
    for (int i = root; i >= 0; --i) {
      auto& node = nodes_[i];
      if (node.grad.size() == 0 || !node.backward) continue;
      const Mat grad = node.grad;
      node.backward(*this, grad);
    }
  }

  Mat grad(Var<Scalar> v) const {
    const auto& node = nodes_[check(v)];
    if (node.grad.size() == 0) return Mat::Zero(node.value.rows(), node.value.cols());
    return node.grad;
  }

 private:
  struct Node {
    Mat value;
    Mat grad;
    Backward backward;
    std::string_view op;
    bool requires_grad = false;
  };

  Var<Scalar> push(Mat value, std::string_view op, bool requires_grad, Backward backward) {
    nodes_.push_back(Node{std::move(value), Mat(), std::move(backward), op, requires_grad});
    return Var<Scalar>{this, static_cast<int>(nodes_.size()) - 1};
  }

  int check(Var<Scalar> v) const {
    if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
      throw std::logic_error("variable does not belong to this tape");
    }
    return v.id;
  }

  std::vector<Node> nodes_;
};

}  // namespace drcl::ad
