#pragma once

#include "drcl/ad/tape.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace drcl::ad {

template <typename Scalar>
using Sparse = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

namespace detail {

template <typename Scalar>
Tape<Scalar>& same_tape(std::string_view op, Var<Scalar> a) {
  if (!a.tape) throw std::logic_error(std::string(op) + ": unbound variable");
  return *a.tape;
}

template <typename Scalar, typename... Rest>
Tape<Scalar>& same_tape(std::string_view op, Var<Scalar> a, Var<Scalar> b, Rest... rest) {
  if (a.tape != b.tape) throw std::logic_error(std::string(op) + ": operands on different tapes");
  return same_tape(op, b, rest...);
}

inline std::string shape(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <typename Scalar>
[[noreturn]] void mismatch(std::string_view op, Var<Scalar> a, Var<Scalar> b) {
  throw DimensionError(std::string(op) + ": shape mismatch " + shape(a.rows(), a.cols()) +
                       " vs " + shape(b.rows(), b.cols()));
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> matmul(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape("matmul", a, b);
  if (a.cols() != b.rows()) detail::mismatch("matmul", a, b);
  Matrix<Scalar> out = a.value() * b.value();
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.record(std::move(out), "matmul", rg, [a, b](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g * tp.value(b).transpose());
    if (tp.requires_grad(b)) tp.accumulate(b, tp.value(a).transpose() * g);
  });
}

/// Product with a constant sparse matrix. `m` must outlive the tape's backward pass.
template <typename Scalar>
Var<Scalar> spmm(const Sparse<Scalar>& m, Var<Scalar> x) {
  auto& t = detail::same_tape("spmm", x);
  if (m.cols() != x.rows()) {
    throw DimensionError("spmm: shape mismatch " + detail::shape(m.rows(), m.cols()) + " vs " +
                         detail::shape(x.rows(), x.cols()));
  }
  Matrix<Scalar> out = m * x.value();
  const Sparse<Scalar>* mp = &m;
  return t.record(std::move(out), "spmm", t.requires_grad(x),
                  [mp, x](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    tp.accumulate(x, Matrix<Scalar>(mp->transpose() * g));
                  });
}

template <typename Scalar>
Var<Scalar> transpose(Var<Scalar> a) {
  auto& t = detail::same_tape("transpose", a);
  return t.record(a.value().transpose(), "transpose", t.requires_grad(a),
                  [a](Tape<Scalar>& tp, const Matrix<Scalar>& g) { tp.accumulate(a, g.transpose()); });
}

template <typename Scalar>
Var<Scalar> add(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape("add", a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) detail::mismatch("add", a, b);
  Matrix<Scalar> out = a.value() + b.value();
  return t.record(std::move(out), "add", t.requires_grad(a) || t.requires_grad(b),
                  [a, b](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    tp.accumulate(a, g);
                    tp.accumulate(b, g);
                  });
}

template <typename Scalar>
Var<Scalar> sub(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape("sub", a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) detail::mismatch("sub", a, b);
  Matrix<Scalar> out = a.value() - b.value();
  return t.record(std::move(out), "sub", t.requires_grad(a) || t.requires_grad(b),
                  [a, b](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    tp.accumulate(a, g);
                    tp.accumulate(b, Matrix<Scalar>(-g));
                  });
}

/// a + row, with the 1 x cols `row` broadcast over every row of `a`.
template <typename Scalar>
Var<Scalar> add_row(Var<Scalar> a, Var<Scalar> row) {
  auto& t = detail::same_tape("add_row", a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) detail::mismatch("add_row", a, row);
  Matrix<Scalar> out = a.value().rowwise() + row.value().row(0);
  return t.record(std::move(out), "add_row", t.requires_grad(a) || t.requires_grad(row),
                  [a, row](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    tp.accumulate(a, g);
                    tp.accumulate(row, Matrix<Scalar>(g.colwise().sum()));
                  });
}

template <typename Scalar>
Var<Scalar> scale(Var<Scalar> a, Scalar s) {
  auto& t = detail::same_tape("scale", a);
  return t.record(Matrix<Scalar>(a.value() * s), "scale", t.requires_grad(a),
                  [a, s](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    tp.accumulate(a, Matrix<Scalar>(g * s));
                  });
}

template <typename Scalar>
Var<Scalar> hadamard(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape("hadamard", a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) detail::mismatch("hadamard", a, b);
  Matrix<Scalar> out = a.value().cwiseProduct(b.value());
  return t.record(std::move(out), "hadamard", t.requires_grad(a) || t.requires_grad(b),
                  [a, b](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    if (tp.requires_grad(a)) tp.accumulate(a, Matrix<Scalar>(g.cwiseProduct(tp.value(b))));
                    if (tp.requires_grad(b)) tp.accumulate(b, Matrix<Scalar>(g.cwiseProduct(tp.value(a))));
                  });
}

/// PReLU with one learnable slope (a 1x1 variable) for the negative side.
template <typename Scalar>
Var<Scalar> prelu(Var<Scalar> x, Var<Scalar> slope) {
  auto& t = detail::same_tape("prelu", x, slope);
  if (slope.rows() != 1 || slope.cols() != 1) detail::mismatch("prelu", x, slope);
  const Scalar s = slope.item();
  Matrix<Scalar> out = x.value().unaryExpr([s](Scalar v) { return v > 0 ? v : s * v; });
  return t.record(std::move(out), "prelu", t.requires_grad(x) || t.requires_grad(slope),
                  [x, slope, s](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    const auto& xv = tp.value(x);
                    if (tp.requires_grad(x)) {
                      tp.accumulate(x, Matrix<Scalar>(g.cwiseProduct(
                                           xv.unaryExpr([s](Scalar v) { return v > 0 ? Scalar(1) : s; }))));
                    }
                    if (tp.requires_grad(slope)) {
                      const Scalar gs =
                          g.cwiseProduct(xv.unaryExpr([](Scalar v) { return v > 0 ? Scalar(0) : v; })).sum();
                      tp.accumulate(slope, Matrix<Scalar>::Constant(1, 1, gs));
                    }
                  });
}

template <typename Scalar>
Matrix<Scalar> softmax_rows_value(const Matrix<Scalar>& a) {
  Matrix<Scalar> out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Scalar mx = a.row(i).maxCoeff();
    out.row(i) = (a.row(i).array() - mx).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

template <typename Scalar>
Var<Scalar> row_softmax(Var<Scalar> a) {
  auto& t = detail::same_tape("row_softmax", a);
  if (a.cols() == 0) throw DimensionError("row_softmax: zero columns");
  return t.record(softmax_rows_value(a.value()), "row_softmax", t.requires_grad(a),
                  [a](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    // Output of this node is needed; recompute from the input.
                    const Matrix<Scalar> y = softmax_rows_value(tp.value(a));
                    const auto dots = g.cwiseProduct(y).rowwise().sum();
                    tp.accumulate(a, Matrix<Scalar>(y.cwiseProduct(g.colwise() - dots)));
                  });
}

/// Natural log of max(a, floor). Entries at or below the floor get no gradient.
template <typename Scalar>
Var<Scalar> log(Var<Scalar> a, Scalar floor = Scalar(0)) {
  auto& t = detail::same_tape("log", a);
  Matrix<Scalar> out = a.value().unaryExpr([floor](Scalar v) { return std::log(std::max(v, floor)); });
  return t.record(std::move(out), "log", t.requires_grad(a),
                  [a, floor](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    const auto& av = tp.value(a);
                    Matrix<Scalar> ga = g.binaryExpr(
                        av, [floor](Scalar gv, Scalar v) { return v > floor ? gv / v : Scalar(0); });
                    tp.accumulate(a, ga);
                  });
}

template <typename Scalar>
Var<Scalar> exp(Var<Scalar> a) {
  auto& t = detail::same_tape("exp", a);
  Matrix<Scalar> out = a.value().array().exp().matrix();
  return t.record(std::move(out), "exp", t.requires_grad(a), [a](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    tp.accumulate(a, Matrix<Scalar>(g.cwiseProduct(tp.value(a).array().exp().matrix())));
  });
}

/// log(1 + e^x), evaluated without overflow.
template <typename Scalar>
Scalar softplus_value(Scalar x) {
  return std::max(x, Scalar(0)) + std::log1p(std::exp(-std::abs(x)));
}

template <typename Scalar>
Scalar sigmoid_value(Scalar x) {
  if (x >= 0) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Var<Scalar> softplus(Var<Scalar> a) {
  auto& t = detail::same_tape("softplus", a);
  Matrix<Scalar> out = a.value().unaryExpr([](Scalar v) { return softplus_value(v); });
  return t.record(std::move(out), "softplus", t.requires_grad(a),
                  [a](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    tp.accumulate(a, Matrix<Scalar>(g.cwiseProduct(
                                         tp.value(a).unaryExpr([](Scalar v) { return sigmoid_value(v); }))));
                  });
}

template <typename Scalar>
Var<Scalar> sum(Var<Scalar> a) {
  auto& t = detail::same_tape("sum", a);
  const auto r = a.rows();
  const auto c = a.cols();
  return t.record(Matrix<Scalar>::Constant(1, 1, a.value().sum()), "sum", t.requires_grad(a),
                  [a, r, c](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    tp.accumulate(a, Matrix<Scalar>::Constant(r, c, g(0, 0)));
                  });
}

/// Mean over rows (axis 0, result 1 x cols) or over columns (axis 1, result rows x 1).
template <typename Scalar>
Var<Scalar> mean_over_axis(Var<Scalar> a, int axis) {
  auto& t = detail::same_tape("mean_over_axis", a);
  if (axis != 0 && axis != 1) throw DimensionError("mean_over_axis: axis must be 0 or 1");
  const auto r = a.rows();
  const auto c = a.cols();
  if ((axis == 0 && r == 0) || (axis == 1 && c == 0)) throw DimensionError("mean_over_axis: empty axis");
  Matrix<Scalar> out = axis == 0 ? Matrix<Scalar>(a.value().colwise().mean())
                                 : Matrix<Scalar>(a.value().rowwise().mean());
  return t.record(std::move(out), "mean_over_axis", t.requires_grad(a),
                  [a, axis, r, c](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    if (axis == 0) tp.accumulate(a, Matrix<Scalar>(g.replicate(r, 1) / Scalar(r)));
                    else tp.accumulate(a, Matrix<Scalar>(g.replicate(1, c) / Scalar(c)));
                  });
}

template <typename Scalar>
Var<Scalar> mean(Var<Scalar> a) {
  return scale(sum(a), Scalar(1) / Scalar(a.value().size()));
}

/// Divides each row by its Euclidean norm; rows with norm below `eps` are divided by `eps`.
template <typename Scalar>
Var<Scalar> l2_normalize_rows(Var<Scalar> a, Scalar eps = Scalar(1e-12)) {
  auto& t = detail::same_tape("l2_normalize_rows", a);
  const auto& av = a.value();
  Matrix<Scalar> denom = av.rowwise().norm().cwiseMax(eps);
  Matrix<Scalar> out = av.array().colwise() / denom.col(0).array();
  return t.record(std::move(out), "l2_normalize_rows", t.requires_grad(a),
                  [a, eps](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    const auto& x = tp.value(a);
                    Matrix<Scalar> gx(x.rows(), x.cols());
                    for (Eigen::Index i = 0; i < x.rows(); ++i) {
                      const Scalar norm = x.row(i).norm();
                      if (norm > eps) {
                        const auto y = x.row(i) / norm;
                        gx.row(i) = (g.row(i) - y * g.row(i).dot(y)) / norm;
                      } else {
                        gx.row(i) = g.row(i) / eps;
                      }
                    }
                    tp.accumulate(a, gx);
                  });
}

template <typename Scalar>
Var<Scalar> gather_rows(Var<Scalar> a, std::vector<int> index) {
  auto& t = detail::same_tape("gather_rows", a);
  const auto& av = a.value();
  Matrix<Scalar> out(static_cast<Eigen::Index>(index.size()), av.cols());
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] < 0 || index[r] >= av.rows()) {
      throw DimensionError("gather_rows: index " + std::to_string(index[r]) + " outside " +
                           std::to_string(av.rows()) + " rows");
    }
    out.row(static_cast<Eigen::Index>(r)) = av.row(index[r]);
  }
  return t.record(std::move(out), "gather_rows", t.requires_grad(a),
                  [a, index = std::move(index)](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    Matrix<Scalar> ga = Matrix<Scalar>::Zero(a.rows(), a.cols());
                    for (std::size_t r = 0; r < index.size(); ++r) {
                      ga.row(index[r]) += g.row(static_cast<Eigen::Index>(r));
                    }
                    tp.accumulate(a, ga);
                  });
}

template <typename Scalar>
Var<Scalar> concat_rows(std::span<const Var<Scalar>> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  auto& t = detail::same_tape("concat_rows", parts.front());
  const auto cols = parts.front().cols();
  Eigen::Index rows = 0;
  bool rg = false;
  for (const auto& p : parts) {
    if (p.tape != &t) throw std::logic_error("concat_rows: operands on different tapes");
    if (p.cols() != cols) detail::mismatch("concat_rows", parts.front(), p);
    rows += p.rows();
    rg = rg || t.requires_grad(p);
  }
  Matrix<Scalar> out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  std::vector<Var<Scalar>> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), "concat_rows", rg,
                  [inputs = std::move(inputs)](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    Eigen::Index offset = 0;
                    for (const auto& p : inputs) {
                      tp.accumulate(p, Matrix<Scalar>(g.middleRows(offset, p.rows())));
                      offset += p.rows();
                    }
                  });
}

/// Mean of the rows whose mask entry is true; result is 1 x cols.
template <typename Scalar>
Var<Scalar> masked_mean(Var<Scalar> a, std::vector<char> mask) {
  auto& t = detail::same_tape("masked_mean", a);
  if (static_cast<Eigen::Index>(mask.size()) != a.rows()) {
    throw DimensionError("masked_mean: mask length " + std::to_string(mask.size()) + " vs " +
                         std::to_string(a.rows()) + " rows");
  }
  const auto count = std::count_if(mask.begin(), mask.end(), [](char m) { return m != 0; });
  if (count == 0) throw DimensionError("masked_mean: mask selects no rows");
  const auto& av = a.value();
  Matrix<Scalar> out = Matrix<Scalar>::Zero(1, av.cols());
  for (Eigen::Index r = 0; r < av.rows(); ++r) {
    if (mask[r]) out += av.row(r);
  }
  out /= Scalar(count);
  return t.record(std::move(out), "masked_mean", t.requires_grad(a),
                  [a, mask = std::move(mask), count](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    Matrix<Scalar> ga = Matrix<Scalar>::Zero(a.rows(), a.cols());
                    for (Eigen::Index r = 0; r < ga.rows(); ++r) {
                      if (mask[r]) ga.row(r) = g.row(0) / Scalar(count);
                    }
                    tp.accumulate(a, ga);
                  });
}

/// out(i) = a(i, cols[i]); result is rows x 1.
template <typename Scalar>
Var<Scalar> select_per_row(Var<Scalar> a, std::vector<int> cols) {
  auto& t = detail::same_tape("select_per_row", a);
  if (static_cast<Eigen::Index>(cols.size()) != a.rows()) {
    throw DimensionError("select_per_row: need one column index per row");
  }
  Matrix<Scalar> out(a.rows(), 1);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    if (cols[r] < 0 || cols[r] >= a.cols()) {
      throw DimensionError("select_per_row: column " + std::to_string(cols[r]) + " out of range");
    }
    out(r, 0) = a.value()(r, cols[r]);
  }
  return t.record(std::move(out), "select_per_row", t.requires_grad(a),
                  [a, cols = std::move(cols)](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    Matrix<Scalar> ga = Matrix<Scalar>::Zero(a.rows(), a.cols());
                    for (Eigen::Index r = 0; r < ga.rows(); ++r) ga(r, cols[r]) = g(r, 0);
                    tp.accumulate(a, ga);
                  });
}

/// Row t of the result is row t-1 of the input; row 0 is zero.
template <typename Scalar>
Var<Scalar> shift_rows_down(Var<Scalar> a) {
  auto& t = detail::same_tape("shift_rows_down", a);
  const auto& av = a.value();
  Matrix<Scalar> out = Matrix<Scalar>::Zero(av.rows(), av.cols());
  if (av.rows() > 1) out.bottomRows(av.rows() - 1) = av.topRows(av.rows() - 1);
  return t.record(std::move(out), "shift_rows_down", t.requires_grad(a),
                  [a](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    Matrix<Scalar> ga = Matrix<Scalar>::Zero(g.rows(), g.cols());
                    if (g.rows() > 1) ga.topRows(g.rows() - 1) = g.bottomRows(g.rows() - 1);
                    tp.accumulate(a, ga);
                  });
}

}  // namespace drcl::ad
