// pathdisc/autodiff/ops.hpp

// Copyright 2026  The pathdisc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Differentiable operations over Var. Broadcasting is limited to
// scalar-with-tensor and equal shapes; anything else is a DimensionError.

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pathdisc/autodiff/tape.hpp"

namespace pathdisc::ad {

namespace detail {

template <typename Scalar>
void same_tape(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (a.tape() != b.tape()) {
    throw ValidationError("autodiff: operands live on different tapes");
  }
}

enum class Broadcast { kEqual, kLeftScalar, kRightScalar };

template <typename Scalar>
Broadcast broadcast(const char* op, const Var<Scalar>& a, const Var<Scalar>& b) {
  same_tape(a, b);
  const auto& x = a.value();
  const auto& y = b.value();
  if (x.rows() == y.rows() && x.cols() == y.cols()) return Broadcast::kEqual;
  if (x.size() == 1) return Broadcast::kLeftScalar;
  if (y.size() == 1) return Broadcast::kRightScalar;
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(x) +
                       " and " + shape_str(y));
}

template <typename Scalar>
Scalar sigmoid(Scalar v) {
  if (v >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-v));
  const Scalar e = std::exp(v);
  return e / (Scalar(1) + e);
}

/// log(1 + exp(v)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar v) {
  return std::max(v, Scalar(0)) + std::log1p(std::exp(-std::abs(v)));
}

/// Row-wise max-shifted softmax.
template <typename Derived>
RowMatrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  RowMatrix<S> y(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const S shift = a.row(r).maxCoeff();
    y.row(r) = (a.row(r).array() - shift).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: shape mismatch " + shape_str(a.value()) + " x " +
                         shape_str(b.value()));
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(
      OpKind::kMatMul, a.value() * b.value(), {a, b},
      [ia, ib](Tape<Scalar>& t, const RowMatrix<Scalar>& g, std::size_t) {
        t.accumulate(ia, g * t.value(ib).transpose());
        t.accumulate(ib, t.value(ia).transpose() * g);
      });
}

template <typename Scalar>
Var<Scalar> transpose(const Var<Scalar>& a) {
  const std::size_t ia = a.id();
  return a.tape()->record(
      OpKind::kTranspose, a.value().transpose(), {a},
      [ia](Tape<Scalar>& t, const RowMatrix<Scalar>& g, std::size_t) {
        t.accumulate(ia, g.transpose());
      });
}

template <typename Scalar>
Var<Scalar> add(const Var<Scalar>& a, const Var<Scalar>& b) {
  using M = RowMatrix<Scalar>;
  using detail::Broadcast;
  const Broadcast mode = detail::broadcast("add", a, b);
  const std::size_t ia = a.id(), ib = b.id();
  M out;
  switch (mode) {
    case Broadcast::kEqual: out = a.value() + b.value(); break;
    case Broadcast::kLeftScalar: out = (b.value().array() + a.value()(0, 0)).matrix(); break;
    case Broadcast::kRightScalar: out = (a.value().array() + b.value()(0, 0)).matrix(); break;
  }
  return a.tape()->record(OpKind::kAdd, std::move(out), {a, b},
                          [ia, ib, mode](Tape<Scalar>& t, const M& g, std::size_t) {
                            if (mode == Broadcast::kLeftScalar) {
                              t.accumulate(ia, M::Constant(1, 1, g.sum()));
                            } else {
                              t.accumulate(ia, g);
                            }
                            if (mode == Broadcast::kRightScalar) {
                              t.accumulate(ib, M::Constant(1, 1, g.sum()));
                            } else {
                              t.accumulate(ib, g);
                            }
                          });
}

template <typename Scalar>
Var<Scalar> sub(const Var<Scalar>& a, const Var<Scalar>& b) {
  using M = RowMatrix<Scalar>;
  using detail::Broadcast;
  const Broadcast mode = detail::broadcast("sub", a, b);
  const std::size_t ia = a.id(), ib = b.id();
  M out;
  switch (mode) {
    case Broadcast::kEqual: out = a.value() - b.value(); break;
    case Broadcast::kLeftScalar: out = (a.value()(0, 0) - b.value().array()).matrix(); break;
    case Broadcast::kRightScalar: out = (a.value().array() - b.value()(0, 0)).matrix(); break;
  }
  return a.tape()->record(OpKind::kSub, std::move(out), {a, b},
                          [ia, ib, mode](Tape<Scalar>& t, const M& g, std::size_t) {
                            if (mode == Broadcast::kLeftScalar) {
                              t.accumulate(ia, M::Constant(1, 1, g.sum()));
                            } else {
                              t.accumulate(ia, g);
                            }
                            if (mode == Broadcast::kRightScalar) {
                              t.accumulate(ib, M::Constant(1, 1, -g.sum()));
                            } else {
                              t.accumulate(ib, -g);
                            }
                          });
}

/// Elementwise (Hadamard) product.
template <typename Scalar>
Var<Scalar> mul(const Var<Scalar>& a, const Var<Scalar>& b) {
  using M = RowMatrix<Scalar>;
  using detail::Broadcast;
  const Broadcast mode = detail::broadcast("mul", a, b);
  const std::size_t ia = a.id(), ib = b.id();
  M out;
  switch (mode) {
    case Broadcast::kEqual: out = a.value().cwiseProduct(b.value()); break;
    case Broadcast::kLeftScalar: out = a.value()(0, 0) * b.value(); break;
    case Broadcast::kRightScalar: out = b.value()(0, 0) * a.value(); break;
  }
  return a.tape()->record(
      OpKind::kMul, std::move(out), {a, b},
      [ia, ib, mode](Tape<Scalar>& t, const M& g, std::size_t) {
        const M& x = t.value(ia);
        const M& y = t.value(ib);
        switch (mode) {
          case Broadcast::kEqual:
            t.accumulate(ia, g.cwiseProduct(y));
            t.accumulate(ib, g.cwiseProduct(x));
            break;
          case Broadcast::kLeftScalar:
            t.accumulate(ia, M::Constant(1, 1, g.cwiseProduct(y).sum()));
            t.accumulate(ib, x(0, 0) * g);
            break;
          case Broadcast::kRightScalar:
            t.accumulate(ia, y(0, 0) * g);
            t.accumulate(ib, M::Constant(1, 1, g.cwiseProduct(x).sum()));
            break;
        }
      });
}

/// Multiplication by a constant that is not differentiated.
template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar k) {
  const std::size_t ia = a.id();
  return a.tape()->record(OpKind::kScale, k * a.value(), {a},
                          [ia, k](Tape<Scalar>& t, const RowMatrix<Scalar>& g, std::size_t) {
                            t.accumulate(ia, k * g);
                          });
}

template <typename Scalar>
Var<Scalar> neg(const Var<Scalar>& a) {
  return scale(a, Scalar(-1));
}

template <typename Scalar>
Var<Scalar> sigmoid(const Var<Scalar>& a) {
  using M = RowMatrix<Scalar>;
  const std::size_t ia = a.id();
  M y = a.value().unaryExpr([](Scalar v) { return detail::sigmoid(v); });
  return a.tape()->record(OpKind::kSigmoid, std::move(y), {a},
                          [ia](Tape<Scalar>& t, const M& g, std::size_t self) {
                            const auto s = t.value(self).array();
                            t.accumulate(ia, (g.array() * s * (Scalar(1) - s)).matrix());
                          });
}

template <typename Scalar>
Var<Scalar> tanh(const Var<Scalar>& a) {
  using M = RowMatrix<Scalar>;
  const std::size_t ia = a.id();
  M y = a.value().array().tanh().matrix();
  return a.tape()->record(OpKind::kTanh, std::move(y), {a},
                          [ia](Tape<Scalar>& t, const M& g, std::size_t self) {
                            const auto y = t.value(self).array();
                            t.accumulate(ia, (g.array() * (Scalar(1) - y.square())).matrix());
                          });
}

/// log(1 + exp(a)), overflow-safe. Building block of the logistic loss.
template <typename Scalar>
Var<Scalar> softplus(const Var<Scalar>& a) {
  using M = RowMatrix<Scalar>;
  const std::size_t ia = a.id();
  M y = a.value().unaryExpr([](Scalar v) { return detail::softplus(v); });
  return a.tape()->record(OpKind::kSoftplus, std::move(y), {a},
                          [ia](Tape<Scalar>& t, const M& g, std::size_t) {
                            const M s = t.value(ia).unaryExpr(
                                [](Scalar v) { return detail::sigmoid(v); });
                            t.accumulate(ia, g.cwiseProduct(s));
                          });
}

/// Each row mapped to a probability vector, max-shift stabilized.
template <typename Scalar>
Var<Scalar> softmax_rows(const Var<Scalar>& a) {
  using M = RowMatrix<Scalar>;
  const std::size_t ia = a.id();
  return a.tape()->record(
      OpKind::kSoftmaxRows, detail::softmax_rows(a.value()), {a},
      [ia](Tape<Scalar>& t, const M& g, std::size_t self) {
        const M& y = t.value(self);
        const ColVector<Scalar> inner = g.cwiseProduct(y).rowwise().sum();
        t.accumulate(ia, (y.array() * (g.colwise() - inner).array()).matrix());
      });
}

/// exp(-z_j) / sum_k exp(-z_k) over all entries of a row or column vector.
template <typename Scalar>
Var<Scalar> softmin_vec(const Var<Scalar>& z) {
  using M = RowMatrix<Scalar>;
  if (z.rows() != 1 && z.cols() != 1) {
    throw DimensionError("softmin_vec: expected a vector, got " + shape_str(z.value()));
  }
  const std::size_t iz = z.id();
  const Scalar shift = z.value().minCoeff();
  M y = (-(z.value().array() - shift)).exp().matrix();
  y /= y.sum();
  return z.tape()->record(OpKind::kSoftmin, std::move(y), {z},
                          [iz](Tape<Scalar>& t, const M& g, std::size_t self) {
                            const M& y = t.value(self);
                            const Scalar inner = g.cwiseProduct(y).sum();
                            t.accumulate(iz, (-(y.array() * (g.array() - inner))).matrix());
                          });
}

/// [p, q] -> [p, 1], summing along each row.
template <typename Scalar>
Var<Scalar> row_sums(const Var<Scalar>& a) {
  using M = RowMatrix<Scalar>;
  const std::size_t ia = a.id();
  const Eigen::Index q = a.cols();
  return a.tape()->record(OpKind::kRowSums, a.value().rowwise().sum(), {a},
                          [ia, q](Tape<Scalar>& t, const M& g, std::size_t) {
                            t.accumulate(ia, g.replicate(1, q));
                          });
}

template <typename Scalar>
Var<Scalar> sum(const Var<Scalar>& a) {
  using M = RowMatrix<Scalar>;
  const std::size_t ia = a.id();
  const Eigen::Index r = a.rows(), c = a.cols();
  return a.tape()->record(OpKind::kSum, M::Constant(1, 1, a.value().sum()), {a},
                          [ia, r, c](Tape<Scalar>& t, const M& g, std::size_t) {
                            t.accumulate(ia, M::Constant(r, c, g(0, 0)));
                          });
}

template <typename Scalar>
Var<Scalar> mean(const Var<Scalar>& a) {
  return scale(sum(a), Scalar(1) / static_cast<Scalar>(a.value().size()));
}

/// Sum of elementwise products of two equal-shape tensors, as [1, 1].
template <typename Scalar>
Var<Scalar> dot(const Var<Scalar>& a, const Var<Scalar>& b) {
  using M = RowMatrix<Scalar>;
  detail::same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("dot: shape mismatch " + shape_str(a.value()) + " and " +
                         shape_str(b.value()));
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(OpKind::kDot,
                          M::Constant(1, 1, a.value().cwiseProduct(b.value()).sum()), {a, b},
                          [ia, ib](Tape<Scalar>& t, const M& g, std::size_t) {
                            t.accumulate(ia, g(0, 0) * t.value(ib));
                            t.accumulate(ib, g(0, 0) * t.value(ia));
                          });
}

template <typename Scalar>
Var<Scalar> concat_cols(const Var<Scalar>& a, const Var<Scalar>& b) {
  using M = RowMatrix<Scalar>;
  detail::same_tape(a, b);
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row mismatch " + shape_str(a.value()) + " and " +
                         shape_str(b.value()));
  }
  M out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const std::size_t ia = a.id(), ib = b.id();
  const Eigen::Index ca = a.cols(), cb = b.cols();
  return a.tape()->record(OpKind::kConcatCols, std::move(out), {a, b},
                          [ia, ib, ca, cb](Tape<Scalar>& t, const M& g, std::size_t) {
                            t.accumulate(ia, g.leftCols(ca));
                            t.accumulate(ib, g.rightCols(cb));
                          });
}

template <typename Scalar>
Var<Scalar> slice_cols(const Var<Scalar>& a, Eigen::Index start, Eigen::Index count) {
  using M = RowMatrix<Scalar>;
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw DimensionError("slice_cols: columns [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") out of range for " +
                         shape_str(a.value()));
  }
  const std::size_t ia = a.id();
  const Eigen::Index r = a.rows(), c = a.cols();
  return a.tape()->record(OpKind::kSliceCols, a.value().middleCols(start, count), {a},
                          [ia, r, c, start, count](Tape<Scalar>& t, const M& g, std::size_t) {
                            M full = M::Zero(r, c);
                            full.middleCols(start, count) = g;
                            t.accumulate(ia, full);
                          });
}

/// Embedding lookup: row ids[i] of `table` becomes row i of the result.
template <typename Scalar>
Var<Scalar> gather_rows(const Var<Scalar>& table, std::span<const int> ids) {
  using M = RowMatrix<Scalar>;
  M out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw ValidationError("gather_rows: id " + std::to_string(ids[i]) +
                            " outside table with " + std::to_string(table.rows()) + " rows");
    }
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(ids[i]);
  }
  const std::size_t it = table.id();
  const Eigen::Index r = table.rows(), c = table.cols();
  std::vector<int> idx(ids.begin(), ids.end());
  return table.tape()->record(
      OpKind::kGatherRows, std::move(out), {table},
      [it, r, c, idx = std::move(idx)](Tape<Scalar>& t, const M& g, std::size_t) {
        M full = M::Zero(r, c);
        for (std::size_t i = 0; i < idx.size(); ++i) {
          full.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
        }
        t.accumulate(it, full);
      });
}

/// x [p, q] * w [q, r] + b [1, r], the bias added to every row.
template <typename Scalar>
Var<Scalar> affine(const Var<Scalar>& x, const Var<Scalar>& w, const Var<Scalar>& b) {
  using M = RowMatrix<Scalar>;
  detail::same_tape(x, w);
  detail::same_tape(x, b);
  if (x.cols() != w.rows() || b.rows() != 1 || b.cols() != w.cols()) {
    throw DimensionError("affine: shape mismatch x" + shape_str(x.value()) + " w" +
                         shape_str(w.value()) + " b" + shape_str(b.value()));
  }
  M out = x.value() * w.value();
  out.rowwise() += b.value().row(0);
  const std::size_t ix = x.id(), iw = w.id(), ib = b.id();
  return x.tape()->record(OpKind::kAffine, std::move(out), {x, w, b},
                          [ix, iw, ib](Tape<Scalar>& t, const M& g, std::size_t) {
                            t.accumulate(ix, g * t.value(iw).transpose());
                            t.accumulate(iw, t.value(ix).transpose() * g);
                            t.accumulate(ib, g.colwise().sum());
                          });
}

/// -log softmax(logits)[target] for a vector of logits, as [1, 1].
template <typename Scalar>
Var<Scalar> softmax_cross_entropy(const Var<Scalar>& logits, Eigen::Index target) {
  using M = RowMatrix<Scalar>;
  if (logits.rows() != 1 && logits.cols() != 1) {
    throw DimensionError("softmax_cross_entropy: expected a vector, got " +
                         shape_str(logits.value()));
  }
  if (target < 0 || target >= logits.value().size()) {
    throw ValidationError("softmax_cross_entropy: target " + std::to_string(target) +
                          " out of range");
  }
  const M& z = logits.value();
  const Scalar shift = z.maxCoeff();
  const Scalar lse = shift + std::log((z.array() - shift).exp().sum());
  const Scalar loss = lse - z.data()[target];
  const std::size_t il = logits.id();
  return logits.tape()->record(
      OpKind::kCrossEntropy, M::Constant(1, 1, loss), {logits},
      [il, lse, target](Tape<Scalar>& t, const M& g, std::size_t) {
        const M& z = t.value(il);
        M p = (z.array() - lse).exp().matrix();
        p.data()[target] -= Scalar(1);
        t.accumulate(il, g(0, 0) * p);
      });
}

template <typename Scalar>
Var<Scalar> operator+(const Var<Scalar>& a, const Var<Scalar>& b) { return add(a, b); }
template <typename Scalar>
Var<Scalar> operator-(const Var<Scalar>& a, const Var<Scalar>& b) { return sub(a, b); }
template <typename Scalar>
Var<Scalar> operator*(const Var<Scalar>& a, const Var<Scalar>& b) { return mul(a, b); }
template <typename Scalar>
Var<Scalar> operator-(const Var<Scalar>& a) { return neg(a); }

}  // namespace pathdisc::ad
