// pathdisc/alignment.hpp

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

// Alignment pooling on plain Eigen expressions. These are the
// non-differentiable counterparts of the tape graph built by the
// discriminator, usable on any dense expression (A + delta, A.transpose(),
// blocks, ...).

#pragma once

#include <cmath>

#include "pathdisc/core.hpp"

namespace pathdisc {

template <typename Derived>
RowMatrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  RowMatrix<S> y = a;
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const S shift = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - shift).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

/// exp(-z_j) / sum_k exp(-z_k), shifted by min(z).
template <typename Derived>
ColVector<typename Derived::Scalar> softmin(const Eigen::MatrixBase<Derived>& z) {
  using S = typename Derived::Scalar;
  ColVector<S> v = z.reshaped();
  const S shift = v.minCoeff();
  v = (-(v.array() - shift)).exp().matrix();
  return v / v.sum();
}

template <typename Scalar>
struct AlignmentPooling {
  ColVector<Scalar> row_scores;  // c, one entry per instruction token
  Scalar raw_score = 0;
};

/// c_l = softmax(A_l) . A_l per row; score = softmin(c) . c.
template <typename Derived>
AlignmentPooling<typename Derived::Scalar> alignment_score(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  const RowMatrix<S> m = a;
  const RowMatrix<S> w = softmax_rows(m);
  AlignmentPooling<S> out;
  out.row_scores = w.cwiseProduct(m).rowwise().sum();
  out.raw_score = softmin(out.row_scores).dot(out.row_scores);
  return out;
}

template <typename Scalar>
Scalar logistic(Scalar v) {
  if (v >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-v));
  const Scalar e = std::exp(v);
  return e / (Scalar(1) + e);
}

}  // namespace pathdisc
