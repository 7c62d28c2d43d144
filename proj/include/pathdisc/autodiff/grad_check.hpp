// pathdisc/autodiff/grad_check.hpp

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

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "pathdisc/autodiff/tape.hpp"

namespace pathdisc::ad {

/// A scalar-valued function of a list of leaf tensors, expressed on a tape.
template <typename Scalar>
using ScalarFunction =
    std::function<Var<Scalar>(Tape<Scalar>&, const std::vector<Var<Scalar>>&)>;

/// Compares reverse-mode gradients of `f` at `point` with central finite
/// differences. Returns max over coordinates of
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
template <typename Scalar>
Scalar grad_check(const ScalarFunction<Scalar>& f, const std::vector<RowMatrix<Scalar>>& point,
                  Scalar step = Scalar(1e-5)) {
  auto evaluate = [&](const std::vector<RowMatrix<Scalar>>& args, bool with_grad,
                      std::vector<RowMatrix<Scalar>>* grads) {
    Tape<Scalar> tape;
    std::vector<Var<Scalar>> leaves;
    leaves.reserve(args.size());
    for (const auto& a : args) leaves.push_back(tape.leaf(a, with_grad));
    const Var<Scalar> out = f(tape, leaves);
    const Scalar v = out.item();
    if (!std::isfinite(v)) throw NumericalError("grad_check: non-finite function value");
    if (with_grad) {
      tape.backward(out);
      for (const auto& l : leaves) grads->push_back(l.grad());
    }
    return v;
  };

  std::vector<RowMatrix<Scalar>> analytic;
  evaluate(point, true, &analytic);

  Scalar worst = 0;
  std::vector<RowMatrix<Scalar>> probe = point;
  for (std::size_t a = 0; a < probe.size(); ++a) {
    for (Eigen::Index k = 0; k < probe[a].size(); ++k) {
      Scalar& coord = probe[a].data()[k];
      const Scalar saved = coord;
      coord = saved + step;
      const Scalar up = evaluate(probe, false, nullptr);
      coord = saved - step;
      const Scalar down = evaluate(probe, false, nullptr);
      coord = saved;
      const Scalar numeric = (up - down) / (Scalar(2) * step);
      const Scalar exact = analytic[a].data()[k];
      const Scalar denom =
          std::max(Scalar(1e-8), std::abs(exact) + std::abs(numeric));
      worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace pathdisc::ad
