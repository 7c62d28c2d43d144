// src/optim.hpp

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

// Momentum SGD with global-norm clipping, shared by the two trainers.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pathdisc/core.hpp"

namespace pathdisc::detail {

/// v = momentum * v + g; theta -= lr * v, after scaling `grads` (in
/// ParamStore order) down to `clip_norm`. Throws NumericalError naming
/// `where` when the gradient is not finite.
inline void momentum_step(ParamStore& params, ParamStore& velocity, std::vector<Mat>& grads, double lr,
                          double momentum, double clip_norm, const std::string& where) {
  double norm2 = 0.0;
  for (const auto& m : grads) norm2 += m.squaredNorm();
  const double norm = std::sqrt(norm2);
  if (!std::isfinite(norm)) throw NumericalError("non-finite gradient at " + where);
  if (norm > clip_norm) {
    const double f = clip_norm / norm;
    for (auto& m : grads) m *= f;
  }
  std::size_t k = 0;
  for (auto& [name, theta] : params) {
    Mat& v = velocity.at(name);
    v = momentum * v + grads[k++];
    theta -= lr * v;
  }
}

/// Sums per-example gradients in index order and divides by their count.
inline std::vector<Mat> mean_of(const std::vector<std::vector<Mat>>& per_example) {
  std::vector<Mat> g = per_example.front();
  for (std::size_t i = 1; i < per_example.size(); ++i) {
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += per_example[i][k];
  }
  const double inv = 1.0 / static_cast<double>(per_example.size());
  for (auto& m : g) m *= inv;
  return g;
}

}  // namespace pathdisc::detail
