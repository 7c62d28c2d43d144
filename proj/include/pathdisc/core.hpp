// pathdisc/core.hpp

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

#include <Eigen/Dense>

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pathdisc {

/// Row-major dense matrix. Every numeric carrier in the library uses this
/// layout so flat exports and checkpoints match the in-memory order.
template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using ColVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Mat = RowMatrix<double>;
using Vec = ColVector<double>;

/// Named parameter arrays. std::map keeps iteration order stable, which the
/// checkpoint writer and the gradient reduction both rely on.
using ParamStore = std::map<std::string, Mat>;

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input, schema mismatch, bad configuration. The CLI maps these
/// to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A bounded search (path sampling, negative mining) ran out of attempts.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf met where finite values are required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

template <typename Derived>
std::string shape_str(const Eigen::EigenBase<Derived>& m) {
  std::ostringstream os;
  os << '[' << m.rows() << 'x' << m.cols() << ']';
  return os.str();
}

inline std::string shape_str(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << '[' << rows << 'x' << cols << ']';
  return os.str();
}

}  // namespace pathdisc
