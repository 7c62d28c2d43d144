// pathdisc/autodiff/tape.hpp

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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

#include "pathdisc/core.hpp"

namespace pathdisc::ad {

enum class OpKind : std::uint8_t {
  kLeaf,
  kMatMul,
  kTranspose,
  kAdd,
  kSub,
  kMul,
  kScale,
  kSigmoid,
  kTanh,
  kSoftplus,
  kSoftmaxRows,
  kSoftmin,
  kRowSums,
  kSum,
  kDot,
  kConcatCols,
  kSliceCols,
  kGatherRows,
  kAffine,
  kLstm,
  kCrossEntropy,
};

template <typename Scalar>
class Tape;

/// Handle to a value recorded on a tape. Cheap to copy; valid as long as the
/// owning tape is alive.
template <typename Scalar>
class Var {
 public:
  using Matrix = RowMatrix<Scalar>;

  Var() = default;
  Var(Tape<Scalar>* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Matrix& value() const { return tape_->value(id_); }
  /// Gradient after Tape::backward; zeros when nothing flowed here.
  Matrix grad() const { return tape_->grad(id_); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Scalar item() const;
  bool requires_grad() const { return tape_->requires_grad(id_); }

  Tape<Scalar>* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape<Scalar>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Append-only reverse-mode tape. Node ids are assigned in creation order,
/// which is a topological order of the DAG, so backward walks ids downward
/// and touches every node once.
template <typename Scalar>
class Tape {
 public:
  using Matrix = RowMatrix<Scalar>;
  /// Receives the node's accumulated output gradient and its own id (to read
  /// the forward value) and pushes contributions to parents through
  /// accumulate().
  using BackwardFn = std::function<void(Tape&, const Matrix&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Scalar> leaf(Matrix value, bool requires_grad = false) {
    nodes_.push_back(Node{OpKind::kLeaf, std::move(value), Matrix(),
                          requires_grad, nullptr});
    return Var<Scalar>(this, nodes_.size() - 1);
  }

  Var<Scalar> record(OpKind op, Matrix value,
                     std::initializer_list<Var<Scalar>> parents,
                     BackwardFn fn) {
    bool needs = false;
    for (const auto& p : parents) {
      check_owner(p);
      needs = needs || nodes_[p.id()].requires_grad;
    }
    nodes_.push_back(Node{op, std::move(value), Matrix(), needs,
                          needs ? std::move(fn) : BackwardFn()});
    return Var<Scalar>(this, nodes_.size() - 1);
  }

  const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }

  Matrix grad(std::size_t id) const {
    const Node& n = nodes_.at(id);
    if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  OpKind op(std::size_t id) const { return nodes_.at(id).op; }
  std::size_t size() const { return nodes_.size(); }

  template <typename Derived>
  void accumulate(std::size_t id, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  /// Populates gradients for every node reachable from `loss`, which must be
  /// a 1x1 value recorded on this tape. Previous gradients are discarded.
  void backward(const Var<Scalar>& loss) {
    check_owner(loss);
    const Matrix& v = nodes_[loss.id()].value;
    if (v.rows() != 1 || v.cols() != 1) {
      throw DimensionError("backward: loss must be scalar, got " + shape_str(v));
    }
    for (auto& n : nodes_) n.grad.resize(0, 0);
    if (!nodes_[loss.id()].requires_grad) return;
    nodes_[loss.id()].grad = Matrix::Ones(1, 1);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.size() == 0) continue;
      n.backward(*this, n.grad, i);
    }
  }

  void check_owner(const Var<Scalar>& v) const {
    if (v.tape() != this || v.id() >= nodes_.size()) {
      throw ValidationError("autodiff: variable does not belong to this tape");
    }
  }

 private:
  struct Node {
    OpKind op;
    Matrix value;
    Matrix grad;
    bool requires_grad;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
};

template <typename Scalar>
Scalar Var<Scalar>::item() const {
  const Matrix& v = value();
  if (v.size() != 1) throw DimensionError("item: expected scalar, got " + shape_str(v));
  return v(0, 0);
}

}  // namespace pathdisc::ad
