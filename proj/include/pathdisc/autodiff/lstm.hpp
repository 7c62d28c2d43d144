// pathdisc/autodiff/lstm.hpp

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

#include <memory>

#include "pathdisc/autodiff/ops.hpp"

namespace pathdisc::ad {

enum class Direction { kForward, kBackward };

/// Runs an LSTM over the rows of `x` [T, in] from a zero state and returns
/// the hidden states [T, H], row t aligned with input row t in either
/// direction. Gate blocks in wx [in, 4H], wh [H, 4H], b [1, 4H] are ordered
/// input, forget, cell, output.
///
/// The whole sequence is one tape node; backward is hand-written
/// backpropagation through time.
template <typename Scalar>
Var<Scalar> lstm_sequence(const Var<Scalar>& x, const Var<Scalar>& wx, const Var<Scalar>& wh,
                          const Var<Scalar>& b, Direction dir) {
  using M = RowMatrix<Scalar>;
  detail::same_tape(x, wx);
  detail::same_tape(x, wh);
  detail::same_tape(x, b);
  const Eigen::Index hid = wh.rows();
  if (wh.cols() != 4 * hid || wx.cols() != 4 * hid || wx.rows() != x.cols() ||
      b.rows() != 1 || b.cols() != 4 * hid) {
    throw DimensionError("lstm_sequence: inconsistent shapes x" + shape_str(x.value()) +
                         " wx" + shape_str(wx.value()) + " wh" + shape_str(wh.value()) +
                         " b" + shape_str(b.value()));
  }
  const Eigen::Index steps = x.rows();

  // Saved activations, indexed by input row. `gates` holds post-nonlinearity
  // i, f, g, o blocks.
  struct Saved {
    M gates;
    M cell;
    M cell_tanh;
  };
  auto saved = std::make_shared<Saved>();
  saved->gates.resize(steps, 4 * hid);
  saved->cell.resize(steps, hid);
  saved->cell_tanh.resize(steps, hid);
  M h(steps, hid);

  M pre = x.value() * wx.value();
  pre.rowwise() += b.value().row(0);
  const M& w_rec = wh.value();
  M h_prev = M::Zero(1, hid);
  M c_prev = M::Zero(1, hid);
  for (Eigen::Index k = 0; k < steps; ++k) {
    const Eigen::Index t = dir == Direction::kForward ? k : steps - 1 - k;
    M z = pre.row(t) + h_prev * w_rec;
    auto gates = saved->gates.row(t);
    for (Eigen::Index j = 0; j < hid; ++j) {
      gates(j) = detail::sigmoid(z(0, j));
      gates(hid + j) = detail::sigmoid(z(0, hid + j));
      gates(2 * hid + j) = std::tanh(z(0, 2 * hid + j));
      gates(3 * hid + j) = detail::sigmoid(z(0, 3 * hid + j));
    }
    const auto i_g = gates.segment(0, hid).array();
    const auto f_g = gates.segment(hid, hid).array();
    const auto g_g = gates.segment(2 * hid, hid).array();
    const auto o_g = gates.segment(3 * hid, hid).array();
    saved->cell.row(t) = (f_g * c_prev.row(0).array() + i_g * g_g).matrix();
    saved->cell_tanh.row(t) = saved->cell.row(t).array().tanh().matrix();
    h.row(t) = (o_g * saved->cell_tanh.row(t).array()).matrix();
    h_prev = h.row(t);
    c_prev = saved->cell.row(t);
  }

  const std::size_t ix = x.id(), iwx = wx.id(), iwh = wh.id(), ib = b.id();
  return x.tape()->record(
      OpKind::kLstm, std::move(h), {x, wx, wh, b},
      [=](Tape<Scalar>& t, const M& dh_out, std::size_t self) {
        const M& hs = t.value(self);
        const M& w_rec = t.value(iwh);
        M dz(steps, 4 * hid);
        M dh_next = M::Zero(1, hid);
        M dc_next = M::Zero(1, hid);
        M dwh = M::Zero(hid, 4 * hid);
        for (Eigen::Index k = steps; k-- > 0;) {
          const Eigen::Index s = dir == Direction::kForward ? k : steps - 1 - k;
          const bool first = k == 0;
          const Eigen::Index prev = dir == Direction::kForward ? s - 1 : s + 1;
          const auto gates = saved->gates.row(s).array();
          const auto i_g = gates.segment(0, hid);
          const auto f_g = gates.segment(hid, hid);
          const auto g_g = gates.segment(2 * hid, hid);
          const auto o_g = gates.segment(3 * hid, hid);
          const auto tc = saved->cell_tanh.row(s).array();

          const M dh = dh_out.row(s) + dh_next;
          const auto dha = dh.row(0).array();
          auto row = dz.row(s);
          row.segment(3 * hid, hid) = (dha * tc * o_g * (Scalar(1) - o_g)).matrix();
          const M dc =
              (dha * o_g * (Scalar(1) - tc.square())).matrix() + dc_next;
          const auto dca = dc.row(0).array();
          row.segment(0, hid) = (dca * g_g * i_g * (Scalar(1) - i_g)).matrix();
          row.segment(2 * hid, hid) = (dca * i_g * (Scalar(1) - g_g.square())).matrix();
          if (first) {
            row.segment(hid, hid).setZero();
          } else {
            const auto c_prev = saved->cell.row(prev).array();
            row.segment(hid, hid) = (dca * c_prev * f_g * (Scalar(1) - f_g)).matrix();
            dwh.noalias() += hs.row(prev).transpose() * row;
          }
          dh_next = row * w_rec.transpose();
          dc_next = (dca * f_g).matrix();
        }
        const M& xs = t.value(ix);
        t.accumulate(ix, dz * t.value(iwx).transpose());
        t.accumulate(iwx, xs.transpose() * dz);
        t.accumulate(iwh, dwh);
        t.accumulate(ib, dz.colwise().sum());
      });
}

/// One LSTM step built from primitive ops, for recurrences whose state is
/// carried outside the tape node (the navigation policy cell).
template <typename Scalar>
struct LstmState {
  Var<Scalar> h;
  Var<Scalar> c;
};

template <typename Scalar>
LstmState<Scalar> lstm_cell(const Var<Scalar>& x, const LstmState<Scalar>& state,
                            const Var<Scalar>& wx, const Var<Scalar>& wh,
                            const Var<Scalar>& b) {
  const Eigen::Index hid = wh.rows();
  const Var<Scalar> z = add(affine(x, wx, b), matmul(state.h, wh));
  const Var<Scalar> i = sigmoid(slice_cols(z, 0, hid));
  const Var<Scalar> f = sigmoid(slice_cols(z, hid, hid));
  const Var<Scalar> g = tanh(slice_cols(z, 2 * hid, hid));
  const Var<Scalar> o = sigmoid(slice_cols(z, 3 * hid, hid));
  const Var<Scalar> c = add(mul(f, state.c), mul(i, g));
  return {mul(o, tanh(c)), c};
}

}  // namespace pathdisc::ad
