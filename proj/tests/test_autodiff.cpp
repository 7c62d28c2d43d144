// tests/test_autodiff.cpp

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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "pathdisc/autodiff.hpp"
#include "pathdisc/rng.hpp"
#include "test_util.hpp"

using namespace pathdisc;
using pathdisc::test::random_matrix;

namespace {

Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  Mat m(static_cast<Eigen::Index>(rows.size()),
        static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

}  // namespace

TEST_CASE("matmul hand cases") {
  Tape t;
  const Var a = t.leaf(mat({{1, 2}, {3, 4}}));
  CHECK(ad::matmul(a, t.leaf(Mat::Identity(2, 2))).value() == mat({{1, 2}, {3, 4}}));
  CHECK(ad::matmul(a, t.leaf(mat({{1}, {1}}))).value() == mat({{3}, {7}}));
  const Var z = t.leaf(Mat::Zero(2, 2));
  CHECK(ad::matmul(z, t.leaf(random_matrix(2, 3, 1))).value().isZero(0.0));
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tape t;
  const Var a = t.leaf(Mat::Zero(2, 3));
  const Var b = t.leaf(Mat::Zero(4, 5));
  try {
    ad::matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4x5]") != std::string::npos);
  }
}

TEST_CASE("softmax_rows closed forms") {
  Tape t;
  const Mat y = ad::softmax_rows(t.leaf(mat({{0, 0, 0}}))).value();
  for (int j = 0; j < 3; ++j) CHECK(y(0, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const Mat p = ad::softmax_rows(t.leaf(mat({{0, std::log(3.0)}}))).value();
  CHECK(p(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p(0, 1) == doctest::Approx(0.75).epsilon(1e-14));

  const Mat big = ad::softmax_rows(t.leaf(mat({{1000, 0}}))).value();
  CHECK(std::isfinite(big(0, 0)));
  CHECK(big(0, 0) == doctest::Approx(1.0));
  CHECK(big(0, 1) < 1e-300);
}

TEST_CASE("softmin closed forms") {
  Tape t;
  const Mat u = ad::softmin_vec(t.leaf(mat({{2.5}, {2.5}, {2.5}}))).value();
  for (int j = 0; j < 3; ++j) CHECK(u(j, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const Mat p = ad::softmin_vec(t.leaf(mat({{0}, {std::log(3.0)}}))).value();
  CHECK(p(0, 0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(p(1, 0) == doctest::Approx(0.25).epsilon(1e-14));

  CHECK(ad::softmin_vec(t.leaf(mat({{-7.0}}))).value()(0, 0) == 1.0);
  CHECK_THROWS_AS(ad::softmin_vec(t.leaf(Mat::Zero(2, 2))), DimensionError);
}

TEST_CASE("softmin equals softmax of the negation and is shift invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Tape t;
    const Mat z = random_matrix(1, 7, 100 + trial, -5, 5);
    const Mat a = ad::softmin_vec(t.leaf(z)).value();
    const Mat b = ad::softmax_rows(t.leaf(Mat(-z))).value();
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-15);
    const double delta = rng.uniform(-50, 50);
    const Mat c = ad::softmin_vec(t.leaf(Mat(z.array() + delta))).value();
    CHECK((a - c).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("normalizations sum to one within 1e-12") {
  for (int trial = 0; trial < 200; ++trial) {
    Tape t;
    const Mat a = random_matrix(1 + trial % 6, 1 + trial % 9, 7 * trial, -30, 30);
    const Mat s = ad::softmax_rows(t.leaf(a)).value();
    for (Eigen::Index r = 0; r < s.rows(); ++r) CHECK(std::abs(s.row(r).sum() - 1.0) <= 1e-12);
    const Mat v = ad::softmin_vec(t.leaf(Mat(a.row(0)))).value();
    CHECK(std::abs(v.sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("elementwise basics") {
  Tape t;
  CHECK(ad::sigmoid(t.leaf(Mat::Zero(1, 1))).item() == 0.5);
  CHECK(ad::tanh(t.leaf(Mat::Zero(1, 1))).item() == 0.0);
  CHECK(ad::add(t.leaf(mat({{1, 2}})), t.leaf(mat({{3, 4}}))).value() == mat({{4, 6}}));
  CHECK(ad::mul(t.leaf(mat({{2}})), t.leaf(mat({{3, 4}}))).value() == mat({{6, 8}}));
  CHECK(ad::sub(t.leaf(mat({{1, 2}})), t.leaf(mat({{1}}))).value() == mat({{0, 1}}));
  CHECK_THROWS_AS(ad::add(t.leaf(Mat::Zero(1, 2)), t.leaf(Mat::Zero(2, 1))), DimensionError);
  CHECK_THROWS_AS(ad::mul(t.leaf(Mat::Zero(2, 3)), t.leaf(Mat::Zero(1, 3))), DimensionError);
  // Extreme inputs stay finite.
  const Mat s = ad::sigmoid(t.leaf(mat({{-800, 800}}))).value();
  CHECK(s(0, 0) == 0.0);
  CHECK(s(0, 1) == 1.0);
  const Mat sp = ad::softplus(t.leaf(mat({{-800, 800}}))).value();
  CHECK(sp(0, 0) == 0.0);
  CHECK(sp(0, 1) == 800.0);
}

TEST_CASE("backward simple cases") {
  Tape t;
  const Var w = t.leaf(mat({{0.3, -1.0, 2.0}}), true);
  const Var unused = t.leaf(mat({{5.0, 6.0}}), true);
  const Var loss = ad::sum(w);
  t.backward(loss);
  CHECK(w.grad() == mat({{1, 1, 1}}));
  CHECK(unused.grad().isZero(0.0));

  Tape t2;
  const Var x = t2.leaf(mat({{3.0}}), true);
  const Var sq = ad::mul(x, x);
  t2.backward(sq);
  CHECK(x.grad()(0, 0) == 6.0);

  CHECK_THROWS_AS(t2.backward(t2.leaf(Mat::Zero(2, 1), true)), DimensionError);
}

TEST_CASE("grad_check is exact for linear functions") {
  const ad::ScalarFunction<double> f = [](Tape&, const std::vector<Var>& v) {
    return ad::dot(v[0], v[1]);
  };
  const double err = ad::grad_check(f, {random_matrix(1, 5, 3), random_matrix(1, 5, 4)});
  CHECK(err < 1e-8);
}

TEST_CASE("grad_check rejects non-finite evaluations") {
  const ad::ScalarFunction<double> f = [](Tape& t, const std::vector<Var>& v) {
    return ad::mul(v[0], t.leaf(Mat::Constant(1, 1, std::nan(""))));
  };
  CHECK_THROWS_AS(ad::grad_check(f, {Mat::Ones(1, 1)}), NumericalError);
}

TEST_CASE("every op passes grad_check at random points in [-2, 2]") {
  using F = ad::ScalarFunction<double>;
  const std::vector<std::pair<const char*, F>> cases = {
      {"matmul+transpose",
       [](Tape&, const std::vector<Var>& v) {
         return ad::sum(ad::mul(ad::matmul(v[0], ad::transpose(v[1])),
                                ad::matmul(v[0], ad::transpose(v[1]))));
       }},
      {"softmax_rows",
       [](Tape&, const std::vector<Var>& v) {
         return ad::dot(ad::softmax_rows(ad::mul(v[0], v[1])), ad::tanh(v[1]));
       }},
      {"softmin",
       [](Tape&, const std::vector<Var>& v) {
         const Var c = ad::row_sums(v[0]);
         return ad::dot(ad::softmin_vec(c), c);
       }},
      {"sigmoid tanh softplus",
       [](Tape&, const std::vector<Var>& v) {
         return ad::sum(ad::add(ad::softplus(v[0]), ad::mul(ad::sigmoid(v[0]), ad::tanh(v[1]))));
       }},
      {"scalar broadcast",
       [](Tape& t, const std::vector<Var>& v) {
         const Var s = ad::slice_cols(ad::row_sums(v[0]), 0, 1);
         const Var first = ad::matmul(t.leaf(Mat::Ones(1, s.rows())), s);
         return ad::sum(ad::sub(ad::mul(first, v[1]), ad::add(v[1], first)));
       }},
      {"concat slice mean",
       [](Tape&, const std::vector<Var>& v) {
         const Var c = ad::concat_cols(v[0], v[1]);
         return ad::mean(ad::tanh(ad::slice_cols(c, 1, 4)));
       }},
      {"affine cross entropy",
       [](Tape&, const std::vector<Var>& v) {
         const Var w = ad::slice_cols(v[1], 0, 3);
         const Var logits = ad::slice_cols(ad::matmul(ad::transpose(v[0]), w), 0, 1);
         return ad::softmax_cross_entropy(logits, 2);
       }},
  };
  for (const auto& [name, f] : cases) {
    for (int trial = 0; trial < 5; ++trial) {
      const double err =
          ad::grad_check(f, {random_matrix(3, 4, 10 * trial + 1), random_matrix(3, 4, 10 * trial + 2)});
      INFO(name);
      CHECK(err <= 1e-4);
    }
  }
}

TEST_CASE("gather and affine gradients") {
  const ad::ScalarFunction<double> f = [](Tape&, const std::vector<Var>& v) {
    const std::vector<int> ids = {2, 0, 2, 1};
    const Var e = ad::gather_rows(v[0], ids);
    return ad::sum(ad::tanh(ad::affine(e, v[1], v[2])));
  };
  CHECK(ad::grad_check(f, {random_matrix(4, 3, 1), random_matrix(3, 5, 2), random_matrix(1, 5, 3)}) <=
        1e-4);
  Tape t;
  const std::vector<int> bad = {4};
  CHECK_THROWS_AS(ad::gather_rows(t.leaf(Mat::Zero(4, 3)), bad), ValidationError);
}

TEST_CASE("fused LSTM matches the composed cell and its gradients") {
  const Eigen::Index in = 3, hid = 4, steps = 5;
  const Mat x = random_matrix(steps, in, 21);
  const Mat wx = random_matrix(in, 4 * hid, 22, -0.8, 0.8);
  const Mat wh = random_matrix(hid, 4 * hid, 23, -0.8, 0.8);
  const Mat b = random_matrix(1, 4 * hid, 24, -0.5, 0.5);
  for (ad::Direction dir : {ad::Direction::kForward, ad::Direction::kBackward}) {
    Tape t;
    const Var vx = t.leaf(x), vwx = t.leaf(wx), vwh = t.leaf(wh), vb = t.leaf(b);
    const Mat fused = ad::lstm_sequence(vx, vwx, vwh, vb, dir).value();
    ad::LstmState<double> state{t.leaf(Mat::Zero(1, hid)), t.leaf(Mat::Zero(1, hid))};
    Mat composed(steps, hid);
    for (Eigen::Index k = 0; k < steps; ++k) {
      const Eigen::Index s = dir == ad::Direction::kForward ? k : steps - 1 - k;
      const Var xs = t.leaf(Mat(x.row(s)));
      state = ad::lstm_cell(xs, state, vwx, vwh, vb);
      composed.row(s) = state.h.value();
    }
    CHECK((fused - composed).cwiseAbs().maxCoeff() < 1e-14);

    const ad::ScalarFunction<double> f = [dir](Tape& tp, const std::vector<Var>& v) {
      const Var h = ad::lstm_sequence(v[0], v[1], v[2], v[3], dir);
      return ad::dot(h, tp.leaf(random_matrix(h.rows(), h.cols(), 99)));
    };
    CHECK(ad::grad_check(f, {x, wx, wh, b}) <= 1e-4);
  }
}

TEST_CASE("backward is bit-deterministic") {
  auto run = [] {
    Tape t;
    const Var a = t.leaf(random_matrix(4, 6, 5), true);
    const Var b = t.leaf(random_matrix(6, 4, 6), true);
    const Var m = ad::matmul(a, b);
    const Var loss = ad::dot(ad::softmax_rows(m), ad::tanh(m));
    t.backward(loss);
    return std::make_pair(a.grad(), b.grad());
  };
  const auto first = run();
  const auto second = run();
  CHECK(first.first == second.first);
  CHECK(first.second == second.second);
}
