// tests/test_discriminator.cpp

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

#include <algorithm>
#include <numeric>

#include "pathdisc/alignment.hpp"
#include "pathdisc/discriminator.hpp"
#include "test_util.hpp"

using namespace pathdisc;
using pathdisc::test::random_matrix;

namespace {

DiscriminatorConfig tiny_config(TowerMode text = TowerMode::kBidirectional,
                                TowerMode path = TowerMode::kBidirectional) {
  DiscriminatorConfig c;
  c.vocab_size = 12;
  c.feature_dim = 6;
  c.embed_dim = 4;
  c.hidden_dim = 3;
  c.text_mode = text;
  c.path_mode = path;
  return c;
}

double pooled(const Mat& a) {
  Tape t;
  return alignment_pooling(t.leaf(a)).raw_score.item();
}

}  // namespace

TEST_CASE("instruction tower shapes and order sensitivity") {
  const DiscriminatorConfig cfg = tiny_config();
  Rng rng(1);
  const ParamStore params = init_discriminator(cfg, rng);
  Tape t;
  const BoundParams p = bind_params(t, params, false);
  const std::vector<int> tokens{2, 5, 7, 9, 3};
  const Var hx = encode_instruction(cfg, p, tokens);
  CHECK(hx.rows() == 5);
  CHECK(hx.cols() == 2 * 3);
  std::vector<int> reversed(tokens.rbegin(), tokens.rend());
  CHECK((encode_instruction(cfg, p, reversed).value() - hx.value()).norm() > 1e-6);
  const std::vector<int> bad{2, 12};
  CHECK_THROWS_AS(encode_instruction(cfg, p, bad), ValidationError);

  const DiscriminatorConfig uni = tiny_config(TowerMode::kUnidirectional, TowerMode::kUnidirectional);
  Rng rng2(1);
  Tape t2;
  const BoundParams pu = bind_params(t2, init_discriminator(uni, rng2), false);
  CHECK(encode_instruction(uni, pu, tokens).cols() == 3);
}

TEST_CASE("path tower shapes") {
  for (auto text : {TowerMode::kBidirectional, TowerMode::kUnidirectional}) {
    for (auto path : {TowerMode::kBidirectional, TowerMode::kUnidirectional}) {
      const DiscriminatorConfig cfg = tiny_config(text, path);
      if (cfg.output_dim() % 2 == 1 && path == TowerMode::kBidirectional) {
        CHECK_THROWS_AS(validate(cfg), ValidationError);
        continue;
      }
      Rng rng(2);
      Tape t;
      const BoundParams p = bind_params(t, init_discriminator(cfg, rng), false);
      const Var hv = encode_path(cfg, p, random_matrix(4, 6, 3));
      CHECK(hv.rows() == 4);
      CHECK(hv.cols() == static_cast<Eigen::Index>(cfg.output_dim()));
      CHECK_THROWS_AS(encode_path(cfg, p, random_matrix(4, 5, 3)), DimensionError);
    }
  }
  // Unidirectional path tower next to a bidirectional text tower doubles its cell.
  const DiscriminatorConfig mixed = tiny_config(TowerMode::kBidirectional, TowerMode::kUnidirectional);
  CHECK(mixed.path_hidden() == 6);
  const DiscriminatorConfig uni = tiny_config(TowerMode::kUnidirectional, TowerMode::kUnidirectional);
  CHECK(uni.output_dim() == uni.hidden_dim);

  // Zero weights and zero input keep every state at zero.
  const DiscriminatorConfig cfg = tiny_config();
  Rng rng(4);
  ParamStore zero = init_discriminator(cfg, rng);
  for (auto& [name, m] : zero) m.setZero();
  Tape t;
  CHECK(encode_path(cfg, bind_params(t, zero, false), Mat::Zero(3, 6)).value().isZero(0.0));
}

TEST_CASE("alignment matrix") {
  Tape t;
  const Var hx = t.leaf(random_matrix(3, 5, 1));
  const Var hv = t.leaf(random_matrix(4, 5, 2));
  const Var a = alignment_matrix(hx, hv);
  CHECK(a.rows() == 3);
  CHECK(a.cols() == 4);
  CHECK(a.value().isApprox(hx.value() * hv.value().transpose(), 1e-15));
  const Var eye = t.leaf(Mat::Identity(3, 3));
  CHECK(alignment_matrix(eye, eye).value() == Mat::Identity(3, 3));
  Mat left = Mat::Zero(2, 4), right = Mat::Zero(3, 4);
  left.leftCols(2) = random_matrix(2, 2, 5);
  right.rightCols(2) = random_matrix(3, 2, 6);
  CHECK(alignment_matrix(t.leaf(left), t.leaf(right)).value().isZero(0.0));
  CHECK_THROWS_AS(alignment_matrix(hx, t.leaf(random_matrix(4, 6, 2))), DimensionError);
}

TEST_CASE("alignment pooling closed forms") {
  CHECK(pooled(Mat::Constant(1, 1, 2.5)) == 2.5);
  CHECK(pooled(Mat::Constant(1, 1, -7.0)) == -7.0);
  CHECK(pooled(Mat::Zero(3, 5)) == 0.0);
  CHECK(pooled(Mat::Zero(1, 1)) == 0.0);

  // Hand evaluation: A = [[0, ln 3], [1, 1]].
  // Row 0: weights [1/4, 3/4] -> c0 = 3/4 ln 3; row 1: c1 = 1.
  // softmin weights over c: w0 = e^-c0 / (e^-c0 + e^-c1).
  Mat a(2, 2);
  a << 0.0, std::log(3.0), 1.0, 1.0;
  const double c0 = 0.75 * std::log(3.0), c1 = 1.0;
  const double w0 = std::exp(-c0) / (std::exp(-c0) + std::exp(-c1));
  CHECK(pooled(a) == doctest::Approx(w0 * c0 + (1 - w0) * c1).epsilon(1e-14));
}

TEST_CASE("alignment pooling: shift equivariance and permutation invariance") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(6));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.index(6));
    const Mat a = random_matrix(n, m, rng.next_u64(), -3, 3);
    const double delta = rng.uniform(-5, 5);
    const double base = pooled(a);
    CHECK(std::abs(pooled((a.array() + delta).matrix()) - (base + delta)) <= 1e-10);

    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    rng.shuffle(rows);
    Mat permuted(n, m);
    for (Eigen::Index r = 0; r < n; ++r) {
      std::vector<Eigen::Index> cols(static_cast<std::size_t>(m));
      std::iota(cols.begin(), cols.end(), 0);
      rng.shuffle(cols);
      for (Eigen::Index c = 0; c < m; ++c) permuted(r, c) = a(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
    }
    CHECK(std::abs(pooled(permuted) - base) <= 1e-12);
    // Tape pooling agrees with the expression-level helper.
    CHECK(std::abs(alignment_score(a).raw_score - base) <= 1e-13);
    CHECK(std::abs(alignment_score(a.transpose() * 1.0).raw_score - pooled(a.transpose())) <= 1e-13);
  }
}

TEST_CASE("score_pair is a deterministic probability") {
  const DiscriminatorConfig cfg = tiny_config();
  Rng rng(6);
  ParamStore params = init_discriminator(cfg, rng);
  const std::vector<int> tokens{2, 4, 8, 3};
  const Mat v = random_matrix(5, 6, 8);
  const AlignmentOutcome a = score_pair(cfg, params, tokens, v);
  const AlignmentOutcome b = score_pair(cfg, params, tokens, v);
  CHECK(a.alignment.rows() == 4);
  CHECK(a.alignment.cols() == 5);
  CHECK(a.row_scores.size() == 4);
  CHECK(a.raw_score == b.raw_score);
  CHECK(a.alignment == b.alignment);
  CHECK(a.probability > 0.0);
  CHECK(a.probability < 1.0);
  CHECK(a.probability == doctest::Approx(1.0 / (1.0 + std::exp(-a.raw_score))));
  for (auto& [name, m] : params) m *= 40.0;
  const AlignmentOutcome big = score_pair(cfg, params, tokens, v);
  CHECK(big.probability >= 0.0);
  CHECK(big.probability <= 1.0);
  CHECK(std::isfinite(big.raw_score));
}

TEST_CASE("raw score gradient matches finite differences for every parameter") {
  for (auto path_mode : {TowerMode::kBidirectional, TowerMode::kUnidirectional}) {
    const DiscriminatorConfig cfg = tiny_config(TowerMode::kBidirectional, path_mode);
    Rng rng(7);
    ParamStore params = init_discriminator(cfg, rng);
    // Larger weights than the init so every path through the towers matters.
    for (auto& [name, m] : params) m = random_matrix(m.rows(), m.cols(), rng.next_u64(), -0.8, 0.8);
    std::vector<std::string> names;
    std::vector<Mat> point;
    for (const auto& [name, m] : params) {
      names.push_back(name);
      point.push_back(m);
    }
    const std::vector<int> tokens{2, 6, 3};
    const Mat v = random_matrix(3, 6, 9, -1, 1);
    const ad::ScalarFunction<double> f = [&](Tape&, const std::vector<Var>& leaves) {
      BoundParams p;
      for (std::size_t i = 0; i < names.size(); ++i) p.emplace(names[i], leaves[i]);
      return pair_raw_score(cfg, p, tokens, v);
    };
    CHECK(ad::grad_check(f, point) <= 1e-4);
  }
}

TEST_CASE("checkpoint round trip and validation") {
  const DiscriminatorConfig cfg = tiny_config(TowerMode::kBidirectional, TowerMode::kUnidirectional);
  Rng rng(8);
  const ParamStore params = init_discriminator(cfg, rng);
  const Checkpoint ck = discriminator_checkpoint(cfg, params, 0xabcdef0123456789ULL);
  const std::string bytes = serialize_checkpoint(ck);
  const LoadedDiscriminator back = load_discriminator(deserialize_checkpoint(bytes), 0xabcdef0123456789ULL);
  CHECK(back.config == cfg);
  CHECK(back.params == params);
  CHECK(serialize_checkpoint(discriminator_checkpoint(back.config, back.params, ck.vocab_hash)) == bytes);

  CHECK_THROWS_WITH_AS(load_discriminator(deserialize_checkpoint(bytes), 1), doctest::Contains("vocabulary"),
                       ValidationError);
  std::string corrupt = bytes;
  corrupt[10] ^= 0x20;
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(corrupt), doctest::Contains("checksum"), ValidationError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)), ValidationError);
  CHECK_THROWS_AS(deserialize_checkpoint("XXXX" + bytes.substr(4)), ValidationError);

  ParamStore wrong = params;
  wrong["path.proj.w"] = Mat::Zero(5, 4);
  CHECK_THROWS_AS(discriminator_checkpoint(cfg, wrong, 1), DimensionError);
  wrong = params;
  wrong.erase("instr.bwd.wh");
  CHECK_THROWS_AS(check_params(cfg, wrong), DimensionError);

  Checkpoint other = ck;
  other.kind = "agent";
  CHECK_THROWS_AS(load_discriminator(other, ck.vocab_hash), ValidationError);
}
