// src/discriminator.cpp

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

#include "pathdisc/discriminator.hpp"

#include "json_util.hpp"

namespace pathdisc {

namespace {

using detail::Json;

const Var& param(const BoundParams& p, std::string_view name) {
  const auto it = p.find(name);
  if (it == p.end()) throw ValidationError("missing parameter '" + std::string(name) + "'");
  return it->second;
}

Mat uniform(std::size_t rows, std::size_t cols, Rng& rng, double scale) {
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

void expect_shape(const ParamStore& params, const std::string& name, std::size_t rows, std::size_t cols) {
  const auto it = params.find(name);
  if (it == params.end()) throw DimensionError("parameter '" + name + "' is missing");
  const Mat& m = it->second;
  if (m.rows() != static_cast<Eigen::Index>(rows) || m.cols() != static_cast<Eigen::Index>(cols)) {
    throw DimensionError("parameter '" + name + "' has shape " + shape_str(m) + ", expected " +
                         shape_str(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
  }
  if (!m.allFinite()) throw NumericalError("parameter '" + name + "' has non-finite entries");
}

void expect_lstm(const ParamStore& params, const std::string& prefix, std::size_t in, std::size_t hid) {
  expect_shape(params, prefix + ".wx", in, 4 * hid);
  expect_shape(params, prefix + ".wh", hid, 4 * hid);
  expect_shape(params, prefix + ".b", 1, 4 * hid);
}

}  // namespace

const char* to_string(TowerMode m) {
  return m == TowerMode::kBidirectional ? "bidirectional" : "unidirectional";
}

TowerMode parse_tower_mode(std::string_view s) {
  if (s == "bidirectional") return TowerMode::kBidirectional;
  if (s == "unidirectional") return TowerMode::kUnidirectional;
  throw ValidationError("unknown tower mode '" + std::string(s) + "' (bidirectional, unidirectional)");
}

void validate(const DiscriminatorConfig& c) {
  if (c.vocab_size < 5) throw ValidationError("discriminator: vocab_size too small");
  if (c.feature_dim < 1) throw ValidationError("discriminator: feature_dim must be >= 1");
  if (c.embed_dim < 1 || c.hidden_dim < 1) throw ValidationError("discriminator: embed_dim and hidden_dim must be >= 1");
  if (c.output_dim() % (c.path_mode == TowerMode::kBidirectional ? 2 : 1) != 0) {
    throw ValidationError("discriminator: path tower cannot match an odd text output width");
  }
}

std::string to_json(const DiscriminatorConfig& c) {
  Json j;
  j["vocab_size"] = c.vocab_size;
  j["feature_dim"] = c.feature_dim;
  j["embed_dim"] = c.embed_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["text_mode"] = to_string(c.text_mode);
  j["path_mode"] = to_string(c.path_mode);
  return j.dump();
}

DiscriminatorConfig parse_discriminator_config(std::string_view json, std::string_view source) {
  using namespace detail;
  const std::string w(source);
  const Json j = parse_json(json, source);
  reject_unknown(j, {"vocab_size", "feature_dim", "embed_dim", "hidden_dim", "text_mode", "path_mode"}, w);
  DiscriminatorConfig c;
  auto count = [&](const char* key) {
    const long long v = as_int(field(j, key, w), w + ": " + key);
    if (v < 0) throw ValidationError(w + ": " + key + " must be non-negative");
    return static_cast<std::size_t>(v);
  };
  c.vocab_size = count("vocab_size");
  c.feature_dim = count("feature_dim");
  c.embed_dim = count("embed_dim");
  c.hidden_dim = count("hidden_dim");
  c.text_mode = parse_tower_mode(as_string(field(j, "text_mode", w), w + ": text_mode"));
  c.path_mode = parse_tower_mode(as_string(field(j, "path_mode", w), w + ": path_mode"));
  validate(c);
  return c;
}

void init_lstm(ParamStore& params, const std::string& prefix, std::size_t in, std::size_t hid, Rng& rng,
               double scale) {
  params[prefix + ".wx"] = uniform(in, 4 * hid, rng, scale);
  params[prefix + ".wh"] = uniform(hid, 4 * hid, rng, scale);
  Mat b = uniform(1, 4 * hid, rng, kBiasInitScale);
  b.middleCols(static_cast<Eigen::Index>(hid), static_cast<Eigen::Index>(hid)).setOnes();
  params[prefix + ".b"] = std::move(b);
}

ParamStore init_discriminator(const DiscriminatorConfig& cfg, Rng& rng) {
  validate(cfg);
  ParamStore p;
  p["embedding"] = uniform(cfg.vocab_size, cfg.embed_dim, rng, kInputInitScale);
  init_lstm(p, "instr.fwd", cfg.embed_dim, cfg.hidden_dim, rng);
  if (cfg.text_mode == TowerMode::kBidirectional) init_lstm(p, "instr.bwd", cfg.embed_dim, cfg.hidden_dim, rng);
  p["path.proj.w"] = uniform(cfg.feature_dim, cfg.embed_dim, rng, kInputInitScale);
  p["path.proj.b"] = uniform(1, cfg.embed_dim, rng, kBiasInitScale);
  init_lstm(p, "path.fwd", cfg.embed_dim, cfg.path_hidden(), rng);
  if (cfg.path_mode == TowerMode::kBidirectional) init_lstm(p, "path.bwd", cfg.embed_dim, cfg.path_hidden(), rng);
  return p;
}

void check_params(const DiscriminatorConfig& cfg, const ParamStore& params) {
  validate(cfg);
  std::size_t expected = 9;
  expect_shape(params, "embedding", cfg.vocab_size, cfg.embed_dim);
  expect_lstm(params, "instr.fwd", cfg.embed_dim, cfg.hidden_dim);
  if (cfg.text_mode == TowerMode::kBidirectional) {
    expect_lstm(params, "instr.bwd", cfg.embed_dim, cfg.hidden_dim);
    expected += 3;
  }
  expect_shape(params, "path.proj.w", cfg.feature_dim, cfg.embed_dim);
  expect_shape(params, "path.proj.b", 1, cfg.embed_dim);
  expect_lstm(params, "path.fwd", cfg.embed_dim, cfg.path_hidden());
  if (cfg.path_mode == TowerMode::kBidirectional) {
    expect_lstm(params, "path.bwd", cfg.embed_dim, cfg.path_hidden());
    expected += 3;
  }
  std::size_t model_arrays = 0;
  for (const auto& [name, _] : params) model_arrays += name.rfind("opt/", 0) == 0 ? 0 : 1;
  if (model_arrays != expected) {
    throw DimensionError("discriminator parameters: expected " + std::to_string(expected) + " arrays, found " +
                         std::to_string(model_arrays));
  }
}

BoundParams bind_params(Tape& tape, const ParamStore& params, bool requires_grad) {
  BoundParams out;
  for (const auto& [name, m] : params) out.emplace(name, tape.leaf(m, requires_grad));
  return out;
}

Var encode_tower(const BoundParams& p, std::string_view prefix, TowerMode mode, const Var& x) {
  const std::string pre(prefix);
  const Var fwd = ad::lstm_sequence(x, param(p, pre + ".fwd.wx"), param(p, pre + ".fwd.wh"),
                                    param(p, pre + ".fwd.b"), ad::Direction::kForward);
  if (mode == TowerMode::kUnidirectional) return fwd;
  const Var bwd = ad::lstm_sequence(x, param(p, pre + ".bwd.wx"), param(p, pre + ".bwd.wh"),
                                    param(p, pre + ".bwd.b"), ad::Direction::kBackward);
  return ad::concat_cols(fwd, bwd);
}

Var encode_instruction(const DiscriminatorConfig& cfg, const BoundParams& p, std::span<const int> tokens) {
  if (tokens.empty()) throw ValidationError("encode_instruction: empty token sequence");
  const Var x = ad::gather_rows(param(p, "embedding"), tokens);
  return encode_tower(p, "instr", cfg.text_mode, x);
}

Var encode_path(const DiscriminatorConfig& cfg, const BoundParams& p, const Mat& percepts) {
  if (percepts.rows() < 1) throw ValidationError("encode_path: empty perceptual sequence");
  if (percepts.cols() != static_cast<Eigen::Index>(cfg.feature_dim)) {
    throw DimensionError("encode_path: percepts are " + shape_str(percepts) + ", expected width " +
                         std::to_string(cfg.feature_dim));
  }
  Tape* tape = param(p, "path.proj.w").tape();
  const Var x = ad::affine(tape->leaf(percepts), param(p, "path.proj.w"), param(p, "path.proj.b"));
  return encode_tower(p, "path", cfg.path_mode, x);
}

Var alignment_matrix(const Var& hx, const Var& hv) {
  if (hx.cols() != hv.cols()) {
    throw DimensionError("alignment_matrix: hidden widths differ, H^X " + shape_str(hx.value()) + " vs H^V " +
                         shape_str(hv.value()));
  }
  return ad::matmul(hx, ad::transpose(hv));
}

AlignmentPoolingVars alignment_pooling(const Var& a) {
  const Var c = ad::row_sums(ad::mul(ad::softmax_rows(a), a));
  return {c, ad::dot(ad::softmin_vec(c), c)};
}

Var pair_raw_score(const DiscriminatorConfig& cfg, const BoundParams& p, std::span<const int> tokens,
                   const Mat& percepts) {
  const Var a = alignment_matrix(encode_instruction(cfg, p, tokens), encode_path(cfg, p, percepts));
  return alignment_pooling(a).raw_score;
}

AlignmentOutcome score_pair(const DiscriminatorConfig& cfg, const ParamStore& params,
                            std::span<const int> tokens, const Mat& percepts) {
  Tape tape;
  const BoundParams p = bind_params(tape, params, false);
  const Var a = alignment_matrix(encode_instruction(cfg, p, tokens), encode_path(cfg, p, percepts));
  const AlignmentPoolingVars pool = alignment_pooling(a);
  AlignmentOutcome out;
  out.alignment = a.value();
  out.row_scores = pool.row_scores.value().col(0);
  out.raw_score = pool.raw_score.item();
  out.probability = ad::detail::sigmoid(out.raw_score);
  return out;
}

Checkpoint discriminator_checkpoint(const DiscriminatorConfig& cfg, const ParamStore& params,
                                    std::uint64_t vocab_hash) {
  check_params(cfg, params);
  Checkpoint ck;
  ck.kind = std::string(kDiscriminatorKind);
  ck.config = to_json(cfg);
  ck.vocab_hash = vocab_hash;
  ck.arrays = params;
  return ck;
}

LoadedDiscriminator load_discriminator(const Checkpoint& ckpt, std::uint64_t vocab_hash, std::string_view source) {
  expect_checkpoint(ckpt, kDiscriminatorKind, vocab_hash, source);
  LoadedDiscriminator out;
  out.config = parse_discriminator_config(ckpt.config, std::string(source) + ": config");
  for (const auto& [name, m] : ckpt.arrays) {
    if (name.rfind("opt/", 0) != 0) out.params.emplace(name, m);
  }
  check_params(out.config, out.params);
  return out;
}

}  // namespace pathdisc
