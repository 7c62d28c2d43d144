// pathdisc/discriminator.hpp

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

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "pathdisc/autodiff.hpp"
#include "pathdisc/checkpoint.hpp"
#include "pathdisc/core.hpp"
#include "pathdisc/rng.hpp"

namespace pathdisc {

enum class TowerMode { kBidirectional, kUnidirectional };

const char* to_string(TowerMode m);
TowerMode parse_tower_mode(std::string_view s);

struct DiscriminatorConfig {
  std::size_t vocab_size = 0;
  std::size_t feature_dim = 0;  // perceptual vector width, D + 4
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 32;
  TowerMode text_mode = TowerMode::kBidirectional;
  TowerMode path_mode = TowerMode::kBidirectional;

  /// Width of H^X and H^V.
  std::size_t output_dim() const {
    return text_mode == TowerMode::kBidirectional ? 2 * hidden_dim : hidden_dim;
  }
  /// The path tower's cell size is chosen so both towers emit output_dim().
  std::size_t path_hidden() const {
    return path_mode == TowerMode::kBidirectional ? output_dim() / 2 : output_dim();
  }

  friend bool operator==(const DiscriminatorConfig&, const DiscriminatorConfig&) = default;
};

void validate(const DiscriminatorConfig& cfg);
std::string to_json(const DiscriminatorConfig& cfg);
DiscriminatorConfig parse_discriminator_config(std::string_view json, std::string_view source);

/// Uniform init half-widths. At 0.1 everywhere both towers start so close to
/// zero that the bilinear alignment score barely moves under SGD.
inline constexpr double kInputInitScale = 1.0;      // embedding, path.proj.w
inline constexpr double kRecurrentInitScale = 0.3;  // LSTM wx, wh
inline constexpr double kBiasInitScale = 0.1;

/// Parameter names:
///   embedding                       [vocab, E]
///   instr.fwd.{wx,wh,b} (+ instr.bwd.* when bidirectional)
///   path.proj.{w,b}                 [(D+4), E], [1, E]
///   path.fwd.{wx,wh,b}  (+ path.bwd.* when bidirectional)
/// Forget-gate biases start at 1.
ParamStore init_discriminator(const DiscriminatorConfig& cfg, Rng& rng);

/// Throws DimensionError naming the first missing or misshaped array.
void check_params(const DiscriminatorConfig& cfg, const ParamStore& params);

/// Parameters placed on a tape as leaves.
using BoundParams = std::map<std::string, Var, std::less<>>;
BoundParams bind_params(Tape& tape, const ParamStore& params, bool requires_grad);

/// Draws uniform(-scale, scale) weights for an LSTM block
/// `<prefix>.{wx,wh,b}`; biases use kBiasInitScale with forget bias 1.
void init_lstm(ParamStore& params, const std::string& prefix, std::size_t in, std::size_t hid, Rng& rng,
               double scale = kRecurrentInitScale);

/// One recurrent tower over the rows of x: the `<prefix>.fwd` states,
/// concatenated with `<prefix>.bwd` in bidirectional mode.
Var encode_tower(const BoundParams& p, std::string_view prefix, TowerMode mode, const Var& x);

/// H^X [n, output_dim] for token ids (ids outside the vocabulary throw).
Var encode_instruction(const DiscriminatorConfig& cfg, const BoundParams& p, std::span<const int> tokens);

/// H^V [m, output_dim] for a perceptual sequence [m, D + 4].
Var encode_path(const DiscriminatorConfig& cfg, const BoundParams& p, const Mat& percepts);

/// A = H^X (H^V)^T.
Var alignment_matrix(const Var& hx, const Var& hv);

struct AlignmentPoolingVars {
  Var row_scores;  // [n, 1]
  Var raw_score;   // [1, 1]
};

/// c_l = softmax(A_l) . A_l, raw = softmin(c) . c.
AlignmentPoolingVars alignment_pooling(const Var& a);

/// raw score of one pair on the tape.
Var pair_raw_score(const DiscriminatorConfig& cfg, const BoundParams& p, std::span<const int> tokens,
                   const Mat& percepts);

struct AlignmentOutcome {
  Mat alignment;  // [n, m]
  Vec row_scores;
  double raw_score = 0;
  double probability = 0.5;
};

AlignmentOutcome score_pair(const DiscriminatorConfig& cfg, const ParamStore& params,
                            std::span<const int> tokens, const Mat& percepts);

inline constexpr std::string_view kDiscriminatorKind = "discriminator";

Checkpoint discriminator_checkpoint(const DiscriminatorConfig& cfg, const ParamStore& params,
                                    std::uint64_t vocab_hash);

struct LoadedDiscriminator {
  DiscriminatorConfig config;
  ParamStore params;
};

/// Validates kind, vocabulary hash, and every array dimension.
LoadedDiscriminator load_discriminator(const Checkpoint& ckpt, std::uint64_t vocab_hash,
                                       std::string_view source = "<checkpoint>");

}  // namespace pathdisc
