// pathdisc/trainer.hpp

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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathdisc/checkpoint.hpp"
#include "pathdisc/discriminator.hpp"
#include "pathdisc/io.hpp"
#include "pathdisc/rng.hpp"
#include "pathdisc/synth_world.hpp"

namespace pathdisc {

/// A pair ready for the discriminator: token ids plus the perceptual
/// sequence of its path. Negatives carry their label in `provenance`.
struct ScoringInput {
  std::string pair_id;
  std::string source_id;  // originating positive for negatives, else pair_id
  std::vector<int> tokens;
  Mat percepts;
  Provenance provenance = Provenance::kHumanLike;

  bool positive() const { return !is_negative(provenance); }
};

std::vector<ScoringInput> make_scoring_inputs(const World& world, std::span<const InstructionPathPair> pairs);

/// Raw alignment scores of every input, computed on worker_count() threads.
std::vector<double> raw_scores(const DiscriminatorConfig& cfg, const ParamStore& params,
                               std::span<const ScoringInput> inputs);

/// Mean binary cross-entropy of sigmoid(raw_score) against the label
/// (positive = 1), in the stable softplus form. Throws on an empty batch.
double compute_loss(const DiscriminatorConfig& cfg, const ParamStore& params, std::span<const ScoringInput> batch);

struct LossGradient {
  double loss = 0;
  ParamStore gradient;  // same names and shapes as the parameters
};
LossGradient loss_and_gradient(const DiscriminatorConfig& cfg, const ParamStore& params,
                               std::span<const ScoringInput> batch);

enum class LossKind {
  kPointwise,  // logistic loss per pair
  kPairwise,   // softplus(s_neg - s_pos) per (positive, own negative)
};
const char* to_string(LossKind k);
LossKind parse_loss_kind(std::string_view s);

/// Negative strategies are named PS, PR, RW.
std::string strategy_name(Provenance p);
Provenance parse_strategy(std::string_view s);

struct CurriculumStage {
  std::vector<Provenance> strategies;
  std::size_t epochs = 30;
  friend bool operator==(const CurriculumStage&, const CurriculumStage&) = default;
};

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 0.2;
  double momentum = 0.9;
  double clip_norm = 5.0;
  std::size_t ps_per_positive = 1;
  std::size_t pr_per_positive = 1;
  std::size_t rw_per_positive = 1;
  std::vector<CurriculumStage> stages = {
      {{Provenance::kNegativePS}, 30},
      {{Provenance::kNegativePR, Provenance::kNegativeRW}, 30},
  };
  LossKind loss = LossKind::kPointwise;
  std::uint64_t seed = 7;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& cfg);
std::string to_json(const TrainConfig& cfg);
/// Fields missing from `text` keep the values of `base`; unknown fields are
/// rejected.
TrainConfig parse_train_config(std::string_view text, std::string_view source = "<memory>",
                               const TrainConfig& base = {});

/// Positives and mined negatives for training and validation.
struct TrainingData {
  std::vector<ScoringInput> train_positives;
  std::vector<ScoringInput> train_negatives;
  std::vector<ScoringInput> val_positives;
  std::vector<ScoringInput> val_negatives;
};

/// Sorts `pairs` by split and label. Human-like pairs are positives,
/// augmented pairs are ignored, and every negative must name a positive of
/// the same split.
TrainingData make_training_data(const World& world, std::span<const InstructionPathPair> pairs);

/// Validation AUCs; NaN where a subset has no negatives.
struct ValidationAuc {
  double pr_rw = 0;  // the headline number: PR and RW negatives only
  double ps = 0;
  double pr = 0;
  double rw = 0;
  double all = 0;
};
ValidationAuc validation_auc(const DiscriminatorConfig& cfg, const ParamStore& params, const TrainingData& data);

struct EpochRow {
  std::size_t stage = 0;
  std::size_t epoch = 0;           // 1-based over the whole run
  std::size_t stage_epoch = 0;     // 1-based within the stage
  std::string strategies;          // e.g. "PR+RW"
  std::size_t examples = 0;
  double loss = 0;
  double train_auc = 0;
  ValidationAuc val;
  double seconds = 0;              // wall clock; only in the timing table
};

/// Deterministic columns only, one row per epoch.
CsvTable report_table(std::span<const EpochRow> rows);
/// epoch,seconds.
CsvTable timing_table(std::span<const EpochRow> rows);

/// Everything that determines the rest of a run.
struct TrainState {
  ParamStore params;
  ParamStore velocity;
  Rng rng;
  std::size_t stage = 0;        // next stage to run
  std::size_t stage_epoch = 0;  // epochs of `stage` already done
  std::vector<EpochRow> report;
};

TrainState init_train_state(const DiscriminatorConfig& cfg, const TrainConfig& tcfg);
/// Starts from given parameters (velocity zero).
TrainState init_train_state(ParamStore params, const TrainConfig& tcfg);

/// Called after every epoch; returning false stops training early.
using EpochHook = std::function<bool(const TrainState&)>;

/// Runs the remaining epochs of stage `stage` (which must be state.stage)
/// with momentum SGD, a seeded per-epoch reshuffle and global-norm gradient
/// clipping. Throws NumericalError on a non-finite loss. Returns false if
/// the hook stopped it.
bool train_stage(TrainState& state, const DiscriminatorConfig& cfg, const TrainingData& data,
                 const TrainConfig& tcfg, std::size_t stage, const EpochHook& hook = {});

/// Runs the stages from state.stage onward, carrying parameters forward.
bool curriculum_train(TrainState& state, const DiscriminatorConfig& cfg, const TrainingData& data,
                      const TrainConfig& tcfg, const EpochHook& hook = {});

/// A discriminator checkpoint that also holds the velocity ("opt/" arrays),
/// the shuffle generator, progress, and the report so far (without wall
/// clock, so equal runs give equal bytes). Loadable by load_discriminator.
Checkpoint training_checkpoint(const TrainState& state, const DiscriminatorConfig& cfg, const TrainConfig& tcfg,
                               std::uint64_t vocab_hash);

struct ResumedTraining {
  DiscriminatorConfig config;
  TrainConfig train_config;
  TrainState state;
};
ResumedTraining resume_training(const Checkpoint& ckpt, std::uint64_t vocab_hash,
                                std::string_view source = "<checkpoint>");

}  // namespace pathdisc
