// pathdisc/agent.hpp

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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathdisc/checkpoint.hpp"
#include "pathdisc/discriminator.hpp"
#include "pathdisc/metrics.hpp"
#include "pathdisc/synth_world.hpp"

namespace pathdisc {

/// Follower architecture and training schedule. The encoder dimensions
/// mirror DiscriminatorConfig so a unidirectional-path discriminator can
/// seed the agent array for array.
struct AgentConfig {
  std::size_t vocab_size = 0;
  std::size_t feature_dim = 0;  // D + 4
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 32;
  TowerMode text_mode = TowerMode::kBidirectional;
  std::size_t horizon = 10;

  std::size_t epochs = 20;
  std::size_t batch_size = 16;
  double learning_rate = 0.1;
  double momentum = 0.9;
  double clip_norm = 5.0;
  std::uint64_t seed = 7;

  /// Width of the instruction states and of the policy cell.
  std::size_t state_dim() const { return text_mode == TowerMode::kBidirectional ? 2 * hidden_dim : hidden_dim; }

  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

void validate(const AgentConfig& cfg);
std::string to_json(const AgentConfig& cfg);
/// Fields missing from `text` keep the values of `base`.
AgentConfig parse_agent_config(std::string_view text, std::string_view source = "<memory>",
                               const AgentConfig& base = {});

/// Parameter names:
///   embedding, instr.fwd.* (+ instr.bwd.*)  instruction encoder
///   path.proj.{w,b}                         visual projection [(D+4), E]
///   policy.cell.{wx,wh,b}                   LSTM [E -> state_dim]
///   policy.query                            [2 * state_dim, E]
ParamStore init_agent_random(const AgentConfig& cfg);

/// Copies the embedding, instruction tower and visual projection from a
/// discriminator; the policy cell and policy.query are drawn from the same
/// streams as in random mode. Refuses a bidirectional path tower, whose
/// backward half has no step-by-step use.
ParamStore init_agent_from_discriminator(const AgentConfig& cfg, const LoadedDiscriminator& disc);

/// Agent dimensions taken from a discriminator, schedule from `base`.
AgentConfig agent_config_for(const DiscriminatorConfig& disc, const AgentConfig& base);

void check_agent_params(const AgentConfig& cfg, const ParamStore& params);

/// Candidate actions at a node: index 0 is STOP (the current node, zero
/// feature); the rest are the neighbors in id order with feature
/// base_feature(neighbor) + orientation toward it.
struct ActionSet {
  std::vector<NodeIndex> targets;
  Mat features;  // [targets.size(), D + 4]
};
ActionSet action_set(const EnvironmentGraph& env, NodeIndex current, double arrival_heading);

/// Per-episode recurrent policy over one instruction.
class AgentPolicy {
 public:
  AgentPolicy(const AgentConfig& cfg, const ParamStore& params, std::span<const int> tokens);
  ~AgentPolicy();
  AgentPolicy(AgentPolicy&&) noexcept;

  /// Consumes the previous action feature [1, D + 4] and returns the action
  /// distribution over `actions`.
  Vec step(const Mat& previous_action, const ActionSet& actions);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Training label at `current`: STOP (0) at the goal, otherwise the index of
/// next_hop(current, goal) in `actions`.
std::size_t supervision_label(const EnvironmentGraph& env, const ActionSet& actions, NodeIndex current,
                              NodeIndex goal);

/// Feature fed to the policy cell after moving from `from` to `to` (or at
/// the start, with from == to: base feature and zero orientation).
Mat previous_action_feature(const EnvironmentGraph& env, NodeIndex from, NodeIndex to, double arrival_heading);

// ---------------------------------------------------------------------------
// Training

struct AgentEpochRow {
  std::size_t epoch = 0;
  std::size_t episodes = 0;
  double loss = 0;          // mean per-step cross-entropy
  double train_sr = 0;      // success of the sampled rollouts
  double seconds = 0;
};

struct AgentTrainResult {
  ParamStore params;
  std::vector<AgentEpochRow> report;
};

/// Student forcing: actions are sampled from the policy (seeded per epoch
/// and episode) and each step is supervised with the shortest-path action.
/// Episodes run in parallel; gradients are reduced in episode order.
AgentTrainResult train_student_forcing(const AgentConfig& cfg, ParamStore params, const World& world,
                                       std::span<const InstructionPathPair> pairs);

/// Mean per-step loss of one sampled episode and its gradient; exposed for
/// gradient checks. `rng_seed` fixes the sampled rollout.
double episode_loss(const AgentConfig& cfg, const ParamStore& params, const World& world,
                    const InstructionPathPair& pair, std::uint64_t rng_seed, ParamStore* gradient = nullptr,
                    bool* success = nullptr);

CsvTable agent_report_table(std::span<const AgentEpochRow> rows);

// ---------------------------------------------------------------------------
// Evaluation

struct StepView {
  const EnvironmentGraph& env;
  const InstructionPathPair& pair;
  NodeIndex current;
  std::size_t step;
  const ActionSet& actions;
  const Mat& previous_action;
};

/// Chooses an action index per step within one episode.
class EpisodePolicy {
 public:
  virtual ~EpisodePolicy() = default;
  virtual std::size_t choose(const StepView& view) = 0;
};

/// Builds the policy for episode `index` of an evaluation.
using PolicyFactory = std::function<std::unique_ptr<EpisodePolicy>(const InstructionPathPair& pair, std::size_t index)>;

/// Greedy decoding with the trained agent.
PolicyFactory greedy_agent(const AgentConfig& cfg, const ParamStore& params);
/// Follows the shortest path to the reference goal and stops there.
PolicyFactory oracle_policy();
/// Uniform over all candidates including STOP, seeded per episode.
PolicyFactory random_policy(std::uint64_t seed);

/// Runs the policy from the pair's start until STOP or `horizon` moves.
Path rollout(const World& world, const InstructionPathPair& pair, EpisodePolicy& policy, std::size_t horizon);

struct EvaluationResult {
  NavMetrics mean;
  std::vector<NavMetrics> episodes;
  std::vector<Path> predictions;
};

EvaluationResult evaluate_policy(const World& world, std::span<const InstructionPathPair> pairs,
                                 const PolicyFactory& factory, std::size_t horizon,
                                 const MetricConfig& metrics = {});

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr std::string_view kAgentKind = "agent";

Checkpoint agent_checkpoint(const AgentConfig& cfg, const ParamStore& params, std::uint64_t vocab_hash);

struct LoadedAgent {
  AgentConfig config;
  ParamStore params;
};
LoadedAgent load_agent(const Checkpoint& ckpt, std::uint64_t vocab_hash, std::string_view source = "<checkpoint>");

}  // namespace pathdisc
