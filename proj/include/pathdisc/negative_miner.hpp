// pathdisc/negative_miner.hpp

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
#include <string>
#include <string_view>
#include <vector>

#include "pathdisc/env_graph.hpp"
#include "pathdisc/rng.hpp"
#include "pathdisc/synth_world.hpp"

namespace pathdisc {

/// How partial-reorder negatives treat graph adjacency.
enum class PrMode {
  kStrict,   // only reorderings whose consecutive nodes stay adjacent
  kRelaxed,  // any non-identity reordering of the intermediate percepts
  kAuto,     // strict when such a reordering exists, relaxed otherwise
};

const char* to_string(PrMode m);
PrMode parse_pr_mode(std::string_view s);

struct MiningConfig {
  std::size_t ps_per_positive = 1;
  std::size_t pr_per_positive = 1;
  std::size_t rw_per_positive = 1;
  double far_threshold_m = 5.0;
  PrMode pr_mode = PrMode::kAuto;
  int attempts = kPathSampleAttempts;
  std::uint64_t seed = 7;
};

void validate(const MiningConfig& config);

/// Path substitution: the instruction is kept and the path replaced by a
/// different admissible path of the same environment.
std::vector<InstructionPathPair> mine_ps(const EnvironmentGraph& env, const InstructionPathPair& pair,
                                         std::size_t k, Rng& rng, int attempts = kPathSampleAttempts);

/// Partial reordering: endpoints fixed, intermediate nodes permuted
/// (never the identity).
std::vector<InstructionPathPair> mine_pr(const EnvironmentGraph& env, const InstructionPathPair& pair,
                                         std::size_t k, Rng& rng, PrMode mode = PrMode::kAuto);

/// Node-simple random walks with the original edge count, anchored at the
/// original start (end at least far_threshold_m from the original end) or at
/// the original end (start far from the original start). The anchor is
/// drawn uniformly per attempt.
std::vector<InstructionPathPair> mine_rw(const EnvironmentGraph& env, const InstructionPathPair& pair,
                                         std::size_t k, Rng& rng, double far_threshold_m = 5.0,
                                         int attempts = kPathSampleAttempts);

/// True when some non-identity reordering of the intermediate nodes keeps
/// every consecutive pair adjacent.
bool has_strict_reordering(const EnvironmentGraph& env, const std::vector<NodeIndex>& nodes);

/// The positive a mined negative came from: its pair_id up to the last '/'.
/// Throws ValidationError for ids without one.
std::string negative_source_id(std::string_view negative_pair_id);

struct MiningStats {
  std::size_t ps = 0;
  std::size_t pr_strict = 0;
  std::size_t pr_relaxed = 0;
  std::size_t rw = 0;
  /// Positives for which a strategy ran out of attempts and was skipped.
  std::size_t ps_skipped = 0;
  std::size_t rw_skipped = 0;
};

/// Mines every strategy for every positive. Each positive draws from its
/// own stream derived from (seed, pair_id); output order is positive order,
/// then PS, PR, RW. A positive whose PS or RW budget runs out contributes no
/// negatives of that strategy and is counted in the stats. Runs on
/// worker_count() threads.
std::vector<InstructionPathPair> mine_all(const World& world,
                                          const std::vector<InstructionPathPair>& positives,
                                          const MiningConfig& config, MiningStats* stats = nullptr);

}  // namespace pathdisc
