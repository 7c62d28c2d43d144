// pathdisc/synth_world.hpp

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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathdisc/core.hpp"
#include "pathdisc/env_graph.hpp"
#include "pathdisc/io.hpp"
#include "pathdisc/rng.hpp"

namespace pathdisc {

// ---------------------------------------------------------------------------
// Vocabulary

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  /// `tokens[0..3]` must be the reserved "<pad>", "<unk>", "<bos>", "<eos>".
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(int id) const;
  /// Unknown words map to kUnk.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(const std::vector<std::string>& words) const;
  std::string decode(const std::vector<int>& ids) const;

  /// FNV-1a over the newline-joined token list; stored in checkpoints.
  std::uint64_t hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> index_;
};

std::string category_name(std::size_t category);
Vocabulary build_vocabulary(std::size_t categories);
std::string vocabulary_to_json(const Vocabulary& vocab);
Vocabulary parse_vocabulary(std::string_view text, std::string_view source = "<memory>");

// ---------------------------------------------------------------------------
// WorldSpec

struct WorldSpec {
  std::uint64_t seed = 7;
  std::size_t train_envs = 20;
  std::size_t val_seen_envs = 4;  // taken from the train environments
  std::size_t unseen_envs = 6;
  std::size_t min_nodes = 12;
  std::size_t max_nodes = 20;
  std::size_t categories = 16;  // also the base feature dimension
  std::size_t paths_per_train_env = 15;
  std::size_t paths_per_val_env = 10;
  std::size_t instructions_per_path = 3;
  std::size_t augmented_pairs = 10000;
  std::size_t max_instruction_len = 48;
  double grid_spacing_m = 2.2;
  double extra_edge_prob = 0.3;
  /// Per-node feature noise (std).
  double node_noise = 0.1;
  /// Std of the per-environment, per-category appearance offset. Unseen
  /// environments use `unseen_appearance_noise`, which models the visual
  /// domain gap between training and held-out buildings.
  double appearance_noise = 0.2;
  double unseen_appearance_noise = 1.5;
  /// Augmented pool quality is drawn from Uniform[quality_min, quality_max].
  double quality_min = 0.0;
  double quality_max = 1.0;
  /// Fraction of corrupted middle clauses that are dropped rather than
  /// substituted.
  double drop_prob = 0.3;

  friend bool operator==(const WorldSpec&, const WorldSpec&) = default;
};

/// Throws ValidationError for invalid counts/noise or an infeasible layout
/// (fewer than 7 nodes cannot host a 6-edge reference path).
void validate(const WorldSpec& spec);
std::string world_spec_to_json(const WorldSpec& spec);
/// Accepts a partial document; absent fields keep their defaults.
WorldSpec parse_world_spec(std::string_view text, std::string_view source = "<memory>");

// ---------------------------------------------------------------------------
// Environments and perception

enum class EnvSplit { kTrain, kUnseen };

/// One environment. Deterministic in (spec, split, index).
EnvironmentGraph generate_environment(const WorldSpec& spec, EnvSplit split, std::size_t index);

struct World {
  WorldSpec spec;
  std::vector<EnvironmentGraph> train;
  std::vector<EnvironmentGraph> unseen;
  /// env_id -> category of each node. Known to the generator only; the
  /// environment files carry just the perceptual features.
  std::map<std::string, std::vector<std::size_t>, std::less<>> categories;

  const EnvironmentGraph& env(std::string_view env_id) const;
  bool contains(std::string_view env_id) const;
  std::vector<const EnvironmentGraph*> all() const;
};

/// Environments plus their node categories.
World generate_world(const WorldSpec& spec);

/// <dir>/world.json (spec, env split lists, categories) and
/// <dir>/envs/<env_id>.json.
void save_world(const World& world, const std::string& dir);
World load_world(const std::string& dir);

inline constexpr int kOrientationDim = 4;

/// Yaw of the move a->b (radians, counter-clockwise from +x) and its
/// elevation angle.
double heading(const EnvironmentGraph& env, NodeIndex a, NodeIndex b);
double elevation(const EnvironmentGraph& env, NodeIndex a, NodeIndex b);

/// [sin phi, cos phi, sin theta, cos theta] of the move a->b, with phi
/// measured relative to `arrival_heading`.
Eigen::Vector4d orientation_feature(const EnvironmentGraph& env, NodeIndex a, NodeIndex b,
                                    double arrival_heading);

/// Heading the agent faces on arriving at path.nodes[t] (0 at the start).
double arrival_heading(const EnvironmentGraph& env, const std::vector<NodeIndex>& nodes,
                       std::size_t t);

/// m x (D + 4): base feature of each step plus the orientation toward the
/// next node; the final step carries a zero orientation.
Mat perceptual_sequence(const EnvironmentGraph& env, const std::vector<NodeIndex>& nodes);

enum class Turn { kStraight, kLeft, kRight, kAround };
Turn classify_turn(double relative_heading);
const char* turn_word(Turn t);

// ---------------------------------------------------------------------------
// Instructions

enum class InstructionStyle {
  kHuman,      // all verbs, optional "past"
  kAugmented,  // narrow phrasing of a machine speaker
};

struct Clause {
  std::string verb;       // empty for the final "stop" clause
  std::string direction;  // empty for the final clause
  bool past = false;      // "... past the <category>"
  std::size_t category = 0;
  /// Index of the path step this clause was generated from, or -1 when the
  /// clause was corrupted.
  int step = -1;
};

struct Instruction {
  std::vector<int> tokens;
  std::vector<Clause> clauses;
  std::string text;
};

/// Template instruction naming, in order, each path node's category and the
/// turn taken there. Middle clauses are corrupted with probability
/// 1 - quality; the first and last clause always stay faithful.
Instruction generate_instruction(const EnvironmentGraph& env, const Path& path,
                                 const std::vector<std::size_t>& node_categories, double quality,
                                 Rng& rng, const Vocabulary& vocab, std::size_t categories,
                                 InstructionStyle style = InstructionStyle::kHuman,
                                 double drop_prob = 0.3);

/// Number of clauses that faithfully describe some path step.
std::size_t faithful_clauses(const Instruction& instr);

// ---------------------------------------------------------------------------
// Pairs

enum class Provenance { kHumanLike, kAugmented, kNegativePS, kNegativePR, kNegativeRW };
enum class Split { kTrain, kValSeen, kValUnseen };

const char* to_string(Provenance p);
const char* to_string(Split s);
Provenance parse_provenance(std::string_view s);
Split parse_split(std::string_view s);
inline bool is_negative(Provenance p) {
  return p == Provenance::kNegativePS || p == Provenance::kNegativePR ||
         p == Provenance::kNegativeRW;
}

/// An instruction-path pair. The perceptual sequence is derived from
/// (environment, nodes) on demand. Latent quality is deliberately absent;
/// see QualitySidecar.
struct InstructionPathPair {
  std::string pair_id;
  std::string env_id;
  std::vector<NodeIndex> nodes;
  std::vector<int> tokens;
  Provenance provenance = Provenance::kHumanLike;
  Split split = Split::kTrain;

  Path path() const { return Path{env_id, nodes}; }
  friend bool operator==(const InstructionPathPair&, const InstructionPathPair&) = default;
};

/// pair_id -> latent quality of augmented pairs. Evaluation only.
using QualitySidecar = std::map<std::string, double>;

struct Dataset {
  std::vector<InstructionPathPair> train;
  std::vector<InstructionPathPair> val_seen;
  std::vector<InstructionPathPair> val_unseen;
  std::vector<InstructionPathPair> augmented;
};

struct GeneratedData {
  World world;
  Vocabulary vocab;
  Dataset data;
  QualitySidecar evaluation_only;
};

GeneratedData generate_dataset(const WorldSpec& spec);

Mat perceptual_sequence(const World& world, const InstructionPathPair& pair);

/// Checks env membership, node indices, token ids, and adjacency (relaxed
/// PR negatives excepted). Throws ValidationError naming the pair.
void validate_pair(const World& world, const Vocabulary& vocab, const InstructionPathPair& pair);

/// JSONL, one pair per line: {pair_id, env_id, nodes:[ids], tokens:[ids],
/// provenance, split, latent_quality?}.
std::string pairs_to_jsonl(const World& world, const std::vector<InstructionPathPair>& pairs,
                           const QualitySidecar* quality = nullptr);

enum class LoadMode {
  kTraining,    // latent_quality is skipped without being read
  kEvaluation,  // latent_quality is returned in the sidecar
};

std::vector<InstructionPathPair> parse_pairs_jsonl(std::string_view text, const World& world,
                                                   std::string_view source = "<memory>",
                                                   LoadMode mode = LoadMode::kTraining,
                                                   QualitySidecar* quality = nullptr);

// ---------------------------------------------------------------------------
// Dataset statistics

/// One row per provenance present: pairs, tokens, unique_tokens, mean_len,
/// min_len, max_len.
CsvTable dataset_stats(const std::vector<InstructionPathPair>& pairs);

}  // namespace pathdisc
