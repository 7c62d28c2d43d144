// src/synth_world.cpp

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

#include "pathdisc/synth_world.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <set>

#include "json_util.hpp"

namespace pathdisc {

namespace {

using detail::Json;

constexpr const char* kReserved[] = {"<pad>", "<unk>", "<bos>", "<eos>"};
constexpr const char* kVerbs[] = {"walk", "go", "head", "move", "continue"};
constexpr const char* kAugmentedVerbs[] = {"walk", "go"};
constexpr const char* kConnectives[] = {"then", "at", "the", "past", "and", "stop"};
constexpr const char* kCategoryNames[] = {"door",  "hall",  "bed",  "kitchen", "stairs", "sofa",
                                          "table", "window", "bath", "lamp",    "desk",   "plant",
                                          "closet", "rug",   "shelf", "mirror"};
constexpr Turn kTurns[] = {Turn::kStraight, Turn::kLeft, Turn::kRight, Turn::kAround};

// Worst case token count: BOS/EOS, six "verb dir past the cat" clauses, five
// "then", and "and stop at the cat".
constexpr std::size_t kLongestInstruction = 2 + 6 * 5 + 5 + 5;

std::string two_digit(std::size_t i) {
  std::string s = std::to_string(i);
  return s.size() < 2 ? "0" + s : s;
}

std::string env_name(EnvSplit split, std::size_t index) {
  return (split == EnvSplit::kTrain ? "tr" : "un") + two_digit(index);
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

bool has_admissible_path(const EnvironmentGraph& env) {
  for (NodeIndex a = 0; a < env.size(); ++a) {
    for (NodeIndex b = 0; b < env.size(); ++b) {
      if (a != b && is_admissible(env, shortest_path(env, a, b))) return true;
    }
  }
  return false;
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < 4) throw ValidationError("vocabulary: missing reserved tokens");
  for (int i = 0; i < 4; ++i) {
    if (tokens_[i] != kReserved[i]) {
      throw ValidationError("vocabulary: id " + std::to_string(i) + " must be '" + kReserved[i] + "'");
    }
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw ValidationError("vocabulary: empty token at id " + std::to_string(i));
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw ValidationError("vocabulary: duplicate token '" + tokens_[i] + "'");
    }
  }
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ValidationError("vocabulary: token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

int Vocabulary::id(std::string_view token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.find(token) != index_.end(); }

std::vector<int> Vocabulary::encode(const std::vector<std::string>& words) const {
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(id(w));
  return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int i : ids) {
    if (!out.empty()) out += ' ';
    out += token(i);
  }
  return out;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = fnv1a("");
  for (const auto& t : tokens_) {
    h = fnv1a(t, h);
    h = fnv1a("\n", h);
  }
  return h;
}

std::string category_name(std::size_t category) {
  constexpr std::size_t n = std::size(kCategoryNames);
  return category < n ? kCategoryNames[category] : "object" + std::to_string(category);
}

Vocabulary build_vocabulary(std::size_t categories) {
  std::vector<std::string> tokens(std::begin(kReserved), std::end(kReserved));
  tokens.insert(tokens.end(), std::begin(kVerbs), std::end(kVerbs));
  for (Turn t : kTurns) tokens.emplace_back(turn_word(t));
  tokens.insert(tokens.end(), std::begin(kConnectives), std::end(kConnectives));
  for (std::size_t c = 0; c < categories; ++c) tokens.push_back(category_name(c));
  return Vocabulary(std::move(tokens));
}

std::string vocabulary_to_json(const Vocabulary& vocab) {
  Json doc;
  doc["tokens"] = vocab.tokens();
  return doc.dump(1) + "\n";
}

Vocabulary parse_vocabulary(std::string_view text, std::string_view source) {
  using namespace detail;
  const Json doc = parse_json(text, source);
  const std::string root(source);
  reject_unknown(doc, {"tokens"}, root);
  const Json& arr = as_array(field(doc, "tokens", root), root + ": tokens");
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < arr.size(); ++i) tokens.push_back(as_string(arr[i], sub(root + ": tokens", i)));
  return Vocabulary(std::move(tokens));
}

// ---------------------------------------------------------------------------
// WorldSpec

void validate(const WorldSpec& s) {
  auto positive = [](std::size_t v, const char* name) {
    if (v < 1) throw ValidationError(std::string("world spec: ") + name + " must be >= 1");
  };
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string("world spec: ") + name + " must lie in [0, 1]");
  };
  auto scale = [](double v, const char* name) {
    if (!(v >= 0.0 && std::isfinite(v))) {
      throw ValidationError(std::string("world spec: ") + name + " must be a finite non-negative std");
    }
  };
  positive(s.train_envs, "train_envs");
  positive(s.val_seen_envs, "val_seen_envs");
  positive(s.unseen_envs, "unseen_envs");
  positive(s.min_nodes, "min_nodes");
  positive(s.categories, "categories");
  positive(s.paths_per_train_env, "paths_per_train_env");
  positive(s.paths_per_val_env, "paths_per_val_env");
  positive(s.instructions_per_path, "instructions_per_path");
  positive(s.augmented_pairs, "augmented_pairs");
  scale(s.node_noise, "node_noise");
  scale(s.appearance_noise, "appearance_noise");
  scale(s.unseen_appearance_noise, "unseen_appearance_noise");
  unit(s.quality_min, "quality_min");
  unit(s.quality_max, "quality_max");
  unit(s.extra_edge_prob, "extra_edge_prob");
  unit(s.drop_prob, "drop_prob");
  if (s.val_seen_envs > s.train_envs) throw ValidationError("world spec: val_seen_envs exceeds train_envs");
  if (s.max_nodes < s.min_nodes) throw ValidationError("world spec: max_nodes < min_nodes");
  if (s.quality_max < s.quality_min) throw ValidationError("world spec: quality_max < quality_min");
  if (!(s.grid_spacing_m > 0.0)) throw ValidationError("world spec: grid_spacing_m must be positive");
  if (s.min_nodes < 7) {
    throw ValidationError("world spec infeasible: " + std::to_string(s.min_nodes) +
                          " nodes cannot host a 6-edge reference path (need >= 7)");
  }
  if (s.max_instruction_len < kLongestInstruction) {
    throw ValidationError("world spec: max_instruction_len must be >= " +
                          std::to_string(kLongestInstruction));
  }
}

#define PATHDISC_WORLD_SPEC_FIELDS(X)                                                            \
  X(seed) X(train_envs) X(val_seen_envs) X(unseen_envs) X(min_nodes) X(max_nodes) X(categories) \
  X(paths_per_train_env) X(paths_per_val_env) X(instructions_per_path) X(augmented_pairs)       \
  X(max_instruction_len) X(grid_spacing_m) X(extra_edge_prob) X(node_noise)                     \
  X(appearance_noise) X(unseen_appearance_noise) X(quality_min) X(quality_max) X(drop_prob)

std::string world_spec_to_json(const WorldSpec& spec) {
  Json doc;
#define X(name) doc[#name] = spec.name;
  PATHDISC_WORLD_SPEC_FIELDS(X)
#undef X
  return doc.dump(1) + "\n";
}


WorldSpec parse_world_spec(std::string_view text, std::string_view source) {
  const Json doc = detail::parse_json(text, source);
  const std::string root(source);
  detail::reject_unknown(doc,
                         {
#define X(name) #name,
                             PATHDISC_WORLD_SPEC_FIELDS(X)
#undef X
                         },
                         root);
  WorldSpec spec;
#define X(name) detail::read_field(doc, #name, spec.name, root);
  PATHDISC_WORLD_SPEC_FIELDS(X)
#undef X
  validate(spec);
  return spec;
}

// ---------------------------------------------------------------------------
// Environments

namespace {

struct GeneratedEnv {
  EnvironmentGraph graph;
  std::vector<std::size_t> categories;
};

GeneratedEnv build_environment(const WorldSpec& spec, EnvSplit split, std::size_t index) {
  Rng rng(derive_seed(spec.seed, split == EnvSplit::kTrain ? "env-train" : "env-unseen", index));
  const std::size_t n = spec.min_nodes + rng.index(spec.max_nodes - spec.min_nodes + 1);
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const std::size_t d = spec.categories;
  const double spacing = spec.grid_spacing_m;
  const double appearance =
      split == EnvSplit::kTrain ? spec.appearance_noise : spec.unseen_appearance_noise;

  Mat offsets(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < offsets.size(); ++i) offsets.data()[i] = appearance * rng.normal();

  std::vector<GraphNode> nodes(n);
  std::vector<std::size_t> cats(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i % cols) * spacing + rng.uniform(-0.2, 0.2) * spacing;
    const double y = static_cast<double>(i / cols) * spacing + rng.uniform(-0.2, 0.2) * spacing;
    const double z = rng.uniform(-0.1, 0.1);
    cats[i] = rng.index(d);
    Vec f = offsets.row(static_cast<Eigen::Index>(cats[i])).transpose();
    f(static_cast<Eigen::Index>(cats[i])) += 1.0;
    for (Eigen::Index k = 0; k < f.size(); ++k) f(k) += spec.node_noise * rng.normal();
    nodes[i] = GraphNode{"n" + two_digit(i), Eigen::Vector3d(x, y, z), std::move(f)};
  }

  // Lattice candidates; a random spanning tree keeps the graph connected and
  // the remaining candidates are kept with extra_edge_prob.
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if ((i % cols) + 1 < cols && i + 1 < n) candidates.emplace_back(i, i + 1);
    if (i + cols < n) candidates.emplace_back(i, i + cols);
  }
  rng.shuffle(candidates);
  UnionFind uf(n);
  std::vector<std::pair<std::size_t, std::size_t>> chosen;
  std::vector<std::pair<std::size_t, std::size_t>> rest;
  for (const auto& c : candidates) {
    if (uf.unite(c.first, c.second)) {
      chosen.push_back(c);
    } else {
      rest.push_back(c);
    }
  }
  for (const auto& c : rest) {
    if (rng.uniform() < spec.extra_edge_prob) chosen.push_back(c);
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<GraphEdge> edges;
  for (const auto& [a, b] : chosen) edges.push_back({nodes[a].id, nodes[b].id, std::nullopt});

  GeneratedEnv out{EnvironmentGraph(env_name(split, index), std::move(nodes), std::move(edges)),
                   std::move(cats)};
  if (!has_admissible_path(out.graph)) {
    throw ValidationError("world spec infeasible: environment '" + out.graph.id() +
                          "' has no admissible reference path");
  }
  return out;
}

}  // namespace

EnvironmentGraph generate_environment(const WorldSpec& spec, EnvSplit split, std::size_t index) {
  validate(spec);
  return build_environment(spec, split, index).graph;
}

const EnvironmentGraph& World::env(std::string_view env_id) const {
  for (const auto* list : {&train, &unseen}) {
    for (const auto& e : *list) {
      if (e.id() == env_id) return e;
    }
  }
  throw ValidationError("unknown environment '" + std::string(env_id) + "'");
}

bool World::contains(std::string_view env_id) const {
  for (const auto* list : {&train, &unseen}) {
    for (const auto& e : *list) {
      if (e.id() == env_id) return true;
    }
  }
  return false;
}

std::vector<const EnvironmentGraph*> World::all() const {
  std::vector<const EnvironmentGraph*> out;
  for (const auto& e : train) out.push_back(&e);
  for (const auto& e : unseen) out.push_back(&e);
  return out;
}

World generate_world(const WorldSpec& spec) {
  validate(spec);
  World w{spec, {}, {}, {}};
  for (std::size_t i = 0; i < spec.train_envs; ++i) {
    GeneratedEnv g = build_environment(spec, EnvSplit::kTrain, i);
    w.categories[g.graph.id()] = std::move(g.categories);
    w.train.push_back(std::move(g.graph));
  }
  for (std::size_t i = 0; i < spec.unseen_envs; ++i) {
    GeneratedEnv g = build_environment(spec, EnvSplit::kUnseen, i);
    w.categories[g.graph.id()] = std::move(g.categories);
    w.unseen.push_back(std::move(g.graph));
  }
  return w;
}

void save_world(const World& world, const std::string& dir) {
  Json doc;
  doc["spec"] = Json::parse(world_spec_to_json(world.spec));
  doc["train"] = Json::array();
  doc["unseen"] = Json::array();
  for (const auto& e : world.train) doc["train"].push_back(e.id());
  for (const auto& e : world.unseen) doc["unseen"].push_back(e.id());
  doc["categories"] = Json::object();
  for (const auto& [id, cats] : world.categories) doc["categories"][id] = cats;
  for (const EnvironmentGraph* e : world.all()) {
    save_environment(*e, (std::filesystem::path(dir) / "envs" / (e->id() + ".json")).string());
  }
  write_file_atomic((std::filesystem::path(dir) / "world.json").string(), doc.dump(1) + "\n");
}

World load_world(const std::string& dir) {
  using namespace detail;
  const std::string file = (std::filesystem::path(dir) / "world.json").string();
  const Json doc = parse_json(read_file(file), file);
  reject_unknown(doc, {"spec", "train", "unseen", "categories"}, file);
  World w;
  w.spec = parse_world_spec(field(doc, "spec", file).dump(), file + ": spec");
  auto load_list = [&](const char* key, std::vector<EnvironmentGraph>& out) {
    const Json& ids = as_array(field(doc, key, file), file + ": " + key);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::string id = as_string(ids[i], sub(file + ": " + key, i));
      EnvironmentGraph g = load_environment((std::filesystem::path(dir) / "envs" / (id + ".json")).string());
      if (g.id() != id) throw ValidationError(file + ": environment file for '" + id + "' has env_id '" + g.id() + "'");
      out.push_back(std::move(g));
    }
  };
  load_list("train", w.train);
  load_list("unseen", w.unseen);
  if (doc.contains("categories")) {
    const Json& cats = doc["categories"];
    expect_object(cats, file + ": categories");
    for (const auto& [id, arr] : cats.items()) {
      const std::string where = file + ": categories." + id;
      const EnvironmentGraph& env = w.env(id);
      as_array(arr, where);
      if (arr.size() != env.size()) throw DimensionError(where + ": expected one entry per node");
      std::vector<std::size_t> c;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const long long v = as_int(arr[i], sub(where, i));
        if (v < 0 || static_cast<std::size_t>(v) >= w.spec.categories) {
          throw ValidationError(sub(where, i) + ": category out of range");
        }
        c.push_back(static_cast<std::size_t>(v));
      }
      w.categories[id] = std::move(c);
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Perception

double heading(const EnvironmentGraph& env, NodeIndex a, NodeIndex b) {
  const Eigen::Vector3d d = env.node(b).position - env.node(a).position;
  return std::atan2(d.y(), d.x());
}

double elevation(const EnvironmentGraph& env, NodeIndex a, NodeIndex b) {
  const Eigen::Vector3d d = env.node(b).position - env.node(a).position;
  return std::atan2(d.z(), std::hypot(d.x(), d.y()));
}

Eigen::Vector4d orientation_feature(const EnvironmentGraph& env, NodeIndex a, NodeIndex b,
                                    double arrival) {
  const double phi = heading(env, a, b) - arrival;
  const double theta = elevation(env, a, b);
  return {std::sin(phi), std::cos(phi), std::sin(theta), std::cos(theta)};
}

double arrival_heading(const EnvironmentGraph& env, const std::vector<NodeIndex>& nodes, std::size_t t) {
  return t == 0 ? 0.0 : heading(env, nodes.at(t - 1), nodes.at(t));
}

Mat perceptual_sequence(const EnvironmentGraph& env, const std::vector<NodeIndex>& nodes) {
  const auto d = static_cast<Eigen::Index>(env.feature_dim());
  Mat v = Mat::Zero(static_cast<Eigen::Index>(nodes.size()), d + kOrientationDim);
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    v.row(row).head(d) = env.node(nodes[t]).feature.transpose();
    if (t + 1 < nodes.size()) {
      v.row(row).tail<kOrientationDim>() =
          orientation_feature(env, nodes[t], nodes[t + 1], arrival_heading(env, nodes, t)).transpose();
    }
  }
  return v;
}

Turn classify_turn(double relative_heading) {
  const double a = wrap_angle(relative_heading);
  constexpr double q = std::numbers::pi / 4.0;
  if (std::abs(a) <= q) return Turn::kStraight;
  if (a > q && a <= 3.0 * q) return Turn::kLeft;
  if (a < -q && a >= -3.0 * q) return Turn::kRight;
  return Turn::kAround;
}

const char* turn_word(Turn t) {
  switch (t) {
    case Turn::kStraight: return "straight";
    case Turn::kLeft: return "left";
    case Turn::kRight: return "right";
    case Turn::kAround: return "around";
  }
  return "straight";
}

// ---------------------------------------------------------------------------
// Instructions

Instruction generate_instruction(const EnvironmentGraph& env, const Path& path,
                                 const std::vector<std::size_t>& node_categories, double quality,
                                 Rng& rng, const Vocabulary& vocab, std::size_t categories,
                                 InstructionStyle style, double drop_prob) {
  const std::vector<NodeIndex>& nodes = path.nodes;
  if (nodes.size() < 2) throw ValidationError("generate_instruction: path needs at least 2 nodes");
  if (node_categories.size() != env.size()) {
    throw DimensionError("generate_instruction: expected one category per node of '" + env.id() + "'");
  }
  const bool augmented = style == InstructionStyle::kAugmented;

  std::set<std::size_t> on_path;
  for (NodeIndex n : nodes) on_path.insert(node_categories.at(n));
  std::vector<std::size_t> unrelated;
  for (std::size_t c = 0; c < categories; ++c) {
    if (!on_path.count(c)) unrelated.push_back(c);
  }
  // A machine speaker falls back on a small repertoire of landmarks.
  std::vector<std::size_t> narrow;
  for (std::size_t c : unrelated) {
    if (c < std::max<std::size_t>(1, categories / 4)) narrow.push_back(c);
  }
  const std::vector<std::size_t>& pool = augmented && !narrow.empty() ? narrow : unrelated;

  Instruction out;
  const std::size_t m = nodes.size();
  for (std::size_t t = 0; t + 1 < m; ++t) {
    // Every draw is made unconditionally so that two qualities on the same
    // seed see the same random numbers.
    const std::string verb = augmented ? kAugmentedVerbs[rng.index(std::size(kAugmentedVerbs))]
                                       : kVerbs[rng.index(std::size(kVerbs))];
    const bool past = augmented || rng.uniform() < 0.5;
    const double u = rng.uniform();
    const double a = rng.uniform();
    const double r = rng.uniform();
    const Turn random_turn = kTurns[rng.index(std::size(kTurns))];

    Clause c;
    c.verb = verb;
    c.direction = turn_word(classify_turn(heading(env, nodes[t], nodes[t + 1]) -
                                          arrival_heading(env, nodes, t)));
    c.category = node_categories[nodes[t]];
    c.step = static_cast<int>(t);
    const bool middle = t > 0;
    if (middle && u >= quality) {
      if (a < drop_prob) continue;
      c.direction = turn_word(random_turn);
      if (!pool.empty()) {
        c.category = pool[std::min(pool.size() - 1, static_cast<std::size_t>(r * static_cast<double>(pool.size())))];
      }
      c.step = -1;
    }
    c.past = past;
    out.clauses.push_back(std::move(c));
  }
  out.clauses.push_back(Clause{"", "", false, node_categories[nodes.back()], static_cast<int>(m - 1)});

  std::vector<std::string> words{kReserved[Vocabulary::kBos]};
  for (std::size_t i = 0; i + 1 < out.clauses.size(); ++i) {
    const Clause& c = out.clauses[i];
    if (i > 0) words.emplace_back("then");
    words.push_back(c.verb);
    words.push_back(c.direction);
    if (c.past) words.emplace_back("past");
    words.emplace_back("the");
    words.push_back(category_name(c.category));
  }
  for (const char* w : {"and", "stop", "at", "the"}) words.emplace_back(w);
  words.push_back(category_name(out.clauses.back().category));
  words.emplace_back(kReserved[Vocabulary::kEos]);

  out.tokens = vocab.encode(words);
  out.text = vocab.decode(out.tokens);
  return out;
}

std::size_t faithful_clauses(const Instruction& instr) {
  return static_cast<std::size_t>(std::count_if(instr.clauses.begin(), instr.clauses.end(),
                                                [](const Clause& c) { return c.step >= 0; }));
}

// ---------------------------------------------------------------------------
// Pairs

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kHumanLike: return "human_like";
    case Provenance::kAugmented: return "augmented";
    case Provenance::kNegativePS: return "negative:PS";
    case Provenance::kNegativePR: return "negative:PR";
    case Provenance::kNegativeRW: return "negative:RW";
  }
  return "human_like";
}

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValSeen: return "val_seen";
    case Split::kValUnseen: return "val_unseen";
  }
  return "train";
}

Provenance parse_provenance(std::string_view s) {
  for (Provenance p : {Provenance::kHumanLike, Provenance::kAugmented, Provenance::kNegativePS,
                       Provenance::kNegativePR, Provenance::kNegativeRW}) {
    if (s == to_string(p)) return p;
  }
  throw ValidationError("unknown provenance '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  for (Split x : {Split::kTrain, Split::kValSeen, Split::kValUnseen}) {
    if (s == to_string(x)) return x;
  }
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

namespace {

std::vector<Path> distinct_paths(const EnvironmentGraph& env, Rng& rng, std::size_t count,
                                 std::set<std::vector<NodeIndex>>& taken) {
  std::vector<Path> out;
  const std::size_t budget = 50 * count + 100;
  for (std::size_t t = 0; t < budget && out.size() < count; ++t) {
    Path p = sample_reference_path(env, rng);
    if (taken.insert(p.nodes).second) out.push_back(std::move(p));
  }
  if (out.size() < count) {
    throw BudgetExhausted("environment '" + env.id() + "' yields only " + std::to_string(out.size()) +
                          " distinct reference paths, " + std::to_string(count) + " requested");
  }
  return out;
}

}  // namespace

GeneratedData generate_dataset(const WorldSpec& spec) {
  GeneratedData g{generate_world(spec), build_vocabulary(spec.categories), {}, {}};
  const World& w = g.world;
  const std::uint64_t seed = spec.seed;

  auto emit = [&](const EnvironmentGraph& env, const std::vector<Path>& paths, Split split,
                  const std::string& prefix, Rng& rng, std::vector<InstructionPathPair>& out) {
    const auto& cats = w.categories.at(env.id());
    for (std::size_t p = 0; p < paths.size(); ++p) {
      for (std::size_t j = 0; j < spec.instructions_per_path; ++j) {
        const Instruction ins =
            generate_instruction(env, paths[p], cats, 1.0, rng, g.vocab, spec.categories);
        out.push_back({prefix + env.id() + "-p" + two_digit(p) + "-i" + std::to_string(j), env.id(),
                       paths[p].nodes, ins.tokens, Provenance::kHumanLike, split});
      }
    }
  };

  for (std::size_t i = 0; i < w.train.size(); ++i) {
    const EnvironmentGraph& env = w.train[i];
    Rng path_rng(derive_seed(seed, "train-paths", i));
    Rng instr_rng(derive_seed(seed, "train-instructions", i));
    std::set<std::vector<NodeIndex>> taken;
    emit(env, distinct_paths(env, path_rng, spec.paths_per_train_env, taken), Split::kTrain, "",
         instr_rng, g.data.train);
    if (i < spec.val_seen_envs) {
      Rng vs_path_rng(derive_seed(seed, "val-seen-paths", i));
      Rng vs_instr_rng(derive_seed(seed, "val-seen-instructions", i));
      emit(env, distinct_paths(env, vs_path_rng, spec.paths_per_val_env, taken), Split::kValSeen,
           "vs-", vs_instr_rng, g.data.val_seen);
    }
  }
  for (std::size_t i = 0; i < w.unseen.size(); ++i) {
    const EnvironmentGraph& env = w.unseen[i];
    Rng path_rng(derive_seed(seed, "val-unseen-paths", i));
    Rng instr_rng(derive_seed(seed, "val-unseen-instructions", i));
    std::set<std::vector<NodeIndex>> taken;
    emit(env, distinct_paths(env, path_rng, spec.paths_per_val_env, taken), Split::kValUnseen, "",
         instr_rng, g.data.val_unseen);
  }

  Rng aug_rng(derive_seed(seed, "augmented"));
  const std::size_t width = std::to_string(spec.augmented_pairs).size();
  for (std::size_t k = 0; k < spec.augmented_pairs; ++k) {
    const EnvironmentGraph& env = w.train[aug_rng.index(w.train.size())];
    const Path path = sample_reference_path(env, aug_rng);
    const double q = aug_rng.uniform(spec.quality_min, spec.quality_max);
    Rng instr_rng(derive_seed(seed, "augmented-instruction", k));
    const Instruction ins =
        generate_instruction(env, path, w.categories.at(env.id()), q, instr_rng, g.vocab,
                             spec.categories, InstructionStyle::kAugmented, spec.drop_prob);
    std::string id = std::to_string(k);
    id.insert(0, width - id.size(), '0');
    g.data.augmented.push_back({"aug-" + id, env.id(), path.nodes, ins.tokens, Provenance::kAugmented,
                                Split::kTrain});
    g.evaluation_only["aug-" + id] = q;
  }
  return g;
}

Mat perceptual_sequence(const World& world, const InstructionPathPair& pair) {
  return perceptual_sequence(world.env(pair.env_id), pair.nodes);
}

void validate_pair(const World& world, const Vocabulary& vocab, const InstructionPathPair& pair) {
  const std::string ctx = "pair '" + pair.pair_id + "'";
  if (!world.contains(pair.env_id)) throw ValidationError(ctx + ": unknown environment '" + pair.env_id + "'");
  const EnvironmentGraph& env = world.env(pair.env_id);
  if (pair.nodes.size() < 2) throw ValidationError(ctx + ": path needs at least 2 nodes");
  for (NodeIndex n : pair.nodes) {
    if (n >= env.size()) throw ValidationError(ctx + ": node index out of range");
  }
  if (pair.tokens.empty()) throw ValidationError(ctx + ": empty instruction");
  if (pair.tokens.size() > world.spec.max_instruction_len) {
    throw ValidationError(ctx + ": instruction longer than " + std::to_string(world.spec.max_instruction_len));
  }
  for (int t : pair.tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab.size()) {
      throw ValidationError(ctx + ": token id " + std::to_string(t) + " outside the vocabulary");
    }
  }
  // Relaxed PR negatives reorder percepts without respecting adjacency.
  if (pair.provenance != Provenance::kNegativePR && !is_graph_valid(env, pair.path())) {
    throw ValidationError(ctx + ": consecutive path nodes are not adjacent");
  }
}

std::string pairs_to_jsonl(const World& world, const std::vector<InstructionPathPair>& pairs,
                           const QualitySidecar* quality) {
  std::string out;
  for (const auto& p : pairs) {
    const EnvironmentGraph& env = world.env(p.env_id);
    Json j;
    j["pair_id"] = p.pair_id;
    j["env_id"] = p.env_id;
    j["nodes"] = node_ids(env, p.path());
    j["tokens"] = p.tokens;
    j["provenance"] = to_string(p.provenance);
    j["split"] = to_string(p.split);
    if (quality) {
      const auto it = quality->find(p.pair_id);
      if (it != quality->end()) j["latent_quality"] = it->second;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<InstructionPathPair> parse_pairs_jsonl(std::string_view text, const World& world,
                                                   std::string_view source, LoadMode mode,
                                                   QualitySidecar* quality) {
  using namespace detail;
  std::vector<InstructionPathPair> pairs;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    const Json j = parse_json(line, where);
    reject_unknown(j, {"pair_id", "env_id", "nodes", "tokens", "provenance", "split", "latent_quality"},
                   where);
    InstructionPathPair p;
    p.pair_id = as_string(field(j, "pair_id", where), where + ": pair_id");
    if (!ids.insert(p.pair_id).second) throw ValidationError(where + ": duplicate pair_id '" + p.pair_id + "'");
    p.env_id = as_string(field(j, "env_id", where), where + ": env_id");
    if (!world.contains(p.env_id)) throw ValidationError(where + ": unknown environment '" + p.env_id + "'");
    const EnvironmentGraph& env = world.env(p.env_id);
    const Json& nodes = as_array(field(j, "nodes", where), where + ": nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::string id = as_string(nodes[i], sub(where + ": nodes", i));
      if (!env.contains(id)) {
        throw ValidationError(sub(where + ": nodes", i) + ": unknown node '" + id + "' in '" + p.env_id + "'");
      }
      p.nodes.push_back(env.index_of(id));
    }
    const Json& tokens = as_array(field(j, "tokens", where), where + ": tokens");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      p.tokens.push_back(static_cast<int>(as_int(tokens[i], sub(where + ": tokens", i))));
    }
    p.provenance = parse_provenance(as_string(field(j, "provenance", where), where + ": provenance"));
    p.split = parse_split(as_string(field(j, "split", where), where + ": split"));
    if (mode == LoadMode::kEvaluation && quality && j.contains("latent_quality")) {
      (*quality)[p.pair_id] = as_number(j["latent_quality"], where + ": latent_quality");
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// Statistics

CsvTable dataset_stats(const std::vector<InstructionPathPair>& pairs) {
  CsvTable t;
  t.header = {"provenance", "pairs", "tokens", "unique_tokens", "mean_len", "min_len", "max_len"};
  for (Provenance prov : {Provenance::kHumanLike, Provenance::kAugmented, Provenance::kNegativePS,
                          Provenance::kNegativePR, Provenance::kNegativeRW}) {
    std::size_t count = 0;
    std::size_t total = 0;
    std::size_t lo = std::numeric_limits<std::size_t>::max();
    std::size_t hi = 0;
    std::set<int> unique;
    for (const auto& p : pairs) {
      if (p.provenance != prov) continue;
      ++count;
      total += p.tokens.size();
      lo = std::min(lo, p.tokens.size());
      hi = std::max(hi, p.tokens.size());
      unique.insert(p.tokens.begin(), p.tokens.end());
    }
    if (count == 0) continue;
    t.rows.push_back({to_string(prov), std::to_string(count), std::to_string(total),
                      std::to_string(unique.size()),
                      format_double(static_cast<double>(total) / static_cast<double>(count)),
                      std::to_string(lo), std::to_string(hi)});
  }
  return t;
}

}  // namespace pathdisc
