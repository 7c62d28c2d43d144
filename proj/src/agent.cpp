// src/agent.cpp

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

#include "pathdisc/agent.hpp"

#include <chrono>
#include <cmath>

#include "json_util.hpp"
#include "optim.hpp"
#include "pathdisc/parallel.hpp"

namespace pathdisc {

namespace {

using detail::Json;

constexpr double kHeadInitScale = 0.1;

DiscriminatorConfig encoder_config(const AgentConfig& cfg) {
  DiscriminatorConfig d;
  d.vocab_size = cfg.vocab_size;
  d.feature_dim = cfg.feature_dim;
  d.embed_dim = cfg.embed_dim;
  d.hidden_dim = cfg.hidden_dim;
  d.text_mode = cfg.text_mode;
  d.path_mode = TowerMode::kUnidirectional;
  return d;
}

void validate_impl(const AgentConfig& c, bool require_dims) {
  const std::string w = "agent config: ";
  if (require_dims && (c.vocab_size == 0 || c.feature_dim == 0)) {
    throw ValidationError(w + "vocab_size and feature_dim must be positive");
  }
  if (c.embed_dim == 0 || c.hidden_dim == 0) throw ValidationError(w + "embed_dim and hidden_dim must be positive");
  if (c.horizon == 0) throw ValidationError(w + "horizon must be positive");
  if (c.batch_size == 0) throw ValidationError(w + "batch_size must be positive");
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
    throw ValidationError(w + "learning_rate must be finite and non-negative");
  }
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) throw ValidationError(w + "momentum must be in [0, 1)");
  if (!(c.clip_norm > 0.0)) throw ValidationError(w + "clip_norm must be positive");
}

Mat uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

Mat query_init(const AgentConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, "agent-query"));
  return uniform(static_cast<Eigen::Index>(2 * cfg.state_dim()), static_cast<Eigen::Index>(cfg.embed_dim), rng,
                 kHeadInitScale);
}

void expect_shape(const ParamStore& p, const std::string& name, std::size_t rows, std::size_t cols) {
  const auto it = p.find(name);
  if (it == p.end()) throw DimensionError("agent parameters: missing '" + name + "'");
  if (it->second.rows() != static_cast<Eigen::Index>(rows) || it->second.cols() != static_cast<Eigen::Index>(cols)) {
    throw DimensionError("agent parameters: '" + name + "' is " + shape_str(it->second) + ", expected " +
                         shape_str(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
  }
}

const Var& param(const BoundParams& p, const char* name) { return p.find(name)->second; }

/// The policy unrolled on a tape: instruction states once, then one
/// recurrent step per decision.
struct PolicyGraph {
  const AgentConfig& cfg;
  Tape& tape;
  BoundParams p;
  Var hx;
  ad::LstmState<double> state;

  PolicyGraph(const AgentConfig& c, Tape& t, const ParamStore& params, std::span<const int> tokens, bool grad)
      : cfg(c), tape(t), p(bind_params(t, params, grad)) {
    hx = encode_instruction(encoder_config(cfg), p, tokens);
    const auto o = static_cast<Eigen::Index>(cfg.state_dim());
    state = {tape.leaf(Mat::Zero(1, o)), tape.leaf(Mat::Zero(1, o))};
  }

  /// Logits [1, |actions|].
  Var step(const Mat& previous_action, const ActionSet& actions) {
    const Var& w = param(p, "path.proj.w");
    const Var& b = param(p, "path.proj.b");
    const Var x = affine(tape.leaf(previous_action), w, b);
    state = lstm_cell(x, state, param(p, "policy.cell.wx"), param(p, "policy.cell.wh"), param(p, "policy.cell.b"));
    const Var& h = state.h;
    const Var attention = softmax_rows(transpose(matmul(hx, transpose(h))));  // [1, n]
    const Var context = matmul(attention, hx);                               // [1, O]
    const Var query = matmul(concat_cols(h, context), param(p, "policy.query"));
    const Var candidates = affine(tape.leaf(actions.features), w, b);
    return matmul(query, transpose(candidates));
  }
};

Vec softmax(const Mat& logits) {
  const Vec z = Eigen::Map<const Vec>(logits.data(), logits.size());
  const Vec e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

std::size_t argmax(const Vec& v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<std::size_t>(i);
}

std::size_t sample(const Vec& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(probs.size() - 1);
}

Json config_json(const AgentConfig& c) {
  Json j;
  j["vocab_size"] = c.vocab_size;
  j["feature_dim"] = c.feature_dim;
  j["embed_dim"] = c.embed_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["text_mode"] = to_string(c.text_mode);
  j["horizon"] = c.horizon;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["momentum"] = c.momentum;
  j["clip_norm"] = c.clip_norm;
  j["seed"] = c.seed;
  return j;
}

/// Agents follow positive pairs only; negatives have no reachable goal
/// semantics.
void check_episode(const AgentConfig& cfg, const World& world, const InstructionPathPair& pair) {
  const std::string ctx = "pair '" + pair.pair_id + "'";
  if (!world.contains(pair.env_id)) throw ValidationError(ctx + ": unknown environment '" + pair.env_id + "'");
  if (is_negative(pair.provenance)) throw ValidationError(ctx + ": agents are trained on positive pairs only");
  const EnvironmentGraph& env = world.env(pair.env_id);
  if (pair.nodes.size() < 2) throw ValidationError(ctx + ": path needs at least 2 nodes");
  for (NodeIndex n : pair.nodes) {
    if (n >= env.size()) throw ValidationError(ctx + ": node index out of range");
  }
  if (pair.tokens.empty()) throw ValidationError(ctx + ": empty instruction");
  for (int t : pair.tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= cfg.vocab_size) {
      throw ValidationError(ctx + ": token id " + std::to_string(t) + " outside the vocabulary");
    }
  }
}

/// Policy cell and action scorer. Drawn from their own streams so random and
/// transfer initialization produce the same head.
void init_policy_head(const AgentConfig& cfg, ParamStore& p) {
  Rng cell(derive_seed(cfg.seed, "agent-cell"));
  init_lstm(p, "policy.cell", cfg.embed_dim, cfg.state_dim(), cell);
  p["policy.query"] = query_init(cfg);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration and parameters

void validate(const AgentConfig& cfg) { validate_impl(cfg, true); }

std::string to_json(const AgentConfig& cfg) { return config_json(cfg).dump(1) + "\n"; }

AgentConfig parse_agent_config(std::string_view text, std::string_view source, const AgentConfig& base) {
  const Json doc = detail::parse_json(text, source);
  const std::string root(source);
  detail::reject_unknown(doc,
                         {"vocab_size", "feature_dim", "embed_dim", "hidden_dim", "text_mode", "horizon", "epochs",
                          "batch_size", "learning_rate", "momentum", "clip_norm", "seed"},
                         root);
  AgentConfig c = base;
  detail::read_field(doc, "vocab_size", c.vocab_size, root);
  detail::read_field(doc, "feature_dim", c.feature_dim, root);
  detail::read_field(doc, "embed_dim", c.embed_dim, root);
  detail::read_field(doc, "hidden_dim", c.hidden_dim, root);
  if (const auto it = doc.find("text_mode"); it != doc.end()) {
    c.text_mode = parse_tower_mode(detail::as_string(*it, root + ": text_mode"));
  }
  detail::read_field(doc, "horizon", c.horizon, root);
  detail::read_field(doc, "epochs", c.epochs, root);
  detail::read_field(doc, "batch_size", c.batch_size, root);
  detail::read_field(doc, "learning_rate", c.learning_rate, root);
  detail::read_field(doc, "momentum", c.momentum, root);
  detail::read_field(doc, "clip_norm", c.clip_norm, root);
  detail::read_field(doc, "seed", c.seed, root);
  // Dimensions may be filled in later from the data or a discriminator.
  validate_impl(c, false);
  return c;
}

ParamStore init_agent_random(const AgentConfig& cfg) {
  validate(cfg);
  ParamStore p;
  Rng enc(derive_seed(cfg.seed, "agent-encoder"));
  p["embedding"] = uniform(static_cast<Eigen::Index>(cfg.vocab_size), static_cast<Eigen::Index>(cfg.embed_dim), enc,
                           kInputInitScale);
  init_lstm(p, "instr.fwd", cfg.embed_dim, cfg.hidden_dim, enc);
  if (cfg.text_mode == TowerMode::kBidirectional) init_lstm(p, "instr.bwd", cfg.embed_dim, cfg.hidden_dim, enc);
  p["path.proj.w"] = uniform(static_cast<Eigen::Index>(cfg.feature_dim), static_cast<Eigen::Index>(cfg.embed_dim),
                             enc, kInputInitScale);
  p["path.proj.b"] = uniform(1, static_cast<Eigen::Index>(cfg.embed_dim), enc, kBiasInitScale);
  init_policy_head(cfg, p);
  return p;
}

AgentConfig agent_config_for(const DiscriminatorConfig& disc, const AgentConfig& base) {
  AgentConfig c = base;
  c.vocab_size = disc.vocab_size;
  c.feature_dim = disc.feature_dim;
  c.embed_dim = disc.embed_dim;
  c.hidden_dim = disc.hidden_dim;
  c.text_mode = disc.text_mode;
  return c;
}

ParamStore init_agent_from_discriminator(const AgentConfig& cfg, const LoadedDiscriminator& disc) {
  validate(cfg);
  if (disc.config.path_mode != TowerMode::kUnidirectional) {
    throw ValidationError(
        "cannot warm-start the agent from a discriminator with a bidirectional path tower: the agent consumes "
        "observations one step at a time, so the backward half would be lost; retrain with path_mode "
        "unidirectional");
  }
  const AgentConfig expected = agent_config_for(disc.config, cfg);
  if (!(expected == cfg)) {
    throw DimensionError("agent dimensions differ from the discriminator's (vocab " + std::to_string(cfg.vocab_size) +
                         "/" + std::to_string(disc.config.vocab_size) + ", feature " +
                         std::to_string(cfg.feature_dim) + "/" + std::to_string(disc.config.feature_dim) +
                         ", embed " + std::to_string(cfg.embed_dim) + "/" + std::to_string(disc.config.embed_dim) +
                         ", hidden " + std::to_string(cfg.hidden_dim) + "/" + std::to_string(disc.config.hidden_dim) +
                         ")");
  }
  check_params(disc.config, disc.params);
  // The instruction tower and the visual projection carry over; the path
  // tower's recurrence is discriminator-specific and stays behind.
  ParamStore p;
  for (const auto& [name, m] : disc.params) {
    if (name.rfind("path.fwd.", 0) != 0) p[name] = m;
  }
  init_policy_head(cfg, p);
  check_agent_params(cfg, p);
  return p;
}

void check_agent_params(const AgentConfig& cfg, const ParamStore& params) {
  validate(cfg);
  const std::size_t e = cfg.embed_dim, h = cfg.hidden_dim, o = cfg.state_dim();
  std::size_t expected = 3 + 3 + 3 + 1;
  expect_shape(params, "embedding", cfg.vocab_size, e);
  for (const char* prefix : {"instr.fwd", "instr.bwd"}) {
    if (std::string(prefix) == "instr.bwd") {
      if (cfg.text_mode != TowerMode::kBidirectional) continue;
      expected += 3;
    }
    expect_shape(params, std::string(prefix) + ".wx", e, 4 * h);
    expect_shape(params, std::string(prefix) + ".wh", h, 4 * h);
    expect_shape(params, std::string(prefix) + ".b", 1, 4 * h);
  }
  expect_shape(params, "path.proj.w", cfg.feature_dim, e);
  expect_shape(params, "path.proj.b", 1, e);
  expect_shape(params, "policy.cell.wx", e, 4 * o);
  expect_shape(params, "policy.cell.wh", o, 4 * o);
  expect_shape(params, "policy.cell.b", 1, 4 * o);
  expect_shape(params, "policy.query", 2 * o, e);
  if (params.size() != expected) {
    throw DimensionError("agent parameters: expected " + std::to_string(expected) + " arrays, got " +
                         std::to_string(params.size()));
  }
}

// ---------------------------------------------------------------------------
// Actions and policy

ActionSet action_set(const EnvironmentGraph& env, NodeIndex current, double arrival_heading) {
  const auto d = static_cast<Eigen::Index>(env.feature_dim());
  const auto& nbs = env.neighbors(current);
  ActionSet a;
  a.targets.push_back(current);
  a.features = Mat::Zero(static_cast<Eigen::Index>(nbs.size() + 1), d + 4);
  for (std::size_t k = 0; k < nbs.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k + 1);
    a.targets.push_back(nbs[k].node);
    a.features.row(row).head(d) = env.node(nbs[k].node).feature.transpose();
    a.features.row(row).tail(4) = orientation_feature(env, current, nbs[k].node, arrival_heading).transpose();
  }
  return a;
}

Mat previous_action_feature(const EnvironmentGraph& env, NodeIndex from, NodeIndex to, double arrival_heading) {
  const auto d = static_cast<Eigen::Index>(env.feature_dim());
  Mat f = Mat::Zero(1, d + 4);
  f.row(0).head(d) = env.node(to).feature.transpose();
  if (from != to) f.row(0).tail(4) = orientation_feature(env, from, to, arrival_heading).transpose();
  return f;
}

std::size_t supervision_label(const EnvironmentGraph& env, const ActionSet& actions, NodeIndex current,
                              NodeIndex goal) {
  if (current == goal) return 0;
  const NodeIndex hop = next_hop(env, current, goal);
  for (std::size_t k = 1; k < actions.targets.size(); ++k) {
    if (actions.targets[k] == hop) return k;
  }
  throw ValidationError("supervision: next hop is not a candidate action");
}

struct AgentPolicy::Impl {
  Tape tape;
  PolicyGraph graph;
  Impl(const AgentConfig& cfg, const ParamStore& params, std::span<const int> tokens)
      : graph(cfg, tape, params, tokens, false) {}
};

AgentPolicy::AgentPolicy(const AgentConfig& cfg, const ParamStore& params, std::span<const int> tokens)
    : impl_(std::make_unique<Impl>(cfg, params, tokens)) {}
AgentPolicy::~AgentPolicy() = default;
AgentPolicy::AgentPolicy(AgentPolicy&&) noexcept = default;

Vec AgentPolicy::step(const Mat& previous_action, const ActionSet& actions) {
  return softmax(impl_->graph.step(previous_action, actions).value());
}

// ---------------------------------------------------------------------------
// Training

double episode_loss(const AgentConfig& cfg, const ParamStore& params, const World& world,
                    const InstructionPathPair& pair, std::uint64_t rng_seed, ParamStore* gradient, bool* success) {
  const EnvironmentGraph& env = world.env(pair.env_id);
  Tape tape;
  PolicyGraph g(cfg, tape, params, pair.tokens, gradient != nullptr);
  Rng rng(rng_seed);
  const NodeIndex goal = pair.nodes.back();
  NodeIndex current = pair.nodes.front();
  double arrival = 0.0;
  Mat prev = previous_action_feature(env, current, current, arrival);
  Var total = tape.leaf(Mat::Zero(1, 1));
  std::size_t steps = 0;
  for (std::size_t t = 0; t < cfg.horizon; ++t) {
    const ActionSet actions = action_set(env, current, arrival);
    const Var logits = g.step(prev, actions);
    const std::size_t label = supervision_label(env, actions, current, goal);
    total = add(total, softmax_cross_entropy(logits, static_cast<Eigen::Index>(label)));
    ++steps;
    const std::size_t a = sample(softmax(logits.value()), rng);
    if (a == 0) break;
    const NodeIndex next = actions.targets[a];
    prev = actions.features.row(static_cast<Eigen::Index>(a));
    arrival = heading(env, current, next);
    current = next;
  }
  const Var loss = scale(total, 1.0 / static_cast<double>(steps));
  if (success) *success = geodesic(env, current, goal) < MetricConfig{}.success_threshold_m;
  if (gradient) {
    tape.backward(loss);
    gradient->clear();
    for (const auto& [name, v] : g.p) gradient->emplace(name, v.grad());
  }
  return loss.item();
}

AgentTrainResult train_student_forcing(const AgentConfig& cfg, ParamStore params, const World& world,
                                       std::span<const InstructionPathPair> pairs) {
  check_agent_params(cfg, params);
  if (pairs.empty()) throw ValidationError("train_student_forcing: no training pairs");
  for (const auto& p : pairs) check_episode(cfg, world, p);
  AgentTrainResult out;
  ParamStore velocity;
  for (const auto& [name, m] : params) velocity.emplace(name, Mat::Zero(m.rows(), m.cols()));
  Rng shuffle(derive_seed(cfg.seed, "agent-shuffle"));
  std::vector<std::size_t> order(pairs.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle.shuffle(order);
    double loss_sum = 0.0;
    std::size_t successes = 0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const std::size_t n = std::min(order.size(), start + cfg.batch_size) - start;
      std::vector<double> losses(n);
      std::vector<char> ok(n);
      std::vector<std::vector<Mat>> grads(n);
      parallel_for(n, [&](std::size_t k) {
        const InstructionPathPair& pair = pairs[order[start + k]];
        ParamStore g;
        bool s = false;
        losses[k] = episode_loss(cfg, params, world, pair, derive_seed(cfg.seed, "rollout:" + pair.pair_id, epoch), &g,
                                 &s);
        ok[k] = s;
        grads[k].reserve(g.size());
        for (auto& [name, m] : g) grads[k].push_back(std::move(m));
      });
      double batch_loss = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        batch_loss += losses[k];
        successes += ok[k] ? 1 : 0;
      }
      const std::string where = "agent epoch " + std::to_string(epoch) + " batch " + std::to_string(batch);
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("non-finite loss at " + where + " (first pair '" + pairs[order[start]].pair_id + "')");
      }
      loss_sum += batch_loss;
      std::vector<Mat> g = detail::mean_of(grads);
      detail::momentum_step(params, velocity, g, cfg.learning_rate, cfg.momentum, cfg.clip_norm, where);
    }
    AgentEpochRow row;
    row.epoch = epoch;
    row.episodes = pairs.size();
    row.loss = loss_sum / static_cast<double>(pairs.size());
    row.train_sr = static_cast<double>(successes) / static_cast<double>(pairs.size());
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.report.push_back(row);
  }
  out.params = std::move(params);
  return out;
}

CsvTable agent_report_table(std::span<const AgentEpochRow> rows) {
  CsvTable t;
  t.header = {"epoch", "episodes", "loss", "train_sr"};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.epoch), std::to_string(r.episodes), format_double(r.loss),
                      format_double(r.train_sr)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

class GreedyAgent : public EpisodePolicy {
 public:
  GreedyAgent(const AgentConfig& cfg, const ParamStore& params, std::span<const int> tokens)
      : policy_(cfg, params, tokens) {}
  std::size_t choose(const StepView& v) override { return argmax(policy_.step(v.previous_action, v.actions)); }

 private:
  AgentPolicy policy_;
};

class Oracle : public EpisodePolicy {
 public:
  std::size_t choose(const StepView& v) override {
    return supervision_label(v.env, v.actions, v.current, v.pair.nodes.back());
  }
};

class RandomWalk : public EpisodePolicy {
 public:
  explicit RandomWalk(std::uint64_t seed) : rng_(seed) {}
  std::size_t choose(const StepView& v) override { return rng_.index(v.actions.targets.size()); }

 private:
  Rng rng_;
};

}  // namespace

PolicyFactory greedy_agent(const AgentConfig& cfg, const ParamStore& params) {
  check_agent_params(cfg, params);
  return [cfg, &params](const InstructionPathPair& pair, std::size_t) -> std::unique_ptr<EpisodePolicy> {
    return std::make_unique<GreedyAgent>(cfg, params, pair.tokens);
  };
}

PolicyFactory oracle_policy() {
  return [](const InstructionPathPair&, std::size_t) -> std::unique_ptr<EpisodePolicy> {
    return std::make_unique<Oracle>();
  };
}

PolicyFactory random_policy(std::uint64_t seed) {
  return [seed](const InstructionPathPair& pair, std::size_t) -> std::unique_ptr<EpisodePolicy> {
    return std::make_unique<RandomWalk>(derive_seed(seed, "random-walk:" + pair.pair_id));
  };
}

Path rollout(const World& world, const InstructionPathPair& pair, EpisodePolicy& policy, std::size_t horizon) {
  const EnvironmentGraph& env = world.env(pair.env_id);
  Path path{pair.env_id, {pair.nodes.front()}};
  NodeIndex current = pair.nodes.front();
  double arrival = 0.0;
  Mat prev = previous_action_feature(env, current, current, arrival);
  for (std::size_t t = 0; t < horizon; ++t) {
    const ActionSet actions = action_set(env, current, arrival);
    const std::size_t a = policy.choose(StepView{env, pair, current, t, actions, prev});
    if (a >= actions.targets.size()) throw ValidationError("policy chose action " + std::to_string(a) + " of " +
                                                           std::to_string(actions.targets.size()));
    if (a == 0) break;
    const NodeIndex next = actions.targets[a];
    prev = actions.features.row(static_cast<Eigen::Index>(a));
    arrival = heading(env, current, next);
    current = next;
    path.nodes.push_back(current);
  }
  return path;
}

EvaluationResult evaluate_policy(const World& world, std::span<const InstructionPathPair> pairs,
                                 const PolicyFactory& factory, std::size_t horizon, const MetricConfig& metrics) {
  validate(metrics);
  EvaluationResult r;
  r.episodes.resize(pairs.size());
  r.predictions.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto policy = factory(pairs[i], i);
    r.predictions[i] = rollout(world, pairs[i], *policy, horizon);
    r.episodes[i] = nav_metrics(world.env(pairs[i].env_id), pairs[i].path(), r.predictions[i], metrics);
  });
  r.mean = mean_metrics(r.episodes);
  return r;
}

// ---------------------------------------------------------------------------
// Checkpoints

Checkpoint agent_checkpoint(const AgentConfig& cfg, const ParamStore& params, std::uint64_t vocab_hash) {
  check_agent_params(cfg, params);
  Checkpoint ck;
  ck.kind = std::string(kAgentKind);
  ck.config = config_json(cfg).dump();
  ck.vocab_hash = vocab_hash;
  ck.arrays = params;
  return ck;
}

LoadedAgent load_agent(const Checkpoint& ckpt, std::uint64_t vocab_hash, std::string_view source) {
  expect_checkpoint(ckpt, kAgentKind, vocab_hash, source);
  LoadedAgent out;
  out.config = parse_agent_config(ckpt.config, std::string(source) + ": config");
  out.params = ckpt.arrays;
  check_agent_params(out.config, out.params);
  return out;
}

}  // namespace pathdisc
