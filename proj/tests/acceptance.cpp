// tests/acceptance.cpp

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

// Acceptance run: one PASS/FAIL line per criterion on the committed benchmark.
// Usage: acceptance [benchmark_world.json] [criterion numbers...]

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cli.hpp"
#include "pathdisc/agent.hpp"
#include "pathdisc/autodiff.hpp"
#include "pathdisc/filter.hpp"
#include "pathdisc/io.hpp"
#include "pathdisc/metrics.hpp"
#include "pathdisc/negative_miner.hpp"
#include "pathdisc/trainer.hpp"

#ifndef PATHDISC_BENCHMARK_SPEC
#define PATHDISC_BENCHMARK_SPEC "tests/data/benchmark_world.json"
#endif

using namespace pathdisc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::string sci(double v) {
  std::ostringstream ss;
  ss << std::scientific << std::setprecision(2) << v;
  return ss.str();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Shared benchmark state, built lazily

struct Bench {
  GeneratedData gen;
  TrainingData data;
  std::size_t negatives = 0;
  DiscriminatorConfig cfg;
  std::map<std::string, ParamStore> models;  // cur, ps, prrw, all
  std::map<std::string, ValidationAuc> val;
};

WorldSpec benchmark_spec(const std::string& file) {
  const auto doc = nlohmann::json::parse(read_file(file));
  return parse_world_spec(doc.at("world").dump(), file);
}

Bench& bench(const std::string& spec_file) {
  static std::unique_ptr<Bench> b;
  if (b) return *b;
  b.reset(new Bench{generate_dataset(benchmark_spec(spec_file)), {}, 0, {}, {}, {}});
  const Dataset& d = b->gen.data;
  std::vector<InstructionPathPair> pairs = d.train;
  pairs.insert(pairs.end(), d.val_seen.begin(), d.val_seen.end());
  pairs.insert(pairs.end(), d.val_unseen.begin(), d.val_unseen.end());
  const std::vector<InstructionPathPair> negatives = mine_all(b->gen.world, pairs, MiningConfig{});
  b->negatives = negatives.size();
  pairs.insert(pairs.end(), negatives.begin(), negatives.end());
  b->data = make_training_data(b->gen.world, pairs);
  b->cfg.vocab_size = b->gen.vocab.size();
  b->cfg.feature_dim = static_cast<std::size_t>(b->data.train_positives.front().percepts.cols());
  return *b;
}

ParamStore train_disc(const DiscriminatorConfig& cfg, const TrainingData& data,
                      std::vector<CurriculumStage> stages, ValidationAuc* val) {
  TrainConfig tcfg;
  tcfg.stages = std::move(stages);
  TrainState st = init_train_state(cfg, tcfg);
  curriculum_train(st, cfg, data, tcfg);
  if (val) *val = validation_auc(cfg, st.params, data);
  return std::move(st.params);
}

// ---------------------------------------------------------------------------
// 1. Numerical core

template <typename LossFn>
double worst_gradient_error(ParamStore& params, const ParamStore& grad, LossFn loss) {
  const double h = 1e-6;
  double worst = 0.0;
  for (auto& [name, m] : params) {
    const Mat& g = grad.at(name);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double saved = m.data()[i];
      m.data()[i] = saved + h;
      const double up = loss();
      m.data()[i] = saved - h;
      const double down = loss();
      m.data()[i] = saved;
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(fd - g.data()[i]) / std::max(1.0, std::abs(fd) + std::abs(g.data()[i])));
    }
  }
  return worst;
}

Outcome criterion1() {
  double disc_err = 0.0;
  Rng rng(101);
  for (TowerMode text : {TowerMode::kBidirectional, TowerMode::kUnidirectional}) {
    for (TowerMode path : {TowerMode::kBidirectional, TowerMode::kUnidirectional}) {
      DiscriminatorConfig cfg;
      cfg.vocab_size = 7;
      cfg.feature_dim = 5;
      cfg.embed_dim = 3;
      cfg.hidden_dim = 4;
      cfg.text_mode = text;
      cfg.path_mode = path;
      Rng init(rng.next_u64());
      ParamStore params = init_discriminator(cfg, init);
      std::vector<ScoringInput> batch;
      for (int k = 0; k < 4; ++k) {
        ScoringInput in;
        in.pair_id = in.source_id = "p" + std::to_string(k);
        const std::size_t n = 2 + rng.index(4), m = 2 + rng.index(3);
        for (std::size_t t = 0; t < n; ++t) in.tokens.push_back(static_cast<int>(rng.index(cfg.vocab_size)));
        in.percepts = Mat(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(cfg.feature_dim));
        for (Eigen::Index i = 0; i < in.percepts.size(); ++i) in.percepts.data()[i] = rng.uniform(-1.0, 1.0);
        in.provenance = k % 2 ? Provenance::kNegativePR : Provenance::kHumanLike;
        batch.push_back(std::move(in));
      }
      const LossGradient lg = loss_and_gradient(cfg, params, batch);
      disc_err = std::max(disc_err, worst_gradient_error(params, lg.gradient,
                                                         [&] { return compute_loss(cfg, params, batch); }));
    }
  }

  WorldSpec spec;
  spec.seed = 5;
  spec.train_envs = 2;
  spec.val_seen_envs = 1;
  spec.unseen_envs = 1;
  spec.paths_per_train_env = 2;
  spec.paths_per_val_env = 1;
  spec.instructions_per_path = 1;
  spec.augmented_pairs = 1;
  const GeneratedData g = generate_dataset(spec);
  double agent_err = 0.0;
  for (TowerMode text : {TowerMode::kBidirectional, TowerMode::kUnidirectional}) {
    AgentConfig cfg;
    cfg.vocab_size = g.vocab.size();
    cfg.feature_dim = g.world.train.front().feature_dim() + kOrientationDim;
    cfg.embed_dim = 3;
    cfg.hidden_dim = 3;
    cfg.text_mode = text;
    ParamStore params = init_agent_random(cfg);
    const InstructionPathPair& pair = g.data.train.front();
    ParamStore grad;
    episode_loss(cfg, params, g.world, pair, 17, &grad);
    agent_err = std::max(agent_err, worst_gradient_error(params, grad, [&] {
                           return episode_loss(cfg, params, g.world, pair, 17);
                         }));
  }

  double norm_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double scale = trial % 4 == 0 ? 700.0 : 5.0;
    Mat a(1 + static_cast<Eigen::Index>(rng.index(6)), 1 + static_cast<Eigen::Index>(rng.index(6)));
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-scale, scale);
    Tape t;
    const Var rows = ad::softmax_rows(t.leaf(a));
    for (Eigen::Index r = 0; r < a.rows(); ++r) norm_err = std::max(norm_err, std::abs(rows.value().row(r).sum() - 1.0));
    const Mat col = a.col(0);
    const Var w = ad::softmin_vec(t.leaf(col));
    norm_err = std::max(norm_err, std::abs(w.value().sum() - 1.0));
  }
  const bool pass = disc_err <= 1e-4 && agent_err <= 1e-4 && norm_err <= 1e-12;
  return {pass, "discriminator grad err " + sci(disc_err) + ", agent grad err " + sci(agent_err) +
                    ", normalization err " + sci(norm_err)};
}

// ---------------------------------------------------------------------------
// 2. Alignment-score algebra

double pooled(const Mat& a) {
  Tape t;
  return alignment_pooling(t.leaf(a)).raw_score.item();
}

Outcome criterion2() {
  Rng rng(202);
  double shift_err = 0.0, perm_err = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 1 + static_cast<Eigen::Index>(rng.index(8));
    const auto m = 1 + static_cast<Eigen::Index>(rng.index(8));
    Mat a(n, m);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-3.0, 3.0);
    const double base = pooled(a);
    const double delta = rng.uniform(-10.0, 10.0);
    shift_err = std::max(shift_err, std::abs(pooled(a.array() + delta) - (base + delta)));

    std::vector<Eigen::Index> rp(static_cast<std::size_t>(n)), cp(static_cast<std::size_t>(m));
    std::iota(rp.begin(), rp.end(), 0);
    std::iota(cp.begin(), cp.end(), 0);
    rng.shuffle(rp);
    rng.shuffle(cp);
    Mat p(n, m);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) p(r, c) = a(rp[static_cast<std::size_t>(r)], cp[static_cast<std::size_t>(c)]);
    }
    perm_err = std::max(perm_err, std::abs(pooled(p) - base));
  }
  const double x = 0.731;
  const bool one = pooled(Mat::Constant(1, 1, x)) == x;
  const bool zero = pooled(Mat::Zero(4, 6)) == 0.0;
  const bool pass = shift_err <= 1e-10 && perm_err <= 1e-12 && one && zero;
  return {pass, "shift err " + sci(shift_err) + ", permutation err " + sci(perm_err) +
                    ", 1x1 exact " + (one ? "yes" : "no") + ", zero exact " + (zero ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 3. AUC oracle equivalence

double brute_force_auc(const std::vector<ScoredLabel>& s) {
  double num_ = 0, den = 0;
  for (const auto& p : s) {
    if (!p.positive) continue;
    for (const auto& q : s) {
      if (q.positive) continue;
      den += 1;
      if (p.score > q.score) num_ += 1;
      else if (p.score == q.score) num_ += 0.5;
    }
  }
  return num_ / den;
}

Outcome criterion3() {
  Rng rng(303);
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.index(199);
    const std::size_t levels = 1 + rng.index(n);  // few levels force ties
    std::vector<ScoredLabel> s(n);
    for (auto& x : s) {
      x.score = static_cast<double>(rng.index(levels)) / static_cast<double>(levels);
      x.positive = rng.uniform() < 0.5;
    }
    s[0].positive = true;
    s[1].positive = false;
    if (auc(s) != brute_force_auc(s)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 500 instances"};
}

// ---------------------------------------------------------------------------
// 4. Metric unit suite

Outcome criterion4() {
  // a - b - c - d - e on a line, 2 m apart.
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  for (int i = 0; i < 5; ++i) {
    GraphNode n;
    n.id = std::string(1, static_cast<char>('a' + i));
    n.position = Eigen::Vector3d(2.0 * i, 0, 0);
    n.feature = Vec::Zero(1);
    nodes.push_back(n);
    if (i) edges.push_back({std::string(1, static_cast<char>('a' + i - 1)), n.id, std::nullopt});
  }
  const EnvironmentGraph line("line", std::move(nodes), std::move(edges));
  const Path ref{"line", {0, 1, 2, 3}};
  bool hand = true;
  NavMetrics m = nav_metrics(line, ref, ref);
  hand &= m.pl == 6.0 && m.ne == 0.0 && m.sr == 1.0 && m.spl == 1.0;
  m = nav_metrics(line, ref, Path{"line", {0, 1, 2, 3, 4}});
  hand &= m.pl == 8.0 && m.ne == 2.0 && m.sr == 1.0 && m.spl == 0.75;
  m = nav_metrics(line, ref, Path{"line", {0}});
  hand &= m.pl == 0.0 && m.ne == 6.0 && m.sr == 0.0 && m.spl == 0.0;
  m = nav_metrics(line, ref, Path{"line", {0, 1, 2, 3, 2, 3, 2}});
  hand &= m.pl == 12.0 && m.ne == 2.0 && m.sr == 1.0 && m.spl == 0.5;
  m = nav_metrics(line, Path{"line", {0, 1}}, Path{"line", {0, 1, 2, 3, 4}});
  hand &= m.pl == 8.0 && m.ne == 6.0 && m.sr == 0.0 && m.spl == 0.0;

  // Random episodes on a 5 x 6 lattice with 1.5 m spacing.
  std::vector<GraphNode> gn;
  std::vector<GraphEdge> ge;
  auto id = [](int r, int c) { return "r" + std::to_string(r) + "c" + std::to_string(c); };
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 6; ++c) {
      GraphNode n;
      n.id = id(r, c);
      n.position = Eigen::Vector3d(1.5 * c, 1.5 * r, 0);
      n.feature = Vec::Zero(1);
      gn.push_back(n);
      if (c + 1 < 6) ge.push_back({id(r, c), id(r, c + 1), std::nullopt});
      if (r + 1 < 5) ge.push_back({id(r, c), id(r + 1, c), std::nullopt});
    }
  }
  const EnvironmentGraph grid("grid", std::move(gn), std::move(ge));
  Rng rng(404);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const NodeIndex a = rng.index(grid.size()), b = rng.index(grid.size());
    const Path r = shortest_path(grid, a, b);
    Path pred{"grid", {a}};
    const std::size_t steps = rng.index(12);
    for (std::size_t k = 0; k < steps; ++k) {
      const auto& nb = grid.neighbors(pred.nodes.back());
      pred.nodes.push_back(nb[rng.index(nb.size())].node);
    }
    const NavMetrics e = nav_metrics(grid, r, pred);
    if (!(e.spl <= e.sr) || e.spl < 0.0) ++violations;
  }
  return {hand && violations == 0, std::string("hand cases ") + (hand ? "exact" : "WRONG") + ", " +
                                       std::to_string(violations) + " SPL > SR violations over 1000 episodes"};
}

// ---------------------------------------------------------------------------
// 5. Miner contracts

Outcome criterion5(const std::string& spec_file) {
  const GeneratedData g = generate_dataset(benchmark_spec(spec_file));
  std::vector<InstructionPathPair> positives = g.data.train;
  positives.insert(positives.end(), g.data.val_seen.begin(), g.data.val_seen.end());
  positives.insert(positives.end(), g.data.val_unseen.begin(), g.data.val_unseen.end());
  std::map<std::string, const InstructionPathPair*> by_id;
  for (const auto& p : positives) by_id[p.pair_id] = &p;

  MiningConfig mc;
  std::size_t total = 0, ps = 0, pr = 0, rw = 0, bad_ps = 0, bad_pr = 0, bad_rw = 0;
  for (std::uint64_t seed = 1; total < 10000; ++seed) {
    mc.seed = seed;
    for (const auto& n : mine_all(g.world, positives, mc)) {
      ++total;
      const InstructionPathPair& src = *by_id.at(negative_source_id(n.pair_id));
      const EnvironmentGraph& env = g.world.env(n.env_id);
      if (n.env_id != src.env_id || n.tokens != src.tokens) {
        ++(n.provenance == Provenance::kNegativePS ? bad_ps : n.provenance == Provenance::kNegativePR ? bad_pr : bad_rw);
        continue;
      }
      switch (n.provenance) {
        case Provenance::kNegativePS:
          ++ps;
          if (n.nodes == src.nodes || !is_graph_valid(env, n.path())) ++bad_ps;
          break;
        case Provenance::kNegativePR: {
          ++pr;
          std::vector<NodeIndex> a(n.nodes), b(src.nodes);
          std::sort(a.begin(), a.end());
          std::sort(b.begin(), b.end());
          if (n.nodes == src.nodes || n.nodes.front() != src.nodes.front() || n.nodes.back() != src.nodes.back() ||
              a != b) {
            ++bad_pr;
          }
          break;
        }
        case Provenance::kNegativeRW: {
          ++rw;
          const std::set<NodeIndex> distinct(n.nodes.begin(), n.nodes.end());
          const bool anchored_start = n.nodes.front() == src.nodes.front() &&
                                      geodesic(env, n.nodes.back(), src.nodes.back()) >= mc.far_threshold_m;
          const bool anchored_end = n.nodes.back() == src.nodes.back() &&
                                    geodesic(env, n.nodes.front(), src.nodes.front()) >= mc.far_threshold_m;
          if (n.path().edge_count() != src.path().edge_count() || !is_graph_valid(env, n.path()) ||
              distinct.size() != n.nodes.size() || !(anchored_start || anchored_end)) {
            ++bad_rw;
          }
          break;
        }
        default:
          ++bad_ps;
      }
    }
  }
  const bool pass = total >= 10000 && bad_ps + bad_pr + bad_rw == 0 && ps && pr && rw;
  return {pass, std::to_string(total) + " negatives (PS " + std::to_string(ps) + ", PR " + std::to_string(pr) +
                    ", RW " + std::to_string(rw) + "); violations PS " + std::to_string(bad_ps) + ", PR " +
                    std::to_string(bad_pr) + ", RW " + std::to_string(bad_rw)};
}

// ---------------------------------------------------------------------------
// 6. Curriculum ordering

Outcome criterion6(Bench& b) {
  using P = Provenance;
  const std::size_t half = TrainConfig{}.stages.at(0).epochs;
  const std::size_t total = half + TrainConfig{}.stages.at(1).epochs;
  const std::vector<std::pair<std::string, std::vector<CurriculumStage>>> runs{
      {"cur", {{{P::kNegativePS}, half}, {{P::kNegativePR, P::kNegativeRW}, total - half}}},
      {"ps", {{{P::kNegativePS}, total}}},
      {"prrw", {{{P::kNegativePR, P::kNegativeRW}, total}}},
      {"all", {{{P::kNegativePS, P::kNegativePR, P::kNegativeRW}, total}}},
  };
  for (const auto& [name, stages] : runs) {
    ValidationAuc v;
    b.models[name] = train_disc(b.cfg, b.data, stages, &v);
    b.val[name] = v;
  }
  const double cur = b.val["cur"].pr_rw, ps = b.val["ps"].pr_rw, prrw = b.val["prrw"].pr_rw, all = b.val["all"].pr_rw;
  const bool a = cur >= std::max({ps, prrw, all});
  const bool bb = ps < all;
  const bool c = cur >= 0.85;
  return {a && bb && c, "PR+RW val AUC: curriculum " + num(cur) + ", PS-only " + num(ps) + ", PR+RW-only " +
                            num(prrw) + ", all " + num(all) + " (" + std::to_string(b.negatives) +
                            " negatives, " + std::to_string(total) + " epochs each); (a) " + (a ? "ok" : "no") +
                            " (b) " + (bb ? "ok" : "no") + " (c) " + (c ? "ok" : "no")};
}

// ---------------------------------------------------------------------------
// 7. Score ordering across datasets

double mean_probability(const Bench& b, const ParamStore& params, const std::vector<InstructionPathPair>& pairs) {
  const std::vector<ScoringInput> inputs = make_scoring_inputs(b.gen.world, pairs);
  const std::vector<ScoredPair> ranked = rank_pool(b.cfg, params, inputs);
  double s = 0;
  for (const auto& r : ranked) s += r.probability;
  return s / static_cast<double>(ranked.size());
}

Outcome criterion7(const Bench& b) {
  const ParamStore& p = b.models.at("cur");
  const double seen = mean_probability(b, p, b.gen.data.val_seen);
  const double aug = mean_probability(b, p, b.gen.data.augmented);
  const double unseen = mean_probability(b, p, b.gen.data.val_unseen);
  const bool pass = seen - aug >= 0.03 && aug - unseen >= 0.03;
  return {pass, "mean probability val_seen " + num(seen) + " > augmented " + num(aug) + " > val_unseen " +
                    num(unseen) + " (gaps " + num(seen - aug) + ", " + num(aug - unseen) + ")"};
}

// ---------------------------------------------------------------------------
// 8. Quality gap

std::vector<ScoredPair> ranked_augmented(const Bench& b) {
  return rank_pool(b.cfg, b.models.at("cur"), make_scoring_inputs(b.gen.world, b.gen.data.augmented));
}

double mean_quality(const Bench& b, const std::vector<ScoredPair>& chosen) {
  double q = 0;
  for (const auto& c : chosen) q += b.gen.evaluation_only.at(c.pair_id);
  return q / static_cast<double>(chosen.size());
}

Outcome criterion8(const Bench& b) {
  const std::vector<ScoredPair> ranked = ranked_augmented(b);
  const double top = mean_quality(b, select(ranked, Selection::kTop, 0.05, 7));
  const double bottom = mean_quality(b, select(ranked, Selection::kBottom, 0.05, 7));
  return {top - bottom >= 0.2,
          "mean latent quality Top 5% " + num(top) + ", Bottom 5% " + num(bottom) + " (gap " + num(top - bottom) + ")"};
}

// ---------------------------------------------------------------------------
// 9. Filtered training data

AgentConfig agent_config(const Bench& b) {
  AgentConfig cfg;
  cfg.vocab_size = b.gen.vocab.size();
  cfg.feature_dim = b.cfg.feature_dim;
  return cfg;
}

double unseen_sr(const Bench& b, const AgentConfig& cfg, const ParamStore& params) {
  return evaluate_policy(b.gen.world, b.gen.data.val_unseen, greedy_agent(cfg, params), cfg.horizon).mean.sr;
}

// Subsets of 30 to 150 pairs give noisy agents, so each cell averages
// kReplicates selection and training seeds.
constexpr std::uint64_t kReplicates = 5;

Outcome criterion9(const Bench& b) {
  const std::vector<ScoredPair> ranked = ranked_augmented(b);
  std::map<std::string, const InstructionPathPair*> by_id;
  for (const auto& p : b.gen.data.augmented) by_id[p.pair_id] = &p;
  bool top_beats_bottom = true, diversity = false;
  std::string detail;
  for (double f : {0.01, 0.05}) {
    std::map<Selection, double> sr;
    for (Selection s : {Selection::kTop, Selection::kBottom, Selection::kRandomTop}) {
      for (std::uint64_t r = 0; r < kReplicates; ++r) {
        AgentConfig cfg = agent_config(b);
        cfg.seed += r;
        std::vector<InstructionPathPair> pairs;
        for (const auto& c : select(ranked, s, f, cfg.seed)) pairs.push_back(*by_id.at(c.pair_id));
        const AgentTrainResult res = train_student_forcing(cfg, init_agent_random(cfg), b.gen.world, pairs);
        sr[s] += unseen_sr(b, cfg, res.params) / static_cast<double>(kReplicates);
      }
    }
    top_beats_bottom &= sr[Selection::kTop] > sr[Selection::kBottom];
    diversity |= sr[Selection::kRandomTop] >= sr[Selection::kTop] - 0.02;
    detail += (detail.empty() ? "" : "; ") + num(100 * f, 0) + "%: Top " + num(sr[Selection::kTop], 3) +
              ", Bottom " + num(sr[Selection::kBottom], 3) + ", RandomTop " + num(sr[Selection::kRandomTop], 3);
  }
  return {top_beats_bottom && diversity,
          "mean unseen SR over " + std::to_string(kReplicates) + " seeds, " + detail};
}

// ---------------------------------------------------------------------------
// 10. Warm start

Outcome criterion10(const Bench& b) {
  DiscriminatorConfig dcfg = b.cfg;
  dcfg.path_mode = TowerMode::kUnidirectional;
  const TrainConfig defaults;
  ValidationAuc v;
  LoadedDiscriminator disc{dcfg, train_disc(dcfg, b.data, defaults.stages, &v)};
  const AgentConfig cfg = agent_config_for(dcfg, agent_config(b));
  const AgentTrainResult cold = train_student_forcing(cfg, init_agent_random(cfg), b.gen.world, b.gen.data.train);
  const AgentTrainResult warm =
      train_student_forcing(cfg, init_agent_from_discriminator(cfg, disc), b.gen.world, b.gen.data.train);
  const double sr_cold = unseen_sr(b, cfg, cold.params);
  const double sr_warm = unseen_sr(b, cfg, warm.params);
  return {sr_warm >= sr_cold + 0.02, "unseen SR warm " + num(sr_warm, 3) + " vs random " + num(sr_cold, 3) +
                                         " (unidirectional-path discriminator, PR+RW val AUC " + num(v.pr_rw) + ")"};
}

// ---------------------------------------------------------------------------
// 11. Diagonality

double mean_diagonality(const Bench& b, const ParamStore& params) {
  double s = 0;
  std::size_t n = 0;
  for (const ScoringInput& in : b.data.val_positives) {
    if (n == 50) break;
    s += diagonality(score_pair(b.cfg, params, in.tokens, in.percepts).alignment);
    ++n;
  }
  return s / static_cast<double>(n);
}

Outcome criterion11(const Bench& b) {
  const double cur = mean_diagonality(b, b.models.at("cur"));
  const double ps = mean_diagonality(b, b.models.at("ps"));
  return {cur > ps, "mean diagonality over 50 val pairs: curriculum " + num(cur) + ", PS-only " + num(ps)};
}

// ---------------------------------------------------------------------------
// 12. Determinism of the CLI pipeline

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int rc = cli::run(args, out, err);
  if (rc != 0) std::cerr << "pathdisc " << args.front() << " exited " << rc << ": " << err.str();
  return rc;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "timing.csv") continue;
    files[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  }
  return files;
}

Outcome criterion12() {
  const fs::path root = fs::temp_directory_path() / ("pathdisc_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const auto dir = [&](const std::string& name) { return (root / name).string(); };
  write_file_atomic(dir("config.json"), R"({
 "world": {"train_envs": 3, "val_seen_envs": 1, "unseen_envs": 2, "paths_per_train_env": 4,
           "paths_per_val_env": 3, "instructions_per_path": 2, "augmented_pairs": 40},
 "discriminator": {"embed_dim": 4, "hidden_dim": 4, "path_mode": "unidirectional"},
 "training": {"batch_size": 8, "stages": [{"strategies": ["PS"], "epochs": 2},
                                          {"strategies": ["PR", "RW"], "epochs": 2}]},
 "agent": {"embed_dim": 4, "hidden_dim": 4, "epochs": 2, "batch_size": 8}
}
)");
  const std::string conf = dir("config.json");
  const std::vector<std::vector<std::string>> stages{
      {"gen-world", "--config", conf, "--out", dir("data")},
      {"mine", "--config", conf, "--data", dir("data"), "--out", dir("mine")},
      {"train-disc", "--config", conf, "--quiet", "--data", dir("data"), "--negatives", dir("mine/negatives.jsonl"),
       "--out", dir("disc")},
      {"score", "--data", dir("data"), "--model", dir("disc/discriminator.ckpt"), "--split", "augmented", "--out",
       dir("score")},
      {"filter", "--ranked", dir("score/ranked.jsonl"), "--data", dir("data"), "--strategy", "random_top",
       "--fraction", "0.1", "--out", dir("filter")},
      {"train-agent", "--config", conf, "--quiet", "--data", dir("data"), "--pairs", dir("filter/pairs.jsonl"),
       "--with-train", "--init", "discriminator", "--discriminator", dir("disc/discriminator.ckpt"), "--out",
       dir("agent")},
      {"eval", "--data", dir("data"), "--agent", dir("agent/agent.ckpt"), "--out", dir("eval")},
      {"export-alignment", "--data", dir("data"), "--model", dir("disc/discriminator.ckpt"), "--split", "val_seen",
       "--count", "2", "--out", dir("export")},
      {"report", "--data", dir("data"), "--model", dir("disc/discriminator.ckpt"), "--eval", "agent=" + dir("eval"),
       "--out", dir("report")},
  };
  std::vector<std::string> failures;
  std::size_t compared = 0;
  for (const auto& args : stages) {
    const std::string out = args.back();
    if (cli(args) != 0) {
      failures.push_back(args.front() + " failed");
      break;
    }
    const auto manifest = nlohmann::json::parse(read_file(out + "/manifest.json"));
    std::vector<std::string> replay{manifest.at("command").get<std::string>()};
    for (const auto& a : manifest.at("args")) replay.push_back(a.get<std::string>());
    replay.push_back("--out");
    replay.push_back(out + ".replay");
    if (cli(replay) != 0) {
      failures.push_back(args.front() + " replay failed");
      continue;
    }
    const auto a = snapshot(out), r = snapshot(out + ".replay");
    compared += a.size();
    if (a != r) failures.push_back(args.front() + " artifacts differ");
  }

  bool resumed = false;
  if (failures.empty()) {
    std::vector<std::string> part = stages[2];
    part.back() = dir("disc_part");
    part.push_back("--stop-after");
    part.push_back("3");
    const int rc1 = cli(part);
    const int rc2 = cli({"train-disc", "--quiet", "--data", dir("data"), "--negatives", dir("mine/negatives.jsonl"),
                         "--resume", dir("disc_part/state.ckpt"), "--out", dir("disc_resumed")});
    resumed = rc1 == 0 && rc2 == 0 && !fs::exists(dir("disc_part/discriminator.ckpt")) &&
              read_file(dir("disc_resumed/discriminator.ckpt")) == read_file(dir("disc/discriminator.ckpt")) &&
              read_file(dir("disc_resumed/report.csv")) == read_file(dir("disc/report.csv"));
    if (!resumed) failures.push_back("resume differs");
  }
  fs::remove_all(root);
  std::string detail = std::to_string(stages.size()) + " stages replayed from manifests, " +
                       std::to_string(compared) + " artifacts compared; stop/resume " +
                       (resumed ? "bit-exact" : "not bit-exact");
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::string spec_file = PATHDISC_BENCHMARK_SPEC;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (!a.empty() && std::all_of(a.begin(), a.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      only.insert(std::stoi(a));
    } else {
      spec_file = a;
    }
  }
  // Criteria 7, 8 and 11 reuse the models of criterion 6, so it runs
  // whenever any of them is selected.
  const auto wanted = [&](int n) {
    if (only.empty() || only.count(n)) return true;
    return n == 6 && (only.count(7) || only.count(8) || only.count(11));
  };

  struct Criterion {
    int number;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "numerical core", 10, criterion1},
      {2, "alignment-score algebra", 1, criterion2},
      {3, "AUC oracle equivalence", 5, criterion3},
      {4, "metric unit suite", 5, criterion4},
      {5, "miner contracts", 30, [&] { return criterion5(spec_file); }},
      {6, "curriculum ordering", 15 * 60, [&] { return criterion6(bench(spec_file)); }},
      {7, "score ordering seen > augmented > unseen", 60, [&] { return criterion7(bench(spec_file)); }},
      {8, "Top vs Bottom quality gap", 60, [&] { return criterion8(bench(spec_file)); }},
      {9, "filtered-data agents", 30 * 60, [&] { return criterion9(bench(spec_file)); }},
      {10, "discriminator warm start", 20 * 60, [&] { return criterion10(bench(spec_file)); }},
      {11, "alignment diagonality", 60, [&] { return criterion11(bench(spec_file)); }},
      {12, "pipeline determinism", 10 * 60, criterion12},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted(c.number)) continue;
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = seconds_since(t0);
    if (s > c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + num(c.budget_s, 0) + " s budget";
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << std::setw(2) << c.number << " " << (o.pass ? "PASS" : "FAIL") << "  " << c.name
              << ": " << o.detail << " [" << num(s, 1) << " s]" << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
