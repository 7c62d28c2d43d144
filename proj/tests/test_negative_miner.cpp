// tests/test_negative_miner.cpp

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

#include <cstdlib>
#include <set>

#include "pathdisc/negative_miner.hpp"
#include "test_util.hpp"

using namespace pathdisc;

namespace {

InstructionPathPair positive(const EnvironmentGraph& env, std::vector<NodeIndex> nodes) {
  return {"pos", env.id(), std::move(nodes), {2, 4, 9, 3}, Provenance::kHumanLike, Split::kTrain};
}

EnvironmentGraph complete_graph(int n) {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * 3.141592653589793 * i / n;
    nodes.push_back({"k" + std::to_string(i), Eigen::Vector3d(3 * std::cos(a), 3 * std::sin(a), 0), Vec::Ones(2)});
    for (int j = 0; j < i; ++j) edges.push_back({"k" + std::to_string(j), "k" + std::to_string(i), {}});
  }
  return EnvironmentGraph("k", std::move(nodes), std::move(edges));
}

EnvironmentGraph line(int n, double spacing) {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  for (int i = 0; i < n; ++i) {
    nodes.push_back({"l" + std::to_string(i), Eigen::Vector3d(spacing * i, 0, 0), Vec::Ones(2)});
    if (i) edges.push_back({"l" + std::to_string(i - 1), "l" + std::to_string(i), {}});
  }
  return EnvironmentGraph("line", std::move(nodes), std::move(edges));
}

WorldSpec mining_spec() {
  WorldSpec s;
  s.seed = 21;
  s.train_envs = 6;
  s.val_seen_envs = 1;
  s.unseen_envs = 2;
  s.paths_per_train_env = 8;
  s.paths_per_val_env = 4;
  s.augmented_pairs = 10;
  return s;
}

}  // namespace

TEST_CASE("PS replaces the path with a different admissible one") {
  const EnvironmentGraph g = test::grid_env(4, 4, 2.0);
  const InstructionPathPair pos = positive(g, sample_reference_path(g, 1).nodes);
  Rng rng(3), again(3);
  const auto negs = mine_ps(g, pos, 5, rng);
  REQUIRE(negs.size() == 5);
  for (const auto& n : negs) {
    CHECK(n.nodes != pos.nodes);
    CHECK(is_admissible(g, n.path()));
    CHECK(n.tokens == pos.tokens);
    CHECK(n.provenance == Provenance::kNegativePS);
  }
  CHECK(mine_ps(g, pos, 5, again) == negs);

  // A 5-node line admits only itself and its reverse.
  const EnvironmentGraph l = line(5, 2.0);
  Rng r(1);
  for (const auto& n : mine_ps(l, positive(l, {0, 1, 2, 3, 4}), 3, r)) {
    CHECK(n.nodes == std::vector<NodeIndex>{4, 3, 2, 1, 0});
  }
  const EnvironmentGraph short_line = line(5, 1.2);
  CHECK_THROWS_AS(mine_ps(short_line, positive(short_line, {0, 1, 2, 3, 4}), 1, r), BudgetExhausted);
}

TEST_CASE("PR keeps the endpoints and never returns the identity") {
  const EnvironmentGraph g = test::grid_env(4, 4, 2.0);
  const InstructionPathPair pos = positive(g, sample_reference_path(g, 2).nodes);
  Rng rng(5);
  for (const auto& n : mine_pr(g, pos, 20, rng, PrMode::kRelaxed)) {
    CHECK(n.nodes.front() == pos.nodes.front());
    CHECK(n.nodes.back() == pos.nodes.back());
    CHECK(n.nodes != pos.nodes);
    CHECK(std::multiset<NodeIndex>(n.nodes.begin(), n.nodes.end()) ==
          std::multiset<NodeIndex>(pos.nodes.begin(), pos.nodes.end()));
  }
  // Grids are bipartite: swapping intermediates breaks adjacency.
  CHECK_FALSE(has_strict_reordering(g, pos.nodes));
  CHECK_THROWS_AS(mine_pr(g, pos, 1, rng, PrMode::kStrict), ValidationError);

  const EnvironmentGraph k = complete_graph(6);
  const InstructionPathPair kp = positive(k, {0, 1, 2, 3, 4});
  REQUIRE(has_strict_reordering(k, kp.nodes));
  for (PrMode mode : {PrMode::kStrict, PrMode::kAuto}) {
    for (const auto& n : mine_pr(k, kp, 10, rng, mode)) {
      CHECK(is_graph_valid(k, n.path()));
      CHECK(n.nodes != kp.nodes);
    }
  }
  CHECK_THROWS_AS(mine_pr(k, positive(k, {0, 1, 2}), 1, rng, PrMode::kStrict), ValidationError);
  CHECK_THROWS_AS(mine_pr(k, positive(k, {0, 1, 2}), 1, rng, PrMode::kRelaxed), ValidationError);
}

TEST_CASE("PR percepts are rebuilt from the reordered nodes") {
  const World w = generate_world(mining_spec());
  const EnvironmentGraph& env = w.train[0];
  const InstructionPathPair pos = positive(env, sample_reference_path(env, 4).nodes);
  Rng rng(1);
  const InstructionPathPair neg = mine_pr(env, pos, 1, rng).front();
  const Mat v = perceptual_sequence(env, neg.nodes);
  for (std::size_t t = 0; t < neg.nodes.size(); ++t) {
    CHECK(v.row(static_cast<Eigen::Index>(t)).head(env.feature_dim()) == env.node(neg.nodes[t]).feature.transpose());
  }
  CHECK(v != perceptual_sequence(env, pos.nodes));
}

TEST_CASE("RW keeps the edge count and ends far away") {
  const EnvironmentGraph g = test::grid_env(5, 5, 2.0);
  const InstructionPathPair pos = positive(g, sample_reference_path(g, 7).nodes);
  Rng rng(8), again(8);
  const auto negs = mine_rw(g, pos, 50, rng, 5.0);
  int shared_start = 0;
  int shared_end = 0;
  for (const auto& n : negs) {
    CHECK(n.nodes.size() == pos.nodes.size());
    CHECK(is_graph_valid(g, n.path()));
    CHECK(std::set<NodeIndex>(n.nodes.begin(), n.nodes.end()).size() == n.nodes.size());
    CHECK(n.tokens == pos.tokens);
    if (n.nodes.front() == pos.nodes.front() &&
        geodesic(g, n.nodes.back(), pos.nodes.back()) >= 5.0) {
      ++shared_start;
    } else {
      CHECK(n.nodes.back() == pos.nodes.back());
      CHECK(geodesic(g, n.nodes.front(), pos.nodes.front()) >= 5.0);
      ++shared_end;
    }
  }
  CHECK(shared_start > 0);
  CHECK(shared_end > 0);
  CHECK(mine_rw(g, pos, 50, again, 5.0) == negs);

  // Every 4-edge walk anchored on a 6-node line ends within 2 m.
  const EnvironmentGraph l = line(6, 1.0);
  Rng r(2);
  CHECK_THROWS_AS(mine_rw(l, positive(l, {0, 1, 2, 3, 4}), 1, r, 5.0), BudgetExhausted);
}

TEST_CASE("mine_all is deterministic and independent of the worker count") {
  const GeneratedData d = generate_dataset(mining_spec());
  MiningConfig cfg;
  cfg.seed = 99;
  setenv("PATHDISC_THREADS", "1", 1);
  MiningStats s1;
  const auto one = mine_all(d.world, d.data.train, cfg, &s1);
  setenv("PATHDISC_THREADS", "3", 1);
  MiningStats s3;
  const auto three = mine_all(d.world, d.data.train, cfg, &s3);
  unsetenv("PATHDISC_THREADS");
  CHECK(one == three);
  CHECK(s1.ps == d.data.train.size() - s1.ps_skipped);
  CHECK(s1.pr_strict + s1.pr_relaxed == d.data.train.size());
  CHECK(s1.rw == d.data.train.size() - s1.rw_skipped);
  CHECK(s1.rw_skipped == s3.rw_skipped);

  std::set<std::string> ids;
  for (const auto& n : one) {
    CHECK(ids.insert(n.pair_id).second);
    CHECK(is_negative(n.provenance));
    validate_pair(d.world, d.vocab, n);
  }
  cfg.seed = 100;
  CHECK(mine_all(d.world, d.data.train, cfg) != one);

  const std::string text = pairs_to_jsonl(d.world, one);
  CHECK(parse_pairs_jsonl(text, d.world) == one);

  cfg.far_threshold_m = 0.0;
  CHECK_THROWS_AS(mine_all(d.world, d.data.train, cfg), ValidationError);
  CHECK(parse_pr_mode("relaxed") == PrMode::kRelaxed);
  CHECK_THROWS_AS(parse_pr_mode("loose"), ValidationError);
}
