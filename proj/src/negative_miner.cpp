// src/negative_miner.cpp

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

#include "pathdisc/negative_miner.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "pathdisc/parallel.hpp"

namespace pathdisc {

namespace {

InstructionPathPair negative_of(const InstructionPathPair& pos, Provenance prov, const char* tag,
                                std::size_t i, std::vector<NodeIndex> nodes) {
  InstructionPathPair neg = pos;
  neg.pair_id = pos.pair_id + "/" + tag + std::to_string(i);
  neg.provenance = prov;
  neg.nodes = std::move(nodes);
  return neg;
}

void check_pair_env(const EnvironmentGraph& env, const InstructionPathPair& pair) {
  if (pair.env_id != env.id()) {
    throw ValidationError("pair '" + pair.pair_id + "' belongs to '" + pair.env_id + "', not '" + env.id() + "'");
  }
}

std::optional<std::vector<NodeIndex>> simple_walk(const EnvironmentGraph& env, NodeIndex anchor,
                                                  std::size_t edges, Rng& rng) {
  std::vector<NodeIndex> walk{anchor};
  std::vector<char> visited(env.size(), 0);
  visited[anchor] = 1;
  std::vector<NodeIndex> options;
  for (std::size_t e = 0; e < edges; ++e) {
    options.clear();
    for (const Neighbor& nb : env.neighbors(walk.back())) {
      if (!visited[nb.node]) options.push_back(nb.node);
    }
    if (options.empty()) return std::nullopt;
    const NodeIndex next = options[rng.index(options.size())];
    visited[next] = 1;
    walk.push_back(next);
  }
  return walk;
}

std::vector<std::vector<NodeIndex>> strict_reorderings(const EnvironmentGraph& env,
                                                       const std::vector<NodeIndex>& nodes) {
  std::vector<std::vector<NodeIndex>> out;
  if (nodes.size() < 4) return out;
  std::vector<std::size_t> perm(nodes.size() - 2);
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<NodeIndex> cand(nodes.size());
  cand.front() = nodes.front();
  cand.back() = nodes.back();
  while (std::next_permutation(perm.begin(), perm.end())) {
    for (std::size_t i = 0; i < perm.size(); ++i) cand[i + 1] = nodes[perm[i]];
    bool ok = true;
    for (std::size_t i = 1; ok && i < cand.size(); ++i) ok = env.adjacent(cand[i - 1], cand[i]);
    if (ok) out.push_back(cand);
  }
  return out;
}

}  // namespace

const char* to_string(PrMode m) {
  switch (m) {
    case PrMode::kStrict: return "strict";
    case PrMode::kRelaxed: return "relaxed";
    case PrMode::kAuto: return "auto";
  }
  return "auto";
}

PrMode parse_pr_mode(std::string_view s) {
  for (PrMode m : {PrMode::kStrict, PrMode::kRelaxed, PrMode::kAuto}) {
    if (s == to_string(m)) return m;
  }
  throw ValidationError("unknown PR mode '" + std::string(s) + "' (strict, relaxed, auto)");
}

void validate(const MiningConfig& c) {
  if (!(c.far_threshold_m > 0.0)) throw ValidationError("mining: far_threshold_m must be positive");
  if (c.attempts < 1) throw ValidationError("mining: attempts must be >= 1");
}

std::vector<InstructionPathPair> mine_ps(const EnvironmentGraph& env, const InstructionPathPair& pair,
                                         std::size_t k, Rng& rng, int attempts) {
  check_pair_env(env, pair);
  std::vector<InstructionPathPair> out;
  int tries = 0;
  while (out.size() < k) {
    if (tries++ >= attempts) {
      throw BudgetExhausted("PS: environment '" + env.id() + "' too small to replace the path of '" +
                            pair.pair_id + "'");
    }
    Path p = sample_reference_path(env, rng);
    if (p.nodes == pair.nodes) continue;
    out.push_back(negative_of(pair, Provenance::kNegativePS, "ps", out.size(), std::move(p.nodes)));
  }
  return out;
}

bool has_strict_reordering(const EnvironmentGraph& env, const std::vector<NodeIndex>& nodes) {
  return !strict_reorderings(env, nodes).empty();
}

std::vector<InstructionPathPair> mine_pr(const EnvironmentGraph& env, const InstructionPathPair& pair,
                                         std::size_t k, Rng& rng, PrMode mode) {
  check_pair_env(env, pair);
  const std::vector<NodeIndex>& nodes = pair.nodes;
  if (nodes.size() < 4) {
    throw ValidationError("PR: pair '" + pair.pair_id + "' has fewer than 2 intermediate nodes");
  }
  std::vector<InstructionPathPair> out;
  if (k == 0) return out;
  if (mode != PrMode::kRelaxed) {
    std::vector<std::vector<NodeIndex>> cands = strict_reorderings(env, nodes);
    if (!cands.empty()) {
      rng.shuffle(cands);
      for (std::size_t i = 0; i < k; ++i) {
        out.push_back(negative_of(pair, Provenance::kNegativePR, "pr", i, cands[i % cands.size()]));
      }
      return out;
    }
    if (mode == PrMode::kStrict) {
      throw ValidationError("PR: no adjacency-preserving reordering of '" + pair.pair_id + "' in strict mode");
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<NodeIndex> mid(nodes.begin() + 1, nodes.end() - 1);
    const std::vector<NodeIndex> original = mid;
    do {
      rng.shuffle(mid);
    } while (mid == original);
    std::vector<NodeIndex> cand{nodes.front()};
    cand.insert(cand.end(), mid.begin(), mid.end());
    cand.push_back(nodes.back());
    out.push_back(negative_of(pair, Provenance::kNegativePR, "pr", i, std::move(cand)));
  }
  return out;
}

std::vector<InstructionPathPair> mine_rw(const EnvironmentGraph& env, const InstructionPathPair& pair,
                                         std::size_t k, Rng& rng, double far_threshold_m, int attempts) {
  check_pair_env(env, pair);
  if (pair.nodes.size() < 2) throw ValidationError("RW: pair '" + pair.pair_id + "' has no edges");
  const NodeIndex start = pair.nodes.front();
  const NodeIndex end = pair.nodes.back();
  const std::size_t edges = pair.nodes.size() - 1;
  std::vector<InstructionPathPair> out;
  int tries = 0;
  while (out.size() < k) {
    if (tries++ >= attempts) {
      throw BudgetExhausted("RW: no walk of " + std::to_string(edges) + " edges ends at least " +
                            format_double(far_threshold_m) + " m away for '" + pair.pair_id + "'");
    }
    const bool shared_start = rng.uniform() < 0.5;
    auto walk = simple_walk(env, shared_start ? start : end, edges, rng);
    if (!walk) continue;
    if (!shared_start) std::reverse(walk->begin(), walk->end());
    const double gap = shared_start ? geodesic(env, walk->back(), end) : geodesic(env, walk->front(), start);
    if (gap < far_threshold_m) continue;
    out.push_back(negative_of(pair, Provenance::kNegativeRW, "rw", out.size(), std::move(*walk)));
  }
  return out;
}

std::vector<InstructionPathPair> mine_all(const World& world,
                                          const std::vector<InstructionPathPair>& positives,
                                          const MiningConfig& config, MiningStats* stats) {
  validate(config);
  std::vector<std::vector<InstructionPathPair>> per(positives.size());
  std::vector<std::pair<char, char>> skipped(positives.size(), {0, 0});
  parallel_for(positives.size(), [&](std::size_t i) {
    const InstructionPathPair& pos = positives[i];
    const EnvironmentGraph& env = world.env(pos.env_id);
    Rng ps_rng(derive_seed(config.seed, "ps:" + pos.pair_id));
    Rng pr_rng(derive_seed(config.seed, "pr:" + pos.pair_id));
    Rng rw_rng(derive_seed(config.seed, "rw:" + pos.pair_id));
    auto& out = per[i];
    try {
      for (auto& n : mine_ps(env, pos, config.ps_per_positive, ps_rng, config.attempts)) out.push_back(std::move(n));
    } catch (const BudgetExhausted&) {
      skipped[i].first = 1;
    }
    for (auto& n : mine_pr(env, pos, config.pr_per_positive, pr_rng, config.pr_mode)) out.push_back(std::move(n));
    try {
      for (auto& n : mine_rw(env, pos, config.rw_per_positive, rw_rng, config.far_threshold_m, config.attempts)) {
        out.push_back(std::move(n));
      }
    } catch (const BudgetExhausted&) {
      std::erase_if(out, [](const InstructionPathPair& n) { return n.provenance == Provenance::kNegativeRW; });
      skipped[i].second = 1;
    }
  });
  std::vector<InstructionPathPair> all;
  MiningStats s;
  for (const auto& [ps, rw] : skipped) {
    s.ps_skipped += static_cast<std::size_t>(ps);
    s.rw_skipped += static_cast<std::size_t>(rw);
  }
  for (auto& list : per) {
    for (auto& n : list) {
      switch (n.provenance) {
        case Provenance::kNegativePS: ++s.ps; break;
        case Provenance::kNegativePR:
          ++(is_graph_valid(world.env(n.env_id), n.path()) ? s.pr_strict : s.pr_relaxed);
          break;
        case Provenance::kNegativeRW: ++s.rw; break;
        default: break;
      }
      all.push_back(std::move(n));
    }
  }
  if (stats) *stats = s;
  return all;
}

std::string negative_source_id(std::string_view negative_pair_id) {
  const std::size_t slash = negative_pair_id.rfind('/');
  if (slash == std::string_view::npos || slash == 0) {
    throw ValidationError("negative pair '" + std::string(negative_pair_id) + "' does not name its positive");
  }
  return std::string(negative_pair_id.substr(0, slash));
}

}  // namespace pathdisc
