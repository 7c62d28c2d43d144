// src/env_graph.cpp

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

#include "pathdisc/env_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <utility>

#include "json_util.hpp"
#include "pathdisc/io.hpp"

namespace pathdisc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool near_equal(double x, double y) {
  return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

EnvironmentGraph::EnvironmentGraph(std::string env_id, std::vector<GraphNode> nodes,
                                   std::vector<GraphEdge> edges)
    : env_id_(std::move(env_id)), nodes_(std::move(nodes)), edges_(std::move(edges)) {
  const std::string ctx = "environment '" + env_id_ + "'";
  if (env_id_.empty()) throw ValidationError("environment: empty env_id");
  if (nodes_.empty()) throw ValidationError(ctx + ": no nodes");
  feature_dim_ = static_cast<std::size_t>(nodes_.front().feature.size());
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    const GraphNode& n = nodes_[i];
    if (n.id.empty()) throw ValidationError(ctx + ": node " + std::to_string(i) + " has empty id");
    if (!index_.emplace(n.id, i).second) {
      throw ValidationError(ctx + ": duplicate node id '" + n.id + "'");
    }
    if (static_cast<std::size_t>(n.feature.size()) != feature_dim_) {
      throw DimensionError(ctx + ": node '" + n.id + "' feature has dim " +
                           std::to_string(n.feature.size()) + ", expected " +
                           std::to_string(feature_dim_));
    }
    if (!n.position.allFinite() || !n.feature.allFinite()) {
      throw ValidationError(ctx + ": node '" + n.id + "' has non-finite values");
    }
  }

  adjacency_.assign(nodes_.size(), {});
  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  for (const GraphEdge& e : edges_) {
    const auto ia = index_.find(e.a);
    const auto ib = index_.find(e.b);
    if (ia == index_.end()) throw ValidationError(ctx + ": edge endpoint '" + e.a + "' is not a node");
    if (ib == index_.end()) throw ValidationError(ctx + ": edge endpoint '" + e.b + "' is not a node");
    const NodeIndex a = ia->second;
    const NodeIndex b = ib->second;
    if (a == b) throw ValidationError(ctx + ": self loop at '" + e.a + "'");
    if (!seen.emplace(std::min(a, b), std::max(a, b)).second) {
      throw ValidationError(ctx + ": duplicate edge '" + e.a + "'-'" + e.b + "'");
    }
    const double len = e.length ? *e.length : (nodes_[a].position - nodes_[b].position).norm();
    if (!(len > 0.0) || !std::isfinite(len)) {
      throw ValidationError(ctx + ": edge '" + e.a + "'-'" + e.b + "' has non-positive length");
    }
    adjacency_[a].push_back({b, len});
    adjacency_[b].push_back({a, len});
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(), [this](const Neighbor& x, const Neighbor& y) {
      return nodes_[x.node].id < nodes_[y.node].id;
    });
  }

  const auto n = static_cast<Eigen::Index>(nodes_.size());
  distances_ = Mat::Constant(n, n, kInf);
  using Item = std::pair<double, NodeIndex>;
  for (NodeIndex src = 0; src < nodes_.size(); ++src) {
    auto dist = distances_.row(static_cast<Eigen::Index>(src));
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist(static_cast<Eigen::Index>(src)) = 0.0;
    heap.emplace(0.0, src);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist(static_cast<Eigen::Index>(u))) continue;
      for (const Neighbor& nb : adjacency_[u]) {
        const double cand = d + nb.length;
        if (cand < dist(static_cast<Eigen::Index>(nb.node))) {
          dist(static_cast<Eigen::Index>(nb.node)) = cand;
          heap.emplace(cand, nb.node);
        }
      }
    }
  }
  // Summation order differs between the two directions; keep the smaller so
  // geodesics are exactly symmetric.
  distances_ = distances_.cwiseMin(distances_.transpose()).eval();
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    if (distances_(0, static_cast<Eigen::Index>(i)) == kInf) {
      throw ValidationError(ctx + ": graph is not connected ('" + nodes_[i].id +
                            "' unreachable from '" + nodes_[0].id + "')");
    }
  }
}

NodeIndex EnvironmentGraph::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    throw ValidationError("environment '" + env_id_ + "': unknown node id '" + std::string(id) + "'");
  }
  return it->second;
}

bool EnvironmentGraph::contains(std::string_view id) const {
  return index_.count(std::string(id)) != 0;
}

std::optional<double> EnvironmentGraph::edge_length(NodeIndex a, NodeIndex b) const {
  for (const Neighbor& nb : adjacency_.at(a)) {
    if (nb.node == b) return nb.length;
  }
  return std::nullopt;
}

double EnvironmentGraph::distance(NodeIndex a, NodeIndex b) const {
  if (a >= size() || b >= size()) {
    throw ValidationError("environment '" + env_id_ + "': node index out of range");
  }
  return distances_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
}

bool operator==(const EnvironmentGraph& x, const EnvironmentGraph& y) {
  if (x.env_id_ != y.env_id_ || x.nodes_.size() != y.nodes_.size() ||
      x.edges_.size() != y.edges_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < x.nodes_.size(); ++i) {
    const GraphNode& a = x.nodes_[i];
    const GraphNode& b = y.nodes_[i];
    if (a.id != b.id || a.position != b.position || a.feature.size() != b.feature.size() ||
        a.feature != b.feature) {
      return false;
    }
  }
  for (std::size_t i = 0; i < x.edges_.size(); ++i) {
    const GraphEdge& a = x.edges_[i];
    const GraphEdge& b = y.edges_[i];
    if (a.a != b.a || a.b != b.b || a.length != b.length) return false;
  }
  return true;
}

double geodesic(const EnvironmentGraph& env, NodeIndex a, NodeIndex b) {
  return env.distance(a, b);
}

double geodesic(const EnvironmentGraph& env, std::string_view a, std::string_view b) {
  return env.distance(env.index_of(a), env.index_of(b));
}

NodeIndex next_hop(const EnvironmentGraph& env, NodeIndex from, NodeIndex goal) {
  if (from == goal) return from;
  const double remaining = env.distance(from, goal);
  // Neighbors are id-sorted, so the first one on some shortest route yields
  // the lexicographically smallest continuation.
  for (const Neighbor& nb : env.neighbors(from)) {
    if (near_equal(nb.length + env.distance(nb.node, goal), remaining)) return nb.node;
  }
  throw NumericalError("next_hop: no neighbor lies on a shortest route");
}

Path shortest_path(const EnvironmentGraph& env, NodeIndex a, NodeIndex b) {
  Path p{env.id(), {a}};
  env.distance(a, b);
  NodeIndex u = a;
  while (u != b) {
    u = next_hop(env, u, b);
    p.nodes.push_back(u);
    if (p.nodes.size() > env.size()) throw NumericalError("shortest_path: route does not terminate");
  }
  return p;
}

Path shortest_path(const EnvironmentGraph& env, std::string_view a, std::string_view b) {
  return shortest_path(env, env.index_of(a), env.index_of(b));
}

double path_length(const EnvironmentGraph& env, const Path& path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.nodes.size(); ++i) {
    const NodeIndex u = path.nodes[i - 1];
    const NodeIndex v = path.nodes[i];
    const auto len = env.edge_length(u, v);
    total += len ? *len : (env.node(u).position - env.node(v).position).norm();
  }
  return total;
}

bool is_graph_valid(const EnvironmentGraph& env, const Path& path) {
  if (path.env_id != env.id() || path.nodes.empty()) return false;
  for (NodeIndex n : path.nodes) {
    if (n >= env.size()) return false;
  }
  for (std::size_t i = 1; i < path.nodes.size(); ++i) {
    if (!env.adjacent(path.nodes[i - 1], path.nodes[i])) return false;
  }
  return true;
}

bool is_admissible(const EnvironmentGraph& env, const Path& path, const PathConstraints& rules) {
  if (!is_graph_valid(env, path)) return false;
  const std::size_t e = path.edge_count();
  return e >= rules.min_edges && e <= rules.max_edges &&
         path_length(env, path) >= rules.min_length_m;
}

Path sample_reference_path(const EnvironmentGraph& env, Rng& rng, const PathConstraints& rules,
                           int attempts) {
  const std::size_t n = env.size();
  for (int t = 0; t < attempts; ++t) {
    const NodeIndex a = rng.index(n);
    const NodeIndex b = rng.index(n);
    if (a == b) continue;
    Path p = shortest_path(env, a, b);
    if (is_admissible(env, p, rules)) return p;
  }
  throw BudgetExhausted("no admissible path in environment '" + env.id() + "' after " +
                        std::to_string(attempts) + " attempts");
}

Path sample_reference_path(const EnvironmentGraph& env, std::uint64_t seed,
                           const PathConstraints& rules, int attempts) {
  Rng rng(seed);
  return sample_reference_path(env, rng, rules, attempts);
}

std::vector<std::string> node_ids(const EnvironmentGraph& env, const Path& path) {
  std::vector<std::string> ids;
  ids.reserve(path.nodes.size());
  for (NodeIndex n : path.nodes) ids.push_back(env.node(n).id);
  return ids;
}

Path path_from_ids(const EnvironmentGraph& env, const std::vector<std::string>& ids) {
  Path p{env.id(), {}};
  p.nodes.reserve(ids.size());
  for (const auto& id : ids) p.nodes.push_back(env.index_of(id));
  return p;
}

EnvironmentGraph parse_environment(std::string_view text, std::string_view source) {
  using namespace detail;
  const Json doc = parse_json(text, source);
  const std::string root(source);
  reject_unknown(doc, {"env_id", "nodes", "edges"}, root);
  const std::string env_id = as_string(field(doc, "env_id", root), root + ": env_id");

  std::vector<GraphNode> nodes;
  const Json& jn = as_array(field(doc, "nodes", root), root + ": nodes");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string w = root + ": " + sub("nodes", i);
    reject_unknown(jn[i], {"id", "pos", "feature"}, w);
    GraphNode n;
    n.id = as_string(field(jn[i], "id", w), sub(w, "id"));
    const Vec pos = as_vector(field(jn[i], "pos", w), sub(w, "pos"));
    if (pos.size() != 3) throw DimensionError(sub(w, "pos") + ": expected 3 coordinates");
    n.position = pos;
    n.feature = as_vector(field(jn[i], "feature", w), sub(w, "feature"));
    nodes.push_back(std::move(n));
  }

  std::vector<GraphEdge> edges;
  const Json& je = as_array(field(doc, "edges", root), root + ": edges");
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string w = root + ": " + sub("edges", i);
    reject_unknown(je[i], {"a", "b", "length"}, w);
    GraphEdge e;
    e.a = as_string(field(je[i], "a", w), sub(w, "a"));
    e.b = as_string(field(je[i], "b", w), sub(w, "b"));
    if (je[i].contains("length")) e.length = as_number(je[i]["length"], sub(w, "length"));
    edges.push_back(std::move(e));
  }
  return EnvironmentGraph(env_id, std::move(nodes), std::move(edges));
}

std::string environment_to_json(const EnvironmentGraph& env) {
  using detail::Json;
  Json doc;
  doc["env_id"] = env.id();
  Json nodes = Json::array();
  for (const GraphNode& n : env.nodes()) {
    Json jn;
    jn["id"] = n.id;
    jn["pos"] = Json::array({n.position.x(), n.position.y(), n.position.z()});
    jn["feature"] = detail::to_json(n.feature);
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  Json edges = Json::array();
  for (const GraphEdge& e : env.edges()) {
    Json je;
    je["a"] = e.a;
    je["b"] = e.b;
    if (e.length) je["length"] = *e.length;
    edges.push_back(std::move(je));
  }
  doc["edges"] = std::move(edges);
  return doc.dump(1) + "\n";
}

EnvironmentGraph load_environment(const std::string& file) {
  return parse_environment(read_file(file), file);
}

void save_environment(const EnvironmentGraph& env, const std::string& file) {
  write_file_atomic(file, environment_to_json(env));
}

}  // namespace pathdisc
