// pathdisc/env_graph.hpp

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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pathdisc/core.hpp"
#include "pathdisc/rng.hpp"

namespace pathdisc {

using NodeIndex = std::size_t;

struct GraphNode {
  std::string id;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // meters
  Vec feature;
};

struct GraphEdge {
  std::string a;
  std::string b;
  /// Overrides the Euclidean distance between the endpoints when set.
  std::optional<double> length;
};

struct Neighbor {
  NodeIndex node;
  double length;
};

/// A navigation environment: locations with positions and perceptual
/// features joined by weighted undirected edges. Immutable once built; the
/// constructor validates the graph and precomputes all-pairs geodesics.
class EnvironmentGraph {
 public:
  EnvironmentGraph(std::string env_id, std::vector<GraphNode> nodes,
                   std::vector<GraphEdge> edges);

  const std::string& id() const { return env_id_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t feature_dim() const { return feature_dim_; }

  const GraphNode& node(NodeIndex i) const { return nodes_.at(i); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  /// Throws ValidationError for an unknown id.
  NodeIndex index_of(std::string_view id) const;
  bool contains(std::string_view id) const;

  /// Adjacent nodes, ordered by node id.
  const std::vector<Neighbor>& neighbors(NodeIndex i) const { return adjacency_.at(i); }
  std::optional<double> edge_length(NodeIndex a, NodeIndex b) const;
  bool adjacent(NodeIndex a, NodeIndex b) const { return edge_length(a, b).has_value(); }

  double distance(NodeIndex a, NodeIndex b) const;

  friend bool operator==(const EnvironmentGraph& x, const EnvironmentGraph& y);

 private:
  std::string env_id_;
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::size_t feature_dim_ = 0;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<std::vector<Neighbor>> adjacency_;
  Mat distances_;
};

/// A node sequence in one environment. Reference paths are graph-valid;
/// reordered negatives may not be (see negative_miner.hpp).
struct Path {
  std::string env_id;
  std::vector<NodeIndex> nodes;

  std::size_t edge_count() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  friend bool operator==(const Path&, const Path&) = default;
};

/// Path construction rules for reference paths.
struct PathConstraints {
  double min_length_m = 5.0;
  std::size_t min_edges = 4;
  std::size_t max_edges = 6;
};

inline constexpr int kPathSampleAttempts = 1000;

double geodesic(const EnvironmentGraph& env, NodeIndex a, NodeIndex b);
double geodesic(const EnvironmentGraph& env, std::string_view a, std::string_view b);

/// Shortest path; among equal-length routes the lexicographically smallest
/// node-id sequence wins.
Path shortest_path(const EnvironmentGraph& env, NodeIndex a, NodeIndex b);
Path shortest_path(const EnvironmentGraph& env, std::string_view a, std::string_view b);

/// First node after `from` on shortest_path(from, goal); `from` itself when
/// from == goal.
NodeIndex next_hop(const EnvironmentGraph& env, NodeIndex from, NodeIndex goal);

/// Sum of traversed edge lengths. Consecutive nodes that are not adjacent
/// (reordered negatives) contribute their Euclidean distance.
double path_length(const EnvironmentGraph& env, const Path& path);

bool is_graph_valid(const EnvironmentGraph& env, const Path& path);
bool is_admissible(const EnvironmentGraph& env, const Path& path,
                   const PathConstraints& rules = {});

/// Rejection-samples start/end pairs until their shortest path satisfies
/// `rules`. Throws BudgetExhausted after `attempts` failures.
Path sample_reference_path(const EnvironmentGraph& env, Rng& rng,
                           const PathConstraints& rules = {},
                           int attempts = kPathSampleAttempts);
Path sample_reference_path(const EnvironmentGraph& env, std::uint64_t seed,
                           const PathConstraints& rules = {},
                           int attempts = kPathSampleAttempts);

std::vector<std::string> node_ids(const EnvironmentGraph& env, const Path& path);
Path path_from_ids(const EnvironmentGraph& env, const std::vector<std::string>& ids);

/// JSON document {env_id, nodes:[{id, pos, feature}], edges:[{a, b, length?}]}.
/// Unknown fields are rejected; errors carry line or field context.
EnvironmentGraph parse_environment(std::string_view text, std::string_view source = "<memory>");
std::string environment_to_json(const EnvironmentGraph& env);
EnvironmentGraph load_environment(const std::string& file);
void save_environment(const EnvironmentGraph& env, const std::string& file);

}  // namespace pathdisc
