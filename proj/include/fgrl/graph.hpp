// Copyright 2026 The FGRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef FGRL_GRAPH_HPP_
#define FGRL_GRAPH_HPP_

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fgrl {

using NodePair = std::pair<int, int>;

/// Undirected limb graph of an agent: one node per limb, one edge per physical
/// connection. Limbs without an actuator are auxiliary nodes whose actions are
/// discarded.
class MorphGraph {
 public:
  int node_count() const { return static_cast<int>(actuated_.size()); }
  /// Edges stored once with first < second, sorted.
  const std::vector<NodePair>& edges() const { return edges_; }
  std::span<const int> neighbors(int node) const { return adjacency_.at(node); }
  bool actuated(int node) const { return actuated_.at(node); }
  const std::vector<bool>& actuated_flags() const { return actuated_; }
  int actuator_count() const;
  int torso() const { return torso_; }
  bool has_edge(int a, int b) const;

  bool operator==(const MorphGraph&) const = default;

 private:
  friend MorphGraph build_morph_graph(int, std::span<const NodePair>, const std::vector<bool>&, int);

  std::vector<NodePair> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<bool> actuated_;
  int torso_ = 0;
};

/// Validates and builds a morphology graph. Duplicate edges (in either
/// orientation) collapse to one.
/// Throws Error with kIndexOutOfRange, kSelfLoop, kDisconnectedGraph or
/// kNoActuator, checked in that order.
MorphGraph build_morph_graph(int node_count, std::span<const NodePair> edges,
                             const std::vector<bool>& actuated, int torso);

/// Breadth-first hop count from `node` to the torso.
int hop_distance_to_torso(const MorphGraph& graph, int node);

/// Hop distance to the torso for every node.
std::vector<int> hop_distances_to_torso(const MorphGraph& graph);

/// One pooling step: clusters over the nodes of the level below (possibly
/// overlapping) plus the intra-level edges of the pooled graph, indexed by
/// cluster.
struct ClusterSpec {
  std::vector<std::vector<int>> clusters;
  std::vector<NodePair> edges;
};

/// Layered feudal graph. Nodes carry global ids: level 0 holds the workers
/// (ids 0..K-1, identical to the morphology nodes), each following level is
/// appended after it, and the last node is the single top-level manager.
class Hierarchy {
 public:
  int level_count() const { return static_cast<int>(level_offsets_.size()) - 1; }
  int node_count() const { return level_offsets_.back(); }
  int worker_count() const { return level_size(0); }
  int level_size(int level) const { return level_offsets_.at(level + 1) - level_offsets_.at(level); }
  int level_offset(int level) const { return level_offsets_.at(level); }
  int level_of(int node) const { return level_of_.at(node); }
  int manager() const { return node_count() - 1; }
  bool is_worker(int node) const { return node < worker_count(); }

  std::span<const int> parents(int node) const { return parents_.at(node); }
  std::span<const int> children(int node) const { return children_.at(node); }
  /// Same-level neighbours in the pooled graph of the node's level.
  std::span<const int> neighbors(int node) const { return neighbors_.at(node); }
  /// Distinct workers below `node`; a worker's only descendant is itself.
  std::span<const int> descendant_workers(int node) const { return descendants_.at(node); }

  /// Hierarchical (parent, child) edges, ordered by child id and then by the
  /// child's parent order. Goal sets are indexed by this ordering.
  const std::vector<NodePair>& hierarchical_edges() const { return hier_edges_; }
  int edge_index(int child, int parent_slot) const { return edge_offsets_.at(child) + parent_slot; }
  int first_edge_of(int child) const { return edge_offsets_.at(child); }

  const MorphGraph& base() const { return base_; }

  bool operator==(const Hierarchy&) const = default;

 private:
  friend Hierarchy build_hierarchy(const MorphGraph&, std::span<const ClusterSpec>);
  friend Hierarchy without_lateral_edges(Hierarchy);

  MorphGraph base_;
  std::vector<int> level_offsets_;
  std::vector<int> level_of_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> descendants_;
  std::vector<NodePair> hier_edges_;
  std::vector<int> edge_offsets_;
};

/// Applies `specs` bottom-up. When the last pooled level has more than one
/// node an all-in-one manager level is appended.
/// Throws kEmptyCluster, kIndexOutOfRange, kUncoveredNode or kInvalidPooledEdge.
Hierarchy build_hierarchy(const MorphGraph& base, std::span<const ClusterSpec> specs);

/// Single manager directly over every worker.
Hierarchy two_level_hierarchy(const MorphGraph& base);

/// The same hierarchy with every same-level neighbourhood emptied.
Hierarchy without_lateral_edges(Hierarchy hierarchy);

/// A morphology file: limb graph plus optional pooling specs.
struct Morphology {
  MorphGraph graph;
  std::vector<ClusterSpec> clusters;

  Hierarchy hierarchy() const { return build_hierarchy(graph, clusters); }
};

/// Parses the morphology JSON format:
///   { "nodes": K, "edges": [[i,j],...], "actuated": [bool,...], "torso": i,
///     "clusters": [ [ [idx,...], ... ], ... ],
///     "pooled_edges": [ [ [a,b], ... ], ... ] }
/// "clusters" and "pooled_edges" are optional; pooled_edges[l] belongs to
/// clusters[l].
Morphology parse_morphology(const std::string& json_text);
Morphology load_morphology(const std::string& path);
std::string morphology_to_json(const Morphology& morphology);

}  // namespace fgrl

#endif  // FGRL_GRAPH_HPP_
