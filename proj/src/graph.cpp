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
#include "fgrl/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>

#include "fgrl/error.hpp"

namespace fgrl {
namespace {

std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adjacency, int source) {
  std::vector<int> dist(adjacency.size(), -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adjacency[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::vector<NodePair> normalize_edges(std::span<const NodePair> edges) {
  std::set<NodePair> unique;
  for (auto [a, b] : edges) unique.insert(a < b ? NodePair{a, b} : NodePair{b, a});
  return {unique.begin(), unique.end()};
}

std::vector<std::vector<int>> adjacency_of(int count, const std::vector<NodePair>& edges) {
  std::vector<std::vector<int>> adjacency(count);
  for (auto [a, b] : edges) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  for (auto& list : adjacency) std::sort(list.begin(), list.end());
  return adjacency;
}

}  // namespace

int MorphGraph::actuator_count() const {
  return static_cast<int>(std::count(actuated_.begin(), actuated_.end(), true));
}

bool MorphGraph::has_edge(int a, int b) const {
  const NodePair key = a < b ? NodePair{a, b} : NodePair{b, a};
  return std::binary_search(edges_.begin(), edges_.end(), key);
}

MorphGraph build_morph_graph(int node_count, std::span<const NodePair> edges,
                             const std::vector<bool>& actuated, int torso) {
  if (node_count < 1) {
    throw Error(ErrorCode::kIndexOutOfRange, "node_count must be at least 1");
  }
  if (static_cast<int>(actuated.size()) != node_count) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "actuated has " + std::to_string(actuated.size()) + " flags for " +
                    std::to_string(node_count) + " nodes");
  }
  if (torso < 0 || torso >= node_count) {
    throw Error(ErrorCode::kIndexOutOfRange, "torso " + std::to_string(torso) + " out of range");
  }
  for (auto [a, b] : edges) {
    if (a < 0 || a >= node_count || b < 0 || b >= node_count) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    }
  }
  for (auto [a, b] : edges) {
    if (a == b) throw Error(ErrorCode::kSelfLoop, "self-loop on node " + std::to_string(a));
  }

  MorphGraph graph;
  graph.edges_ = normalize_edges(edges);
  graph.adjacency_ = adjacency_of(node_count, graph.edges_);
  graph.actuated_ = actuated;
  graph.torso_ = torso;

  const auto dist = bfs_distances(graph.adjacency_, 0);
  if (std::find(dist.begin(), dist.end(), -1) != dist.end()) {
    throw Error(ErrorCode::kDisconnectedGraph, "morphology graph must be connected");
  }
  if (graph.actuator_count() == 0) {
    throw Error(ErrorCode::kNoActuator, "at least one node must be actuated");
  }
  return graph;
}

int hop_distance_to_torso(const MorphGraph& graph, int node) {
  if (node < 0 || node >= graph.node_count()) {
    throw Error(ErrorCode::kIndexOutOfRange, "node " + std::to_string(node) + " out of range");
  }
  return hop_distances_to_torso(graph)[node];
}

std::vector<int> hop_distances_to_torso(const MorphGraph& graph) {
  std::vector<std::vector<int>> adjacency(graph.node_count());
  for (int i = 0; i < graph.node_count(); ++i) {
    auto n = graph.neighbors(i);
    adjacency[i].assign(n.begin(), n.end());
  }
  return bfs_distances(adjacency, graph.torso());
}

Hierarchy build_hierarchy(const MorphGraph& base, std::span<const ClusterSpec> specs) {
  Hierarchy h;
  h.base_ = base;

  // Per-level local structures, converted to global ids at the end.
  std::vector<int> sizes{base.node_count()};
  std::vector<std::vector<std::vector<int>>> level_clusters;  // clusters of level l+1 over level l
  std::vector<std::vector<NodePair>> level_edges{base.edges()};

  auto add_level = [&](std::vector<std::vector<int>> clusters, std::span<const NodePair> edges) {
    const int below = sizes.back();
    const int level = static_cast<int>(sizes.size());
    std::vector<bool> covered(below, false);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      auto& members = clusters[c];
      if (members.empty()) {
        throw Error(ErrorCode::kEmptyCluster,
                    "cluster " + std::to_string(c) + " at level " + std::to_string(level) + " is empty");
      }
      for (int m : members) {
        if (m < 0 || m >= below) {
          throw Error(ErrorCode::kIndexOutOfRange,
                      "cluster member " + std::to_string(m) + " out of range at level " +
                          std::to_string(level));
        }
        covered[m] = true;
      }
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
    }
    for (int i = 0; i < below; ++i) {
      if (!covered[i]) {
        throw Error(ErrorCode::kUncoveredNode,
                    "node " + std::to_string(i) + " at level " + std::to_string(level - 1) +
                        " belongs to no cluster");
      }
    }
    const int count = static_cast<int>(clusters.size());
    for (auto [a, b] : edges) {
      if (a < 0 || a >= count || b < 0 || b >= count || a == b) {
        throw Error(ErrorCode::kInvalidPooledEdge,
                    "pooled edge (" + std::to_string(a) + "," + std::to_string(b) + ") invalid at level " +
                        std::to_string(level));
      }
    }
    sizes.push_back(count);
    level_clusters.push_back(std::move(clusters));
    level_edges.push_back(normalize_edges(edges));
  };

  for (const auto& spec : specs) {
    if (spec.clusters.empty()) {
      throw Error(ErrorCode::kEmptyCluster, "cluster spec has no clusters");
    }
    add_level(spec.clusters, spec.edges);
  }
  if (sizes.size() == 1 || sizes.back() > 1) {
    std::vector<int> all(sizes.back());
    for (int i = 0; i < sizes.back(); ++i) all[i] = i;
    add_level({all}, {});
  }

  const int levels = static_cast<int>(sizes.size());
  h.level_offsets_.assign(levels + 1, 0);
  for (int l = 0; l < levels; ++l) h.level_offsets_[l + 1] = h.level_offsets_[l] + sizes[l];
  const int total = h.level_offsets_.back();
  h.level_of_.resize(total);
  for (int l = 0; l < levels; ++l) {
    for (int i = h.level_offsets_[l]; i < h.level_offsets_[l + 1]; ++i) h.level_of_[i] = l;
  }
  h.parents_.assign(total, {});
  h.children_.assign(total, {});
  h.neighbors_.assign(total, {});
  for (int l = 0; l < levels; ++l) {
    const int off = h.level_offsets_[l];
    auto adjacency = adjacency_of(sizes[l], level_edges[l]);
    for (int i = 0; i < sizes[l]; ++i) {
      for (int j : adjacency[i]) h.neighbors_[off + i].push_back(off + j);
    }
  }
  for (int l = 0; l + 1 < levels; ++l) {
    const int below = h.level_offsets_[l];
    const int above = h.level_offsets_[l + 1];
    const auto& clusters = level_clusters[l];
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const int parent = above + static_cast<int>(c);
      for (int m : clusters[c]) {
        h.children_[parent].push_back(below + m);
        h.parents_[below + m].push_back(parent);
      }
    }
  }

  h.descendants_.assign(total, {});
  for (int i = 0; i < h.level_offsets_[1]; ++i) h.descendants_[i] = {i};
  for (int i = h.level_offsets_[1]; i < total; ++i) {
    std::vector<int> acc;
    for (int c : h.children_[i]) {
      acc.insert(acc.end(), h.descendants_[c].begin(), h.descendants_[c].end());
    }
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    h.descendants_[i] = std::move(acc);
  }

  h.edge_offsets_.assign(total + 1, 0);
  for (int i = 0; i < total; ++i) {
    h.edge_offsets_[i + 1] = h.edge_offsets_[i] + static_cast<int>(h.parents_[i].size());
    for (int p : h.parents_[i]) h.hier_edges_.emplace_back(p, i);
  }
  return h;
}

Hierarchy two_level_hierarchy(const MorphGraph& base) {
  return build_hierarchy(base, std::span<const ClusterSpec>{});
}

Hierarchy without_lateral_edges(Hierarchy hierarchy) {
  for (auto& n : hierarchy.neighbors_) n.clear();
  return hierarchy;
}

}  // namespace fgrl
