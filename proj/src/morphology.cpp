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
#include <fstream>
#include <sstream>

#include "fgrl/error.hpp"
#include "fgrl/graph.hpp"
#include "json.hpp"

namespace fgrl {

using nlohmann::json;

Morphology parse_morphology(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("morphology: ") + e.what());
  }
  try {
    const int nodes = doc.at("nodes").get<int>();
    std::vector<NodePair> edges;
    for (const auto& e : doc.value("edges", json::array())) {
      edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    std::vector<bool> actuated;
    if (doc.contains("actuated")) {
      for (const auto& a : doc.at("actuated")) actuated.push_back(a.get<bool>());
    } else {
      actuated.assign(nodes > 0 ? nodes : 0, true);
    }
    const int torso = doc.value("torso", 0);

    Morphology m{build_morph_graph(nodes, edges, actuated, torso), {}};
    const auto clusters = doc.value("clusters", json::array());
    const auto pooled = doc.value("pooled_edges", json::array());
    if (pooled.size() > clusters.size()) {
      throw Error(ErrorCode::kInvalidPooledEdge, "pooled_edges has more levels than clusters");
    }
    for (std::size_t l = 0; l < clusters.size(); ++l) {
      ClusterSpec spec;
      for (const auto& c : clusters[l]) spec.clusters.push_back(c.get<std::vector<int>>());
      if (l < pooled.size()) {
        for (const auto& e : pooled[l]) spec.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      }
      m.clusters.push_back(std::move(spec));
    }
    // Validate the hierarchy eagerly so malformed files fail at load time.
    (void)m.hierarchy();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("morphology: ") + e.what());
  }
}

Morphology load_morphology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open morphology file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_morphology(buffer.str());
}

std::string morphology_to_json(const Morphology& morphology) {
  const auto& g = morphology.graph;
  json doc;
  doc["nodes"] = g.node_count();
  doc["edges"] = json::array();
  for (auto [a, b] : g.edges()) doc["edges"].push_back({a, b});
  doc["actuated"] = g.actuated_flags();
  doc["torso"] = g.torso();
  json clusters = json::array();
  json pooled = json::array();
  for (const auto& spec : morphology.clusters) {
    clusters.push_back(spec.clusters);
    json edges = json::array();
    for (auto [a, b] : spec.edges) edges.push_back({a, b});
    pooled.push_back(edges);
  }
  doc["clusters"] = clusters;
  doc["pooled_edges"] = pooled;
  return doc.dump();
}

}  // namespace fgrl
