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
#include <cstdio>
#include <string>

#include "fgrl/error.hpp"
#include "fgrl/harness.hpp"

namespace fgrl {
namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kEvaluationBase = 0x5eedf00dcafe0001ULL;

template <typename T>
void read_if(const json& doc, const char* key, T& target) {
  if (doc.contains(key) && !doc.at(key).is_null()) target = doc.at(key).get<T>();
}

const char* to_string(Pairing p) { return p == Pairing::kIndexAligned ? "index-aligned" : "random-seeded"; }

Pairing parse_pairing(const std::string& name) {
  if (name == "index-aligned") return Pairing::kIndexAligned;
  if (name == "random-seeded") return Pairing::kRandomSeeded;
  throw Error(ErrorCode::kInvalidConfig, "unknown pairing '" + name + "'");
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t evaluation_seed(int episode) {
  return derive_seed(kEvaluationBase, {static_cast<std::uint64_t>(episode)});
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  env.validate();
  policy.validate();
  if (generations < 1) fail("generations must be >= 1");
  if (episodes_per_candidate < 1) fail("episodes_per_candidate must be >= 1");
  if (popsize < 2) fail("popsize must be >= 2");
  if (manager_popsize && *manager_popsize < 2) fail("manager_popsize must be >= 2");
  if (worker_popsize && *worker_popsize < 2) fail("worker_popsize must be >= 2");
  if (!(sigma0_manager > 0.0) || !(sigma0_worker > 0.0)) fail("sigma0 must be > 0");
  if (checkpoint_every < 1) fail("checkpoint_every must be >= 1");
  if (policy.state_dim != kLimbStateDim || policy.feature_dim != kLimbFeatureDim) {
    fail("policy observation layout must be state_dim 5, feature_dim 1 for the snake");
  }
  if (policy.action_dim != 1) fail("snake joints take one scalar action each");
  const Morphology m = resolved_morphology();
  if (m.graph.node_count() != env.limb_count) fail("morphology node count differs from env.limb_count");
  if (m.graph.actuator_count() != env.joint_count()) fail("morphology must actuate exactly limb_count - 1 limbs");
  m.hierarchy();
}

Morphology ExperimentConfig::resolved_morphology() const {
  if (morphology) return *morphology;
  return Morphology{make_morphology(env.limb_count), {}};
}

json to_json(const SnakeConfig& c) {
  return json{{"limb_count", c.limb_count},
              {"link_length", c.link_length},
              {"link_mass", c.link_mass},
              {"dt", c.dt},
              {"substeps", c.substeps},
              {"drag_tangential", c.drag_tangential},
              {"drag_normal", c.drag_normal},
              {"torque_scale", c.torque_scale},
              {"max_steps", c.max_steps},
              {"reset_noise", c.reset_noise},
              {"zero_perturbation", c.zero_perturbation},
              {"strict_actions", c.strict_actions}};
}

json to_json(const PolicyConfig& c) {
  return json{{"variant", to_string(c.variant)},
              {"state_dim", c.state_dim},
              {"feature_dim", c.feature_dim},
              {"hidden_dim", c.hidden_dim},
              {"goal_dim", c.goal_dim},
              {"action_dim", c.action_dim},
              {"rounds", c.rounds},
              {"aggregation", to_string(c.aggregation)},
              {"update", to_string(c.update)},
              {"mlp_width", c.mlp_width},
              {"mlp_hidden_layers", c.mlp_hidden_layers},
              {"hidden_activation", to_string(c.hidden_activation)},
              {"w1_identity", c.w1_identity},
              {"action_uses_representation", c.action_uses_representation},
              {"share_across_levels", c.share_across_levels}};
}

json to_json(const ExperimentConfig& c) {
  json doc{{"env", to_json(c.env)},
           {"policy", to_json(c.policy)},
           {"generations", c.generations},
           {"popsize", c.popsize},
           {"manager_popsize", c.manager_popsize ? json(*c.manager_popsize) : json(nullptr)},
           {"worker_popsize", c.worker_popsize ? json(*c.worker_popsize) : json(nullptr)},
           {"episodes_per_candidate", c.episodes_per_candidate},
           {"seed", c.seed},
           {"sigma0_manager", c.sigma0_manager},
           {"sigma0_worker", c.sigma0_worker},
           {"pairing", to_string(c.pairing)},
           {"checkpoint_every", c.checkpoint_every}};
  doc["morphology"] = c.morphology ? json::parse(morphology_to_json(*c.morphology)) : json(nullptr);
  return doc;
}

SnakeConfig snake_config_from_json(const json& doc, SnakeConfig c) {
  try {
    read_if(doc, "limb_count", c.limb_count);
    read_if(doc, "link_length", c.link_length);
    read_if(doc, "link_mass", c.link_mass);
    read_if(doc, "dt", c.dt);
    read_if(doc, "substeps", c.substeps);
    read_if(doc, "drag_tangential", c.drag_tangential);
    read_if(doc, "drag_normal", c.drag_normal);
    read_if(doc, "torque_scale", c.torque_scale);
    read_if(doc, "max_steps", c.max_steps);
    read_if(doc, "reset_noise", c.reset_noise);
    read_if(doc, "zero_perturbation", c.zero_perturbation);
    read_if(doc, "strict_actions", c.strict_actions);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("env config: ") + e.what());
  }
  return c;
}

PolicyConfig policy_config_from_json(const json& doc, PolicyConfig c) {
  try {
    if (doc.contains("variant")) c.variant = parse_variant(doc.at("variant").get<std::string>());
    read_if(doc, "state_dim", c.state_dim);
    read_if(doc, "feature_dim", c.feature_dim);
    read_if(doc, "hidden_dim", c.hidden_dim);
    read_if(doc, "goal_dim", c.goal_dim);
    read_if(doc, "action_dim", c.action_dim);
    read_if(doc, "rounds", c.rounds);
    if (doc.contains("aggregation")) c.aggregation = parse_aggregation(doc.at("aggregation").get<std::string>());
    if (doc.contains("update")) c.update = parse_update_rule(doc.at("update").get<std::string>());
    read_if(doc, "mlp_width", c.mlp_width);
    read_if(doc, "mlp_hidden_layers", c.mlp_hidden_layers);
    if (doc.contains("hidden_activation")) {
      c.hidden_activation = parse_activation(doc.at("hidden_activation").get<std::string>());
    }
    read_if(doc, "w1_identity", c.w1_identity);
    read_if(doc, "action_uses_representation", c.action_uses_representation);
    read_if(doc, "share_across_levels", c.share_across_levels);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("policy config: ") + e.what());
  }
  return c;
}

ExperimentConfig experiment_config_from_json(const json& doc, ExperimentConfig c) {
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "experiment config must be a JSON object");
  try {
    if (doc.contains("env")) c.env = snake_config_from_json(doc.at("env"), c.env);
    if (doc.contains("policy")) c.policy = policy_config_from_json(doc.at("policy"), c.policy);
    read_if(doc, "generations", c.generations);
    read_if(doc, "popsize", c.popsize);
    if (doc.contains("manager_popsize")) {
      c.manager_popsize = doc.at("manager_popsize").is_null() ? std::nullopt
                                                              : std::optional<int>(doc.at("manager_popsize").get<int>());
    }
    if (doc.contains("worker_popsize")) {
      c.worker_popsize = doc.at("worker_popsize").is_null() ? std::nullopt
                                                            : std::optional<int>(doc.at("worker_popsize").get<int>());
    }
    read_if(doc, "episodes_per_candidate", c.episodes_per_candidate);
    read_if(doc, "seed", c.seed);
    read_if(doc, "sigma0_manager", c.sigma0_manager);
    read_if(doc, "sigma0_worker", c.sigma0_worker);
    if (doc.contains("sigma0")) c.sigma0_manager = c.sigma0_worker = doc.at("sigma0").get<double>();
    if (doc.contains("pairing")) c.pairing = parse_pairing(doc.at("pairing").get<std::string>());
    read_if(doc, "checkpoint_every", c.checkpoint_every);
    if (doc.contains("morphology")) {
      const json& m = doc.at("morphology");
      if (m.is_null()) {
        c.morphology.reset();
      } else if (m.is_string()) {
        c.morphology = load_morphology(m.get<std::string>());
      } else {
        c.morphology = parse_morphology(m.dump());
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("experiment config: ") + e.what());
  }
  return c;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fgrl
