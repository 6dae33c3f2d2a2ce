/* Copyright 2026 The FGRL Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
/* C interface of the fgrl library. Every function returns an fgrl_status;
 * on failure fgrl_last_error() describes the problem (thread-local). Objects
 * are opaque handles released with their matching *_free function. Strings
 * returned through char** are owned by the caller and released with
 * fgrl_string_free. */
#ifndef FGRL_FGRL_H_
#define FGRL_FGRL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FGRL_API __declspec(dllexport)
#else
#define FGRL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fgrl_status {
  FGRL_OK = 0,
  FGRL_INVALID_ARGUMENT = 1,
  FGRL_DISCONNECTED_GRAPH = 2,
  FGRL_SELF_LOOP = 3,
  FGRL_INDEX_OUT_OF_RANGE = 4,
  FGRL_NO_ACTUATOR = 5,
  FGRL_EMPTY_CLUSTER = 6,
  FGRL_UNCOVERED_NODE = 7,
  FGRL_INVALID_POOLED_EDGE = 8,
  FGRL_DIMENSION_MISMATCH = 9,
  FGRL_NON_FINITE_INPUT = 10,
  FGRL_MISSING_GOAL = 11,
  FGRL_NO_PARENT = 12,
  FGRL_LENGTH_MISMATCH = 13,
  FGRL_INVALID_DIMENSION = 14,
  FGRL_INVALID_SIGMA = 15,
  FGRL_ASK_BEFORE_TELL = 16,
  FGRL_TELL_WITHOUT_ASK = 17,
  FGRL_NON_FINITE_FITNESS = 18,
  FGRL_INVALID_CONFIG = 19,
  FGRL_ACTION_DIMENSION_MISMATCH = 20,
  FGRL_ACTION_OUT_OF_RANGE = 21,
  FGRL_GRAPH_STATE_MISMATCH = 22,
  FGRL_INVALID_LIMB_COUNT = 23,
  FGRL_INCOMPATIBLE_CHECKPOINT = 24,
  FGRL_MISSING_CHECKPOINT = 25,
  FGRL_IO = 26,
  FGRL_PARSE = 27,
  FGRL_INTERNAL = 28
} fgrl_status;

typedef struct fgrl_morphology fgrl_morphology;
typedef struct fgrl_cmaes fgrl_cmaes;
typedef struct fgrl_env fgrl_env;
typedef struct fgrl_policy fgrl_policy;

FGRL_API const char* fgrl_version(void);
FGRL_API const char* fgrl_status_name(fgrl_status status);
/* Message of the last failed call on this thread ("" if none). */
FGRL_API const char* fgrl_last_error(void);
FGRL_API void fgrl_string_free(char* text);

/* Morphologies. */
FGRL_API fgrl_status fgrl_morphology_from_json(const char* json, fgrl_morphology** out);
/* Chain of `limbs` links with an unactuated head. */
FGRL_API fgrl_status fgrl_morphology_snake(int limbs, fgrl_morphology** out);
FGRL_API void fgrl_morphology_free(fgrl_morphology* morphology);
FGRL_API fgrl_status fgrl_morphology_node_count(const fgrl_morphology* morphology, int* out);
FGRL_API fgrl_status fgrl_morphology_hop_distance(const fgrl_morphology* morphology, int node, int* out);
FGRL_API fgrl_status fgrl_morphology_to_json(const fgrl_morphology* morphology, char** out);

/* 1 + cos(goal, next_state - state). */
FGRL_API fgrl_status fgrl_worker_reward(const double* goal, const double* state, const double* next_state,
                                        size_t dim, double* out);

/* CMA-ES (minimizes). popsize <= 0 selects the default; mean may be NULL. */
FGRL_API fgrl_status fgrl_cmaes_create(size_t dim, double sigma0, int popsize, uint64_t seed, const double* mean,
                                       fgrl_cmaes** out);
FGRL_API void fgrl_cmaes_free(fgrl_cmaes* es);
FGRL_API fgrl_status fgrl_cmaes_dim(const fgrl_cmaes* es, size_t* out);
FGRL_API fgrl_status fgrl_cmaes_popsize(const fgrl_cmaes* es, int* out);
FGRL_API fgrl_status fgrl_cmaes_sigma(const fgrl_cmaes* es, double* out);
FGRL_API fgrl_status fgrl_cmaes_generation(const fgrl_cmaes* es, uint64_t* out);
/* Writes popsize * dim values, candidate-major. */
FGRL_API fgrl_status fgrl_cmaes_ask(fgrl_cmaes* es, double* candidates, size_t capacity);
FGRL_API fgrl_status fgrl_cmaes_tell(fgrl_cmaes* es, const double* fitness, size_t count);
FGRL_API fgrl_status fgrl_cmaes_mean(const fgrl_cmaes* es, double* out, size_t capacity);
FGRL_API fgrl_status fgrl_cmaes_save(const fgrl_cmaes* es, char** json);
FGRL_API fgrl_status fgrl_cmaes_load(const char* json, fgrl_cmaes** out);

/* Snake environment. config_json may be NULL for defaults. */
FGRL_API fgrl_status fgrl_env_create(const char* config_json, fgrl_env** out);
FGRL_API void fgrl_env_free(fgrl_env* env);
/* limbs * 6 observation values, limb-major. */
FGRL_API fgrl_status fgrl_env_observation_size(const fgrl_env* env, size_t* out);
FGRL_API fgrl_status fgrl_env_action_size(const fgrl_env* env, size_t* out);
FGRL_API fgrl_status fgrl_env_reset(fgrl_env* env, uint64_t seed, double* observation, size_t capacity);
FGRL_API fgrl_status fgrl_env_step(fgrl_env* env, const double* actions, size_t count, double* observation,
                                   size_t capacity, double* reward, int* done);

/* Feudal policy over a morphology. config_json may be NULL for defaults. */
FGRL_API fgrl_status fgrl_policy_create(const char* config_json, const fgrl_morphology* morphology,
                                        fgrl_policy** out);
FGRL_API void fgrl_policy_free(fgrl_policy* policy);
FGRL_API fgrl_status fgrl_policy_sizes(const fgrl_policy* policy, size_t* manager_size, size_t* worker_size);
/* Writes the flattened actions of actuated limbs. */
FGRL_API fgrl_status fgrl_policy_step(const fgrl_policy* policy, const double* observation, size_t observation_len,
                                      const double* manager, size_t manager_len, const double* worker,
                                      size_t worker_len, double* actions, size_t capacity, size_t* written);

/* Experiment entry points. Requests and results are JSON documents; see
 * README.md for the accepted keys. */
FGRL_API fgrl_status fgrl_train(const char* request_json, char** result_json);
FGRL_API fgrl_status fgrl_evaluate(const char* request_json, char** result_json);
FGRL_API fgrl_status fgrl_transfer(const char* request_json, char** result_json);
FGRL_API fgrl_status fgrl_search(const char* request_json, char** result_json);
FGRL_API fgrl_status fgrl_plot(const char* request_json, char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* FGRL_FGRL_H_ */
