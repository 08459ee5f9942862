// Copyright 2026 The XIR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef XIR_CONFIG_H_
#define XIR_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xir/common.h"
#include "xir/samplers.h"

namespace xir {

enum class Method { kSsl, kSslPop, kMns, kGTower, kBir, kXir };

Method parse_method(const std::string& name);
std::string method_name(Method method);

struct RunConfig {
  Method method = Method::kSslPop;
  Index batch_size = 2048;
  Index embedding_dim = 32;
  double learning_rate = 1e-3;
  double lr_decay_factor = 0.95;
  int lr_decay_every = 5;
  double weight_decay = 1e-5;
  int epochs = 100;
  double lambda = 0.5;
  std::optional<Index> cache_size;     // default: batch_size
  std::optional<Index> resample_size;  // default: batch_size (bir), batch_size / 2 (xir)
  std::optional<Index> mns_b_prime;    // default: batch_size
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<int> eval_cutoffs = {10, 20};
  double pop_epsilon = 1.0;
  int eval_every = 5;
  std::optional<std::string> tower;  // "32,16[:relu|tanh]"
  Index tower_id_dim = 32;
  Index tower_feature_dim = 8;
  OccurrenceCounting occurrence_counting = OccurrenceCounting::kMultiset;
  bool float_parameters = true;

  Index effective_cache_size() const;
  Index effective_resample_size() const;
  Index effective_b_prime() const;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// Flat JSON object keyed by the field names above. Unknown keys and
// mistyped values are validation errors.
void apply_json(RunConfig& config, const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

// Replaces the seed list with the single seed in `value` when set.
void apply_seed_override(RunConfig& config, const char* value);
inline constexpr const char* kSeedEnvVar = "XIR_SEED";

}  // namespace xir

#endif  // XIR_CONFIG_H_
