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

#include "xir/config.h"

#include <fstream>

#include "xir/mlp.h"

namespace xir {
namespace {

constexpr std::pair<Method, const char*> kMethodNames[] = {
    {Method::kSsl, "ssl"},       {Method::kSslPop, "ssl_pop"}, {Method::kMns, "mns"},
    {Method::kGTower, "gtower"}, {Method::kBir, "bir"},        {Method::kXir, "xir"},
};

template <typename T>
T get_as(const nlohmann::json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config field '" + key + "' has the wrong type");
  }
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError("config field '" + field + "' " + what);
}

}  // namespace

Method parse_method(const std::string& name) {
  for (const auto& [m, n] : kMethodNames) {
    if (name == n) return m;
  }
  throw ValidationError("unknown method '" + name + "'");
}

std::string method_name(Method method) {
  for (const auto& [m, n] : kMethodNames) {
    if (m == method) return n;
  }
  throw LogicError("unnamed method");
}

Index RunConfig::effective_cache_size() const { return cache_size.value_or(batch_size); }

Index RunConfig::effective_resample_size() const {
  if (resample_size) return *resample_size;
  return method == Method::kXir ? std::max<Index>(1, batch_size / 2) : batch_size;
}

Index RunConfig::effective_b_prime() const { return mns_b_prime.value_or(batch_size); }

void RunConfig::validate() const {
  require(batch_size > 0, "batch_size", "must be positive");
  require(embedding_dim > 0, "embedding_dim", "must be positive");
  require(learning_rate > 0.0, "learning_rate", "must be positive");
  require(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0, "lr_decay_factor", "must be in (0, 1]");
  require(lr_decay_every > 0, "lr_decay_every", "must be positive");
  require(weight_decay >= 0.0, "weight_decay", "must be non-negative");
  require(epochs > 0, "epochs", "must be positive");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda", "must be in [0, 1]");
  require(!cache_size || *cache_size > 0, "cache_size", "must be positive");
  require(!resample_size || *resample_size > 0, "resample_size", "must be positive");
  require(!mns_b_prime || *mns_b_prime >= 0, "mns_b_prime", "must be non-negative");
  require(!seeds.empty(), "seeds", "must not be empty");
  require(!eval_cutoffs.empty(), "eval_cutoffs", "must not be empty");
  for (int k : eval_cutoffs) require(k > 0, "eval_cutoffs", "must be positive");
  require(pop_epsilon > 0.0, "pop_epsilon", "must be positive");
  require(eval_every > 0, "eval_every", "must be positive");
  require(tower_id_dim > 0, "tower_id_dim", "must be positive");
  require(tower_feature_dim > 0, "tower_feature_dim", "must be positive");
  if (tower) {
    const MlpTowerSpec spec = parse_mlp_spec(*tower);
    require(spec.layer_widths.back() == embedding_dim, "tower",
            "must end in a layer of width embedding_dim");
  }
}

void apply_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be a flat JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "method") {
      c.method = parse_method(get_as<std::string>(v, key));
    } else if (key == "batch_size") {
      c.batch_size = get_as<Index>(v, key);
    } else if (key == "embedding_dim") {
      c.embedding_dim = get_as<Index>(v, key);
    } else if (key == "learning_rate") {
      c.learning_rate = get_as<double>(v, key);
    } else if (key == "lr_decay_factor") {
      c.lr_decay_factor = get_as<double>(v, key);
    } else if (key == "lr_decay_every") {
      c.lr_decay_every = get_as<int>(v, key);
    } else if (key == "weight_decay") {
      c.weight_decay = get_as<double>(v, key);
    } else if (key == "epochs") {
      c.epochs = get_as<int>(v, key);
    } else if (key == "lambda") {
      c.lambda = get_as<double>(v, key);
    } else if (key == "cache_size") {
      c.cache_size = get_as<Index>(v, key);
    } else if (key == "resample_size") {
      c.resample_size = get_as<Index>(v, key);
    } else if (key == "mns_b_prime") {
      c.mns_b_prime = get_as<Index>(v, key);
    } else if (key == "seeds") {
      c.seeds = get_as<std::vector<std::uint64_t>>(v, key);
    } else if (key == "eval_cutoffs") {
      c.eval_cutoffs = get_as<std::vector<int>>(v, key);
    } else if (key == "pop_epsilon") {
      c.pop_epsilon = get_as<double>(v, key);
    } else if (key == "eval_every") {
      c.eval_every = get_as<int>(v, key);
    } else if (key == "tower") {
      if (v.is_null()) {
        c.tower.reset();
      } else {
        c.tower = get_as<std::string>(v, key);
      }
    } else if (key == "tower_id_dim") {
      c.tower_id_dim = get_as<Index>(v, key);
    } else if (key == "tower_feature_dim") {
      c.tower_feature_dim = get_as<Index>(v, key);
    } else if (key == "occurrence_counting") {
      const auto s = get_as<std::string>(v, key);
      require(s == "multiset" || s == "set", key, "must be 'multiset' or 'set'");
      c.occurrence_counting = s == "set" ? OccurrenceCounting::kSet : OccurrenceCounting::kMultiset;
    } else if (key == "float_parameters") {
      c.float_parameters = get_as<bool>(v, key);
    } else {
      throw ValidationError("unknown config field '" + key + "'");
    }
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config file '" + path + "' is not valid JSON");
  }
  RunConfig c;
  apply_json(c, j);
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j = {
      {"method", method_name(c.method)},
      {"batch_size", c.batch_size},
      {"embedding_dim", c.embedding_dim},
      {"learning_rate", c.learning_rate},
      {"lr_decay_factor", c.lr_decay_factor},
      {"lr_decay_every", c.lr_decay_every},
      {"weight_decay", c.weight_decay},
      {"epochs", c.epochs},
      {"lambda", c.lambda},
      {"cache_size", c.effective_cache_size()},
      {"resample_size", c.effective_resample_size()},
      {"mns_b_prime", c.effective_b_prime()},
      {"seeds", c.seeds},
      {"eval_cutoffs", c.eval_cutoffs},
      {"pop_epsilon", c.pop_epsilon},
      {"eval_every", c.eval_every},
      {"tower_id_dim", c.tower_id_dim},
      {"tower_feature_dim", c.tower_feature_dim},
      {"occurrence_counting",
       c.occurrence_counting == OccurrenceCounting::kSet ? "set" : "multiset"},
      {"float_parameters", c.float_parameters},
  };
  j["tower"] = c.tower ? nlohmann::json(*c.tower) : nlohmann::json(nullptr);
  return j;
}

void apply_seed_override(RunConfig& config, const char* value) {
  if (value == nullptr || *value == '\0') return;
  std::size_t used = 0;
  std::uint64_t seed = 0;
  try {
    seed = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || value[used] != '\0') {
    throw ValidationError(std::string(kSeedEnvVar) + " must be a non-negative integer");
  }
  config.seeds = {seed};
}

}  // namespace xir
