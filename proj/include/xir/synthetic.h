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

#ifndef XIR_SYNTHETIC_H_
#define XIR_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "xir/data.h"

namespace xir {

// Latent-factor interaction generator with Zipf item popularity. Each user
// draws a set of distinct items without replacement from
//   softmax_i( affinity * <user_factor, item_factor> + log zipf(i) ).
struct SyntheticConfig {
  Index num_users = 2000;
  Index num_items = 3000;
  int latent_dim = 16;
  double zipf_exponent = 1.0;
  double affinity = 4.0;
  double mean_interactions = 30.0;
  Index min_interactions = 5;
  Index max_interactions = 200;
  int num_item_features = 2;
  Index feature_cardinality = 50;
  std::uint64_t seed = 20260101;
};

struct SyntheticDataset {
  std::vector<Interaction> pairs;
  // item_features[i][f] is the category of feature f for item i.
  std::vector<std::vector<Index>> item_features;
  Index num_users = 0;
  Index num_items = 0;
};

SyntheticDataset make_synthetic(const SyntheticConfig& config);

// Writes "u<id>\ti<id>" lines and, when features exist, an item feature file
// with "i<id>\tf0_<cat>\tf1_<cat>..." lines.
void write_synthetic(const SyntheticDataset& data,
                     const std::string& interactions_path,
                     const std::string& features_path);

}  // namespace xir

#endif  // XIR_SYNTHETIC_H_
