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

#include "xir/synthetic.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "xir/random.h"

namespace xir {

SyntheticDataset make_synthetic(const SyntheticConfig& config) {
  if (config.num_users <= 0 || config.num_items <= 0 || config.latent_dim <= 0) {
    throw ValidationError("synthetic dimensions must be positive");
  }
  const Index max_interactions = std::min(config.max_interactions, config.num_items);
  if (config.min_interactions < 1 || config.min_interactions > max_interactions) {
    throw ValidationError("synthetic interaction bounds are inconsistent");
  }
  Rng rng(config.seed);
  const Index n_items = config.num_items;
  const int dim = config.latent_dim;
  const double factor_scale = 1.0 / std::sqrt(static_cast<double>(dim));

  // Popularity ranks are shuffled so that item ids carry no information.
  std::vector<Index> rank(n_items);
  std::iota(rank.begin(), rank.end(), 0);
  for (Index i = n_items - 1; i > 0; --i) std::swap(rank[i], rank[rng.below(i + 1)]);
  std::vector<double> log_pop(n_items);
  for (Index i = 0; i < n_items; ++i) {
    log_pop[i] = -config.zipf_exponent * std::log(static_cast<double>(rank[i] + 1));
  }

  Matrix item_factors(n_items, dim);
  for (Index i = 0; i < n_items; ++i) {
    for (int d = 0; d < dim; ++d) item_factors(i, d) = rng.normal() * factor_scale;
  }

  SyntheticDataset data;
  data.num_users = config.num_users;
  data.num_items = n_items;

  if (config.num_item_features > 0) {
    // Each feature clusters items by nearest random centroid in factor space,
    // so the categories carry signal about preferences.
    data.item_features.assign(n_items, std::vector<Index>(config.num_item_features));
    for (int f = 0; f < config.num_item_features; ++f) {
      Matrix centroids(config.feature_cardinality, dim);
      for (Index c = 0; c < config.feature_cardinality; ++c) {
        for (int d = 0; d < dim; ++d) centroids(c, d) = rng.normal() * factor_scale;
      }
      const Matrix sims = item_factors * centroids.transpose();
      for (Index i = 0; i < n_items; ++i) {
        Eigen::Index best = 0;
        sims.row(i).maxCoeff(&best);
        data.item_features[i][f] = static_cast<Index>(best);
      }
    }
  }

  Vector user_factor(dim);
  std::vector<double> keys(n_items);
  std::vector<Index> order(n_items);
  for (Index u = 0; u < config.num_users; ++u) {
    for (int d = 0; d < dim; ++d) user_factor(d) = rng.normal() * factor_scale;
    const Vector affinity = item_factors * user_factor;

    double u01;
    do {
      u01 = rng.uniform();
    } while (u01 <= 0.0);
    const double extra = config.mean_interactions - config.min_interactions;
    Index n = config.min_interactions +
              static_cast<Index>(std::floor(-std::log(u01) * std::max(extra, 0.0)));
    n = std::min(n, max_interactions);

    // Gumbel top-n draws n distinct items from the softmax without replacement.
    for (Index i = 0; i < n_items; ++i) {
      double g;
      do {
        g = rng.uniform();
      } while (g <= 0.0);
      keys[i] = config.affinity * affinity(i) + log_pop[i] - std::log(-std::log(g));
    }
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + n, order.end(),
                      [&](Index a, Index b) { return keys[a] > keys[b]; });
    for (Index r = 0; r < n; ++r) data.pairs.push_back({u, order[r]});
  }
  return data;
}

void write_synthetic(const SyntheticDataset& data,
                     const std::string& interactions_path,
                     const std::string& features_path) {
  std::ofstream out(interactions_path);
  if (!out) throw IoError("cannot write " + interactions_path);
  for (const auto& p : data.pairs) out << 'u' << p.user_id << "\ti" << p.item_id << '\n';
  if (!out) throw IoError("write failed: " + interactions_path);
  if (data.item_features.empty() || features_path.empty()) return;
  std::ofstream feat(features_path);
  if (!feat) throw IoError("cannot write " + features_path);
  for (Index i = 0; i < data.num_items; ++i) {
    feat << 'i' << i;
    for (std::size_t f = 0; f < data.item_features[i].size(); ++f) {
      feat << "\tf" << f << '_' << data.item_features[i][f];
    }
    feat << '\n';
  }
  if (!feat) throw IoError("write failed: " + features_path);
}

}  // namespace xir
