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

#ifndef XIR_DIAGNOSTICS_H_
#define XIR_DIAGNOSTICS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "xir/common.h"
#include "xir/data.h"
#include "xir/model.h"
#include "xir/random.h"

namespace xir {

struct DistributionReport {
  double tv_distance = 0.0;
  double kl_divergence = 0.0;
  std::uint64_t sample_count = 0;
  std::size_t support_size = 0;
};

// tv = 0.5 * sum |p - q|, kl = sum_{p > 0} p ln(p / q). Both inputs must sum
// to one within 1e-6.
DistributionReport tv_and_kl(std::span<const double> empirical, std::span<const double> exact);

// Draws a pool of `pool_size` items from P (pool_size == 0 means `draws`),
// then `draws` items from the pool with weight 1/P(i), and compares the
// result with the uniform distribution.
DistributionReport verify_lemma31(std::span<const double> p, std::uint64_t draws, Rng& rng,
                                  std::uint64_t pool_size = 0);

struct BatchSizeReport {
  Index batch_size = 0;
  DistributionReport report;
};

// For each batch size, `trials` times: draw a batch from pop with
// replacement and resample one item with the in-batch importance weights.
// The empirical distribution is compared with softmax(scores).
std::vector<BatchSizeReport> verify_theorem31(std::span<const double> scores,
                                              const PopularityTable& pop,
                                              std::span<const Index> batch_sizes,
                                              std::uint64_t trials, Rng& rng);

struct BoundTerms {
  double Z = 0.0;
  double Z_B = 0.0;
  double Z_Bp = 0.0;
  double lead_grad_term = 0.0;
  double lead_const_term = 0.0;
  double G = 0.0;
  double max_pop_gap = 0.0;
};

// Bound terms for one batch of item ids. `scores` covers the corpus;
// `coordinate_bound` is G.
BoundTerms compute_bound_terms(std::span<const double> scores, std::span<const double> pop,
                               std::span<const Index> batch, double coordinate_bound);

struct GradientBiasOptions {
  Index resample_size = 0;  // 0: same as the batch size
  // Batch is the whole corpus, once each, with a uniform correction.
  bool enumerate_batch = false;
};

struct GradientBiasReport {
  Index batch_size = 0;
  Index resample_size = 0;
  std::uint64_t trials = 0;
  Vector user_bias;  // per coordinate of the query embedding
  Matrix item_bias;  // per coordinate of every item representation
  double max_abs_bias = 0.0;
  double max_standard_error = 0.0;
  BoundTerms bounds;
};

// Monte-Carlo bias of the resampled gradient estimator
//   -grad s(u,i) + (1/m) sum_{j in R_u} grad s(u,j)
// against the exact softmax gradient, over the query embedding and the item
// representations.
GradientBiasReport gradient_bias(const TwoTowerModel& model, Index user, Index positive,
                                 const PopularityTable& pop, Index batch_size,
                                 std::uint64_t trials, Rng& rng,
                                 const GradientBiasOptions& options = {});

// Instances shared by the CLI and the tests.
// pop(i) proportional to 1 / (i + 1)^exponent.
PopularityTable zipf_popularity(Index n, double exponent);
// n i.i.d. standard normal scores.
std::vector<double> normal_scores(Index n, Rng& rng);
// One user and n items with coordinates uniform in +-scale/sqrt(dim). With
// `uniform_scores` the user embedding is zero, so every score is 0.
TwoTowerModel bias_instance(Index n, Index dim, double scale, bool uniform_scores,
                            std::uint64_t seed);

nlohmann::json to_json(const DistributionReport& r);
nlohmann::json to_json(const BoundTerms& b);
nlohmann::json to_json(std::span<const BatchSizeReport> reports);
nlohmann::json to_json(const GradientBiasReport& r);

}  // namespace xir

#endif  // XIR_DIAGNOSTICS_H_
