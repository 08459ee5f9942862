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

#ifndef XIR_SAMPLERS_H_
#define XIR_SAMPLERS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "xir/common.h"
#include "xir/data.h"
#include "xir/random.h"
#include "xir/sampling.h"

namespace xir {

// In-batch importance weights for one query:
//   w(i|u) = softmax_i( s(u,i) - log pop(i) ).
std::vector<double> bir_weights(std::span<const double> scores_row,
                                std::span<const double> log_pop);

// Per-row resampling of batch columns with bir_weights. The row's candidate
// pool is every column of `scores` (|B| columns, item ids in batch_items).
std::vector<ResampleSet> bir_resample(const Matrix& scores,
                                      std::span<const Index> batch_items,
                                      const PopularityTable& pop, Index m, Rng& rng);

enum class OccurrenceCounting {
  kMultiset,  // every draw counts, duplicates included
  kSet,       // each distinct item counts once per step
};

// Fixed-size cache of items refreshed from the running occurrence counts.
class SampleCache {
 public:
  SampleCache() = default;
  // Fills the cache with `size` uniform draws over the items and zeroes the
  // occurrence vector.
  SampleCache(Index num_items, Index size, Rng& rng);

  Index size() const { return static_cast<Index>(items_.size()); }
  Index num_items() const { return static_cast<Index>(occurrence_.size()); }
  std::span<const Index> items() const { return items_; }
  std::span<const std::uint64_t> occurrence() const { return occurrence_; }

  void add_occurrences(std::span<const ResampleSet> sets, OccurrenceCounting counting);
  // Replaces the cache with size() draws proportional to the occurrences;
  // all-zero occurrences are treated as uniform.
  void refresh(Rng& rng);

  // "item_index<TAB>count" per line.
  void write_occurrence(const std::string& path) const;

 private:
  std::vector<Index> items_;
  std::vector<std::uint64_t> occurrence_;
};

// Per-row resampling over cache slots with
//   w_c(i|u) = softmax_i( s'(u,i) - log q(i) ),  q = pop.
std::vector<ResampleSet> cache_resample(const Matrix& cache_scores,
                                        const SampleCache& cache,
                                        const PopularityTable& pop, Index m, Rng& rng);

// Counts every resampled item of this step, then refreshes the cache.
void update_occurrence_and_cache(SampleCache& cache,
                                 std::span<const std::vector<ResampleSet>> resampled,
                                 Rng& rng,
                                 OccurrenceCounting counting = OccurrenceCounting::kMultiset);

struct MnsCandidates {
  std::vector<Index> items;          // batch items followed by uniform draws
  std::vector<double> log_proposal;  // log q_mix per candidate
  double alpha = 1.0;                // |B| / (|B| + B')
};

// Mixed negative sampling pool with the mixture proposal
//   q_mix(i) = alpha * pop(i) + (1 - alpha) / N.
MnsCandidates mns_candidates(std::span<const Index> batch_items, Index b_prime,
                             const PopularityTable& pop, Rng& rng);

}  // namespace xir

#endif  // XIR_SAMPLERS_H_
