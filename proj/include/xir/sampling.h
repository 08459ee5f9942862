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

#ifndef XIR_SAMPLING_H_
#define XIR_SAMPLING_H_

#include <cstdint>
#include <span>
#include <vector>

#include "xir/common.h"
#include "xir/random.h"

namespace xir {

// Max-subtracted log(sum(exp(x))). Entries equal to -inf are ignored;
// returns -inf when every entry is -inf.
double log_sum_exp(std::span<const double> x);

// Normalised softmax of log weights; -inf entries get probability 0.
std::vector<double> softmax(std::span<const double> log_weights);

enum class SampleSource { kBatch, kCache, kUniform };

// A multiset of draws. `positions` index the candidate pool the draws were
// made from (batch columns, cache slots); `items` are the corresponding item
// ids. Both have one entry per draw, so duplicates carry multiplicity.
struct ResampleSet {
  std::vector<Index> positions;
  std::vector<Index> items;
  SampleSource source = SampleSource::kBatch;

  std::size_t size() const { return positions.size(); }
  // Number of draws equal to `item`.
  std::size_t multiplicity(Index item) const;
};

// Inverse-CDF sampler over a fixed set of log weights.
class CategoricalSampler {
 public:
  // Throws ValidationError ("empty support") if every weight is -inf.
  explicit CategoricalSampler(std::span<const double> log_weights);
  // Sampler from non-negative linear weights; an all-zero vector is
  // treated as uniform.
  static CategoricalSampler from_weights(std::span<const double> weights);

  Index draw(Rng& rng) const;
  std::size_t size() const { return cdf_.size(); }
  double probability(Index i) const;

 private:
  CategoricalSampler() = default;
  std::vector<double> cdf_;  // unnormalised running sums
};

// Walker/Vose alias table: O(n) build, O(1) draws. Storage is reused across
// rebuilds.
class AliasSampler {
 public:
  AliasSampler() = default;
  // Non-negative linear weights with a positive, finite sum.
  explicit AliasSampler(std::span<const double> weights) { rebuild(weights); }

  void rebuild(std::span<const double> weights);
  // 32 random bits per draw: the high half of bits * n picks the column, the
  // low half is the acceptance coin.
  Index draw(Rng& rng) const { return draw_bits(static_cast<std::uint32_t>(rng.next_u64() >> 32)); }
  // Fills `out` with independent draws, two per 64-bit word.
  void draw_many(Rng& rng, std::span<Index> out) const;
  std::size_t size() const { return threshold_.size(); }

 private:
  Index draw_bits(std::uint32_t bits) const {
    const std::uint64_t p = static_cast<std::uint64_t>(bits) * threshold_.size();
    const auto col = static_cast<Index>(p >> 32);
    const Index other = alias_[col];
    const Index keep = -static_cast<Index>(static_cast<std::uint32_t>(p) < threshold_[col]);
    return (col & keep) | (other & ~keep);
  }

  std::vector<std::uint32_t> threshold_;  // acceptance probability * 2^32
  std::vector<Index> alias_;
  std::vector<double> scaled_;
  std::vector<Index> small_;
  std::vector<Index> large_;
};

// m i.i.d. draws with replacement, P(j) = exp(lw_j - logsumexp(lw)).
// positions == items == drawn indices.
ResampleSet categorical_draw(std::span<const double> log_weights, Index m, Rng& rng,
                             SampleSource source = SampleSource::kBatch);

}  // namespace xir

#endif  // XIR_SAMPLING_H_
