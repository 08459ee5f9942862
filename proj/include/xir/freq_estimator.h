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

#ifndef XIR_FREQ_ESTIMATOR_H_
#define XIR_FREQ_ESTIMATOR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "xir/common.h"

namespace xir {

// Streaming item-frequency estimate from last-seen steps kept in several
// hashed arrays. For each observation the gap since the item's previous
// sighting updates an exponential moving average per array; the estimate is
// the reciprocal of the averaged gap.
class StreamFreqEstimator {
 public:
  static constexpr double kFloor = 1e-9;

  // array_len == 0 selects the smallest power of two >= 2 * num_items.
  StreamFreqEstimator(Index num_items, int num_arrays = 5, std::size_t array_len = 0,
                      double decay = 0.95, std::uint64_t seed = 0);

  int num_arrays() const { return static_cast<int>(last_step_.size()); }
  std::size_t array_len() const { return array_len_; }
  std::int64_t global_step() const { return global_step_; }

  std::size_t bucket(int array, Index item) const;

  // Advances the global step by one and records the distinct items of the
  // mini-batch.
  void observe_batch(std::span<const Index> items);

  // In (kFloor, 1]; kFloor for items never observed in any array.
  double estimate(Index item) const;

  // Observes the batch, then returns estimates for the same items.
  std::vector<double> update_and_estimate(std::span<const Index> items);

  // Test hook: pins the bucket of `item` in `array`.
  void force_bucket(int array, Index item, std::size_t bucket);

 private:
  std::size_t array_len_;
  double decay_;
  std::vector<std::uint64_t> seeds_;
  std::vector<std::vector<std::int64_t>> last_step_;
  std::vector<std::vector<double>> delta_avg_;
  std::vector<std::vector<std::pair<Index, std::size_t>>> forced_;
  std::int64_t global_step_ = 0;
};

}  // namespace xir

#endif  // XIR_FREQ_ESTIMATOR_H_
