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

#include "xir/freq_estimator.h"

#include <algorithm>
#include <bit>

#include "xir/random.h"

namespace xir {

StreamFreqEstimator::StreamFreqEstimator(Index num_items, int num_arrays,
                                         std::size_t array_len, double decay,
                                         std::uint64_t seed)
    : array_len_(array_len), decay_(decay) {
  if (num_items <= 0 || num_arrays <= 0) throw ValidationError("estimator sizes must be positive");
  if (!(decay >= 0.0 && decay < 1.0)) throw ValidationError("estimator decay must lie in [0, 1)");
  if (array_len_ == 0) array_len_ = std::bit_ceil(2 * static_cast<std::size_t>(num_items));
  for (int a = 0; a < num_arrays; ++a) {
    seeds_.push_back(derive_seed({seed, 0x6774ULL, static_cast<std::uint64_t>(a)}));
  }
  last_step_.assign(num_arrays, std::vector<std::int64_t>(array_len_, 0));
  delta_avg_.assign(num_arrays, std::vector<double>(array_len_, 0.0));
  forced_.resize(num_arrays);
}

std::size_t StreamFreqEstimator::bucket(int array, Index item) const {
  for (const auto& [forced_item, b] : forced_[array]) {
    if (forced_item == item) return b;
  }
  return derive_seed({seeds_[array], static_cast<std::uint64_t>(item)}) % array_len_;
}

void StreamFreqEstimator::force_bucket(int array, Index item, std::size_t b) {
  XIR_CHECK(b < array_len_, "forced bucket out of range");
  forced_.at(array).emplace_back(item, b);
}

void StreamFreqEstimator::observe_batch(std::span<const Index> items) {
  ++global_step_;
  std::vector<Index> distinct(items.begin(), items.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (int a = 0; a < num_arrays(); ++a) {
    // A bucket already refreshed this step by a colliding item is skipped so
    // each bucket sees at most one gap per step.
    for (Index item : distinct) {
      const std::size_t b = bucket(a, item);
      if (last_step_[a][b] == global_step_) continue;
      const double delta = static_cast<double>(global_step_ - last_step_[a][b]);
      delta_avg_[a][b] = decay_ * delta_avg_[a][b] + (1.0 - decay_) * delta;
      last_step_[a][b] = global_step_;
    }
  }
}

double StreamFreqEstimator::estimate(Index item) const {
  double mean = 0.0;
  for (int a = 0; a < num_arrays(); ++a) mean += delta_avg_[a][bucket(a, item)];
  mean /= static_cast<double>(num_arrays());
  if (mean <= 0.0) return kFloor;
  return std::clamp(1.0 / mean, kFloor, 1.0);
}

std::vector<double> StreamFreqEstimator::update_and_estimate(std::span<const Index> items) {
  observe_batch(items);
  std::vector<double> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out[i] = estimate(items[i]);
  return out;
}

}  // namespace xir
