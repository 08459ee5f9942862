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

#include "xir/sampling.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

namespace xir {

double log_sum_exp(std::span<const double> x) {
  double max = -std::numeric_limits<double>::infinity();
  for (double v : x) max = std::max(max, v);
  if (!std::isfinite(max)) return max;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - max);
  return max + std::log(sum);
}

std::vector<double> softmax(std::span<const double> log_weights) {
  const double lse = log_sum_exp(log_weights);
  if (!std::isfinite(lse)) throw ValidationError("softmax over empty support");
  std::vector<double> p(log_weights.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_weights[i] - lse);
  return p;
}

std::size_t ResampleSet::multiplicity(Index item) const {
  return static_cast<std::size_t>(std::count(items.begin(), items.end(), item));
}

CategoricalSampler::CategoricalSampler(std::span<const double> log_weights) {
  if (log_weights.empty()) throw ValidationError("categorical over zero candidates");
  double max = -std::numeric_limits<double>::infinity();
  for (double v : log_weights) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw ValidationError("log weights must be finite or -inf");
    }
    max = std::max(max, v);
  }
  if (!std::isfinite(max)) throw ValidationError("categorical draw has empty support");
  cdf_.resize(log_weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    acc += std::exp(log_weights[i] - max);
    cdf_[i] = acc;
  }
}

CategoricalSampler CategoricalSampler::from_weights(std::span<const double> weights) {
  if (weights.empty()) throw ValidationError("categorical over zero candidates");
  CategoricalSampler s;
  s.cdf_.resize(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw ValidationError("linear weights must be finite and non-negative");
    }
    acc += weights[i];
    s.cdf_[i] = acc;
  }
  if (acc <= 0.0) {
    for (std::size_t i = 0; i < weights.size(); ++i) s.cdf_[i] = static_cast<double>(i + 1);
  }
  return s;
}

Index CategoricalSampler::draw(Rng& rng) const {
  const double target = rng.uniform() * cdf_.back();
  // First entry strictly above target; zero-weight entries are never chosen.
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  const auto idx = std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                            static_cast<std::ptrdiff_t>(cdf_.size()) - 1);
  return static_cast<Index>(idx);
}

double CategoricalSampler::probability(Index i) const {
  const double prev = i == 0 ? 0.0 : cdf_[i - 1];
  return (cdf_[i] - prev) / cdf_.back();
}

void AliasSampler::rebuild(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw ValidationError("categorical over zero candidates");
  double total = 0.0;
  bool negative = false;
  for (double w : weights) {
    negative |= !(w >= 0.0);
    total += w;
  }
  if (negative) throw ValidationError("linear weights must be non-negative");
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ValidationError("linear weights need a positive finite sum");
  }
  threshold_.assign(n, std::numeric_limits<std::uint32_t>::max());
  alias_.resize(n);
  scaled_.resize(n);
  small_.resize(n);
  large_.resize(n);
  std::size_t ns = 0;
  std::size_t nl = 0;
  const double scale = static_cast<double>(n) / total;
  for (std::size_t i = 0; i < n; ++i) {
    alias_[i] = static_cast<Index>(i);
    scaled_[i] = weights[i] * scale;
    const bool is_small = scaled_[i] < 1.0;
    small_[ns] = static_cast<Index>(i);
    large_[nl] = static_cast<Index>(i);
    ns += is_small;
    nl += !is_small;
  }
  while (ns > 0 && nl > 0) {
    const Index s = small_[--ns];
    const Index l = large_[nl - 1];
    threshold_[s] = static_cast<std::uint32_t>(std::min(scaled_[s] * 0x1.0p32, 4294967295.0));
    alias_[s] = l;
    scaled_[l] = (scaled_[l] + scaled_[s]) - 1.0;
    if (scaled_[l] < 1.0) {
      --nl;
      small_[ns++] = l;
    }
  }
  // Leftovers are 1 up to rounding; a zero weight left over borrows from the
  // heaviest entry instead.
  std::optional<Index> heaviest;
  for (std::size_t k = 0; k < ns; ++k) {
    const Index i = small_[k];
    if (weights[i] > 0.0) continue;
    if (!heaviest) {
      heaviest = static_cast<Index>(std::max_element(weights.begin(), weights.end()) -
                                    weights.begin());
    }
    threshold_[i] = 0;
    alias_[i] = *heaviest;
  }
}

void AliasSampler::draw_many(Rng& rng, std::span<Index> out) const {
  std::size_t d = 0;
  for (; d + 1 < out.size(); d += 2) {
    const std::uint64_t word = rng.next_u64();
    out[d] = draw_bits(static_cast<std::uint32_t>(word >> 32));
    out[d + 1] = draw_bits(static_cast<std::uint32_t>(word));
  }
  if (d < out.size()) out[d] = draw(rng);
}

ResampleSet categorical_draw(std::span<const double> log_weights, Index m, Rng& rng,
                             SampleSource source) {
  if (m < 0) throw ValidationError("sample count must be non-negative");
  const CategoricalSampler sampler(log_weights);
  ResampleSet set;
  set.source = source;
  set.positions.reserve(m);
  for (Index d = 0; d < m; ++d) set.positions.push_back(sampler.draw(rng));
  set.items = set.positions;
  return set;
}

}  // namespace xir
