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

#include "xir/samplers.h"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace xir {

std::vector<double> bir_weights(std::span<const double> scores_row,
                                std::span<const double> log_pop) {
  XIR_CHECK(scores_row.size() == log_pop.size(), "scores and log_pop lengths differ");
  std::vector<double> corrected(scores_row.size());
  for (std::size_t j = 0; j < corrected.size(); ++j) corrected[j] = scores_row[j] - log_pop[j];
  return softmax(corrected);
}

namespace {

// Row-wise draws over columns with probability proportional to
// exp(scores(a, j) - log_correction[j]).
std::vector<ResampleSet> resample_rows(const Matrix& scores, std::span<const double> log_correction,
                                       std::span<const Index> ids, Index m, Rng& rng,
                                       SampleSource source) {
  if (m < 1) throw ValidationError("resample size must be at least 1");
  const Eigen::Index width = static_cast<Eigen::Index>(ids.size());
  const Eigen::Map<const Eigen::ArrayXd> correction(log_correction.data(), width);
  Eigen::ArrayXd weights(width);
  AliasSampler sampler;
  std::vector<ResampleSet> out(scores.rows());
  for (Eigen::Index a = 0; a < scores.rows(); ++a) {
    weights = scores.row(a).transpose().array() - correction;
    const double top = weights.maxCoeff();
    if (!std::isfinite(top)) throw RuntimeAbort("non-finite score while resampling");
    weights = (weights - top).exp();
    sampler.rebuild(std::span<const double>(weights.data(), width));
    auto& set = out[a];
    set.source = source;
    set.positions.resize(m);
    set.items.resize(m);
    sampler.draw_many(rng, set.positions);
    for (Index d = 0; d < m; ++d) set.items[d] = ids[set.positions[d]];
  }
  return out;
}

}  // namespace

std::vector<ResampleSet> bir_resample(const Matrix& scores,
                                      std::span<const Index> batch_items,
                                      const PopularityTable& pop, Index m, Rng& rng) {
  XIR_CHECK(scores.cols() == static_cast<Eigen::Index>(batch_items.size()),
            "score matrix width must equal the batch size");
  std::vector<double> log_pop(batch_items.size());
  for (std::size_t j = 0; j < log_pop.size(); ++j) log_pop[j] = pop.log_prob.at(batch_items[j]);
  return resample_rows(scores, log_pop, batch_items, m, rng, SampleSource::kBatch);
}

SampleCache::SampleCache(Index num_items, Index size, Rng& rng) {
  if (num_items <= 0 || size <= 0) throw ValidationError("cache and corpus sizes must be positive");
  occurrence_.assign(num_items, 0);
  items_.resize(size);
  for (auto& item : items_) item = static_cast<Index>(rng.below(num_items));
}

void SampleCache::add_occurrences(std::span<const ResampleSet> sets,
                                  OccurrenceCounting counting) {
  if (counting == OccurrenceCounting::kMultiset) {
    for (const auto& set : sets) {
      for (Index item : set.items) ++occurrence_.at(item);
    }
    return;
  }
  std::vector<Index> distinct;
  for (const auto& set : sets) distinct.insert(distinct.end(), set.items.begin(), set.items.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (Index item : distinct) ++occurrence_.at(item);
}

void SampleCache::refresh(Rng& rng) {
  std::vector<double> weights(occurrence_.begin(), occurrence_.end());
  const auto sampler = CategoricalSampler::from_weights(weights);
  for (auto& item : items_) item = sampler.draw(rng);
}

void SampleCache::write_occurrence(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write occurrence file: " + path);
  for (std::size_t i = 0; i < occurrence_.size(); ++i) out << i << '\t' << occurrence_[i] << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<ResampleSet> cache_resample(const Matrix& cache_scores,
                                        const SampleCache& cache,
                                        const PopularityTable& pop, Index m, Rng& rng) {
  const auto items = cache.items();
  XIR_CHECK(cache_scores.cols() == static_cast<Eigen::Index>(items.size()),
            "cache score width must equal the cache size");
  std::vector<double> log_q(items.size());
  for (std::size_t c = 0; c < items.size(); ++c) log_q[c] = pop.log_prob.at(items[c]);
  return resample_rows(cache_scores, log_q, items, m, rng, SampleSource::kCache);
}

void update_occurrence_and_cache(SampleCache& cache,
                                 std::span<const std::vector<ResampleSet>> resampled,
                                 Rng& rng, OccurrenceCounting counting) {
  if (counting == OccurrenceCounting::kMultiset) {
    for (const auto& group : resampled) cache.add_occurrences(group, counting);
  } else {
    // Set semantics apply to the union over all groups of the step.
    std::vector<ResampleSet> all;
    for (const auto& group : resampled) all.insert(all.end(), group.begin(), group.end());
    cache.add_occurrences(all, counting);
  }
  cache.refresh(rng);
}

MnsCandidates mns_candidates(std::span<const Index> batch_items, Index b_prime,
                             const PopularityTable& pop, Rng& rng) {
  if (b_prime < 0) throw ValidationError("B' must be non-negative");
  const Index n = pop.size();
  MnsCandidates out;
  out.items.assign(batch_items.begin(), batch_items.end());
  for (Index d = 0; d < b_prime; ++d) out.items.push_back(static_cast<Index>(rng.below(n)));
  const double batch = static_cast<double>(batch_items.size());
  out.alpha = batch / (batch + static_cast<double>(b_prime));
  const double uniform = 1.0 / static_cast<double>(n);
  out.log_proposal.resize(out.items.size());
  for (std::size_t c = 0; c < out.items.size(); ++c) {
    const double p = pop.prob.at(out.items[c]);
    out.log_proposal[c] = std::log(out.alpha * p + (1.0 - out.alpha) * uniform);
  }
  return out;
}

}  // namespace xir
