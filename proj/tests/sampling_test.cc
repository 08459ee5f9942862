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

#include <cmath>
#include <limits>
#include <numeric>

#include <gtest/gtest.h>

#include "xir/freq_estimator.h"
#include "xir/samplers.h"
#include "xir/sampling.h"

namespace xir {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(LogSumExpTest, StableForLargeValues) {
  const std::vector<double> x = {1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(x), 1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> y = {-kInf, 0.0};
  EXPECT_DOUBLE_EQ(log_sum_exp(y), 0.0);
  const std::vector<double> z = {-kInf, -kInf};
  EXPECT_EQ(log_sum_exp(z), -kInf);
}

TEST(SoftmaxTest, SumsToOneAndIgnoresMinusInf) {
  const std::vector<double> x = {0.0, std::log(3.0), -kInf};
  const auto p = softmax(x);
  EXPECT_NEAR(p[0], 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.75, 1e-15);
  EXPECT_EQ(p[2], 0.0);
}

TEST(CategoricalTest, EmptySupportIsRejected) {
  const std::vector<double> x = {-kInf, -kInf};
  EXPECT_THROW(CategoricalSampler{x}, ValidationError);
}

TEST(CategoricalTest, FrequenciesMatchProbabilities) {
  const std::vector<double> w = {std::log(0.1), std::log(0.2), std::log(0.7)};
  Rng rng(5);
  const auto set = categorical_draw(w, 200000, rng);
  std::vector<double> freq(3, 0.0);
  for (Index i : set.items) freq[i] += 1.0 / 200000;
  EXPECT_NEAR(freq[0], 0.1, 0.005);
  EXPECT_NEAR(freq[1], 0.2, 0.005);
  EXPECT_NEAR(freq[2], 0.7, 0.005);
  EXPECT_EQ(set.positions, set.items);
}

TEST(CategoricalTest, ZeroWeightNeverDrawn) {
  const std::vector<double> w = {0.0, 1.0, 0.0, 3.0};
  const auto s = CategoricalSampler::from_weights(w);
  Rng rng(1);
  for (int t = 0; t < 10000; ++t) {
    const Index i = s.draw(rng);
    ASSERT_TRUE(i == 1 || i == 3);
  }
  EXPECT_DOUBLE_EQ(s.probability(3), 0.75);
}

TEST(CategoricalTest, AllZeroWeightsAreUniform) {
  const std::vector<double> w(4, 0.0);
  const auto s = CategoricalSampler::from_weights(w);
  for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(s.probability(i), 0.25);
}

TEST(ResampleSetTest, Multiplicity) {
  ResampleSet s;
  s.items = {3, 1, 3, 3};
  s.positions = {0, 1, 0, 0};
  EXPECT_EQ(s.multiplicity(3), 3u);
  EXPECT_EQ(s.multiplicity(7), 0u);
}

TEST(BirWeightsTest, UniformPopularityGivesSoftmaxOfScores) {
  const std::vector<double> s = {0.0, std::log(2.0)};
  const std::vector<double> lp = {std::log(0.5), std::log(0.5)};
  const auto w = bir_weights(s, lp);
  EXPECT_NEAR(w[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(w[1], 2.0 / 3.0, 1e-15);
}

TEST(BirWeightsTest, EqualScoresFavourRareItems) {
  const std::vector<double> s = {1.0, 1.0};
  const std::vector<double> lp = {std::log(0.9), std::log(0.1)};
  const auto w = bir_weights(s, lp);
  EXPECT_NEAR(w[0], 0.1, 1e-12);
  EXPECT_NEAR(w[1], 0.9, 1e-12);
}

TEST(BirResampleTest, ShapesAndItems) {
  Matrix scores(3, 4);
  scores.setRandom();
  const std::vector<Index> batch = {7, 2, 7, 5};
  const auto pop = popularity_from_counts(std::vector<double>(8, 1.0), 0.0);
  Rng rng(2);
  const auto sets = bir_resample(scores, batch, pop, 6, rng);
  ASSERT_EQ(sets.size(), 3u);
  for (const auto& s : sets) {
    ASSERT_EQ(s.size(), 6u);
    for (std::size_t d = 0; d < s.size(); ++d) EXPECT_EQ(s.items[d], batch[s.positions[d]]);
  }
  EXPECT_THROW(bir_resample(scores, batch, pop, 0, rng), ValidationError);
}

TEST(BirResampleTest, DominantColumnIsAlwaysDrawn) {
  Matrix scores = Matrix::Zero(1, 3);
  scores(0, 1) = 800.0;
  const std::vector<Index> batch = {0, 1, 2};
  const auto pop = popularity_from_counts(std::vector<double>(3, 1.0), 0.0);
  Rng rng(3);
  const auto sets = bir_resample(scores, batch, pop, 50, rng);
  for (Index p : sets[0].positions) EXPECT_EQ(p, 1);
}

TEST(SampleCacheTest, InitialisationAndRefresh) {
  Rng rng(4);
  SampleCache cache(10, 6, rng);
  EXPECT_EQ(cache.size(), 6);
  for (auto o : cache.occurrence()) EXPECT_EQ(o, 0u);
  cache.refresh(rng);
  EXPECT_EQ(cache.size(), 6);

  ResampleSet a;
  a.items = {3, 3, 5};
  a.positions = {0, 0, 1};
  const std::vector<std::vector<ResampleSet>> step = {{a}, {a}};
  update_occurrence_and_cache(cache, step, rng);
  EXPECT_EQ(cache.occurrence()[3], 4u);
  EXPECT_EQ(cache.occurrence()[5], 2u);
  for (Index i : cache.items()) EXPECT_TRUE(i == 3 || i == 5);
  EXPECT_EQ(cache.size(), 6);
}

TEST(SampleCacheTest, SetCountingCountsEachItemOncePerStep) {
  Rng rng(4);
  SampleCache cache(10, 3, rng);
  ResampleSet a;
  a.items = {3, 3, 5};
  a.positions = {0, 0, 1};
  const std::vector<std::vector<ResampleSet>> step = {{a}, {a}};
  update_occurrence_and_cache(cache, step, rng, OccurrenceCounting::kSet);
  EXPECT_EQ(cache.occurrence()[3], 1u);
  EXPECT_EQ(cache.occurrence()[5], 1u);
}

TEST(CacheResampleTest, DrawsCacheSlots) {
  Rng rng(6);
  SampleCache cache(20, 5, rng);
  Matrix scores(2, 5);
  scores.setRandom();
  const auto pop = popularity_from_counts(std::vector<double>(20, 1.0), 1.0);
  const auto sets = cache_resample(scores, cache, pop, 7, rng);
  for (const auto& s : sets) {
    ASSERT_EQ(s.size(), 7u);
    EXPECT_EQ(s.source, SampleSource::kCache);
    for (std::size_t d = 0; d < s.size(); ++d) {
      EXPECT_EQ(s.items[d], cache.items()[s.positions[d]]);
    }
  }
}

TEST(MnsTest, NoExtraNegativesGivesPopularityProposal) {
  const auto pop = popularity_from_counts(std::vector<double>{1, 2, 3, 4}, 0.0);
  const std::vector<Index> batch = {0, 3};
  Rng rng(1);
  const auto c = mns_candidates(batch, 0, pop, rng);
  EXPECT_EQ(c.items, batch);
  EXPECT_DOUBLE_EQ(c.alpha, 1.0);
  EXPECT_EQ(c.log_proposal[0], pop.log_prob[0]);
  EXPECT_EQ(c.log_proposal[1], pop.log_prob[3]);
}

TEST(MnsTest, MixtureProposal) {
  const auto pop = popularity_from_counts(std::vector<double>{1, 2, 3, 4}, 0.0);
  const std::vector<Index> batch = {0, 3};
  Rng rng(1);
  const auto c = mns_candidates(batch, 2, pop, rng);
  ASSERT_EQ(c.items.size(), 4u);
  EXPECT_DOUBLE_EQ(c.alpha, 0.5);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(std::exp(c.log_proposal[j]), 0.5 * pop.prob[c.items[j]] + 0.5 * 0.25, 1e-15);
  }
  EXPECT_THROW(mns_candidates(batch, -1, pop, rng), ValidationError);
}

TEST(FreqEstimatorTest, UnseenItemGetsFloor) {
  StreamFreqEstimator est(10);
  EXPECT_EQ(est.estimate(3), StreamFreqEstimator::kFloor);
  EXPECT_EQ(est.array_len(), 32u);
  EXPECT_EQ(est.num_arrays(), 5);
}

TEST(FreqEstimatorTest, ItemSeenEveryStepApproachesOne) {
  StreamFreqEstimator est(10);
  const std::vector<Index> b = {4};
  for (int t = 0; t < 400; ++t) est.observe_batch(b);
  EXPECT_NEAR(est.estimate(4), 1.0, 1e-6);
}

TEST(FreqEstimatorTest, ItemSeenEveryFourthStepApproachesQuarter) {
  StreamFreqEstimator est(10);
  const std::vector<Index> hit = {2};
  const std::vector<Index> miss = {};
  for (int t = 0; t < 2000; ++t) est.observe_batch(t % 4 == 0 ? hit : miss);
  EXPECT_NEAR(est.estimate(2), 0.25, 1e-3);
}

TEST(FreqEstimatorTest, DuplicatesInABatchCountOnce) {
  StreamFreqEstimator a(10), b(10);
  const std::vector<Index> once = {1};
  const std::vector<Index> twice = {1, 1};
  for (int t = 0; t < 50; ++t) {
    a.observe_batch(once);
    b.observe_batch(twice);
  }
  EXPECT_EQ(a.estimate(1), b.estimate(1));
}

TEST(FreqEstimatorTest, CollidingItemsUpdateBucketOncePerStep) {
  StreamFreqEstimator est(10, 1, 16, 0.5);
  est.force_bucket(0, 1, 3);
  est.force_bucket(0, 2, 3);
  const std::vector<Index> both = {1, 2};
  const std::vector<Index> none = {};
  est.observe_batch(both);
  est.observe_batch(none);
  est.observe_batch(none);
  est.observe_batch(both);
  // One update per step: 0.5 after step 1 (gap 1), then 0.5 * 0.5 + 0.5 * 3.
  EXPECT_DOUBLE_EQ(est.estimate(1), 1.0 / 1.75);
  EXPECT_DOUBLE_EQ(est.estimate(2), 1.0 / 1.75);
}

}  // namespace
}  // namespace xir
