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

#include <gtest/gtest.h>

#include "instances.h"
#include "oracles.h"
#include "xir/losses.h"
#include "xir/objective.h"

namespace xir {
namespace {

ResampleSet set_of(std::vector<Index> positions) {
  ResampleSet s;
  s.positions = positions;
  s.items = positions;
  return s;
}

TEST(FullSoftmaxTest, EqualScoresGiveLogN) {
  const Matrix s = Matrix::Zero(2, 4);
  const std::vector<Index> pos = {1, 3};
  EXPECT_NEAR(full_softmax_loss(s, pos).loss, std::log(4.0), 1e-15);
}

TEST(FullSoftmaxTest, MatchesOracleAndGradientRowsSumToZero) {
  Matrix s(3, 5);
  s.setRandom();
  const std::vector<Index> pos = {0, 4, 2};
  const auto out = full_softmax_loss(s, pos);
  EXPECT_NEAR(out.loss, oracle::full_softmax(s, pos), 1e-12);
  for (Eigen::Index a = 0; a < 3; ++a) EXPECT_NEAR(out.grad_scores.row(a).sum(), 0.0, 1e-15);
}

TEST(SampledSoftmaxTest, MatchesOracle) {
  Matrix s(3, 3);
  s.setRandom();
  const std::vector<Index> cols = {0, 1, 2};
  const std::vector<double> lq = {std::log(0.5), std::log(0.3), std::log(0.2)};
  EXPECT_NEAR(sampled_softmax_loss(s, cols, lq).loss, oracle::sampled_softmax(s, cols, lq), 1e-12);
}

TEST(SampledSoftmaxTest, UniformProposalEqualsPlainSoftmaxOverPool) {
  Matrix s(2, 2);
  s << 1.0, 0.0, 0.0, 1.0;
  const std::vector<Index> cols = {0, 1};
  const std::vector<double> lq = {std::log(0.5), std::log(0.5)};
  EXPECT_NEAR(sampled_softmax_loss(s, cols, lq).loss, std::log(1.0 + std::exp(-1.0)), 1e-15);
}

TEST(SampledSoftmaxTest, NonFiniteLogitAborts) {
  Matrix s = Matrix::Zero(1, 2);
  s(0, 1) = std::numeric_limits<double>::quiet_NaN();
  const std::vector<Index> cols = {0};
  const std::vector<double> lq = {0.0, 0.0};
  EXPECT_THROW(sampled_softmax_loss(s, cols, lq), RuntimeAbort);
}

TEST(BirLossTest, HandComputedRow) {
  Matrix s(1, 3);
  s << 0.0, std::log(2.0), std::log(3.0);
  const std::vector<Index> cols = {0};
  const std::vector<ResampleSet> r = {set_of({1, 2, 2})};
  // -log(1 / (1 + 2 + 3 + 3))
  EXPECT_NEAR(bir_loss(s, cols, r).loss, std::log(9.0), 1e-14);
}

TEST(BirLossTest, MatchesOracle) {
  Rng rng(3);
  Matrix s(4, 4);
  s.setRandom();
  const std::vector<Index> cols = {0, 1, 2, 3};
  std::vector<ResampleSet> r;
  for (int a = 0; a < 4; ++a) {
    r.push_back(set_of({static_cast<Index>(rng.below(4)), static_cast<Index>(rng.below(4))}));
  }
  EXPECT_NEAR(bir_loss(s, cols, r).loss, oracle::bir(s, cols, r), 1e-12);
}

TEST(BirLossTest, CorpusEnumerationCountsThePositiveTwice) {
  Matrix s(3, 6);
  s.setRandom();
  const std::vector<Index> cols = {0, 2, 5};
  const std::vector<ResampleSet> r(3, set_of({0, 1, 2, 3, 4, 5}));
  double expected = 0.0;
  for (Eigen::Index a = 0; a < 3; ++a) {
    const double z = s.row(a).array().exp().sum();
    const double sp = s(a, cols[a]);
    expected += std::log(z + std::exp(sp)) - sp;
  }
  EXPECT_NEAR(bir_loss(s, cols, r).loss, expected / 3.0, 1e-13);
  EXPECT_GT(bir_loss(s, cols, r).loss, full_softmax_loss(s, cols).loss);
}

TEST(XirLossTest, LambdaLimitsAndEqualSets) {
  Matrix s(2, 3), c(2, 3);
  s.setRandom();
  c = s;
  const std::vector<Index> cols = {0, 1};
  const std::vector<ResampleSet> r = {set_of({1, 2}), set_of({0, 0})};
  const std::vector<ResampleSet> k = {set_of({2, 2}), set_of({2, 1})};
  const double bir_r = bir_loss(s, cols, r).loss;
  const double bir_k = bir_loss(c, cols, k).loss;
  EXPECT_EQ(xir_loss(s, c, cols, r, k, 0.0).loss, bir_r);
  EXPECT_NEAR(xir_loss(s, c, cols, r, k, 1.0).loss, bir_k, 1e-15);
  EXPECT_NEAR(xir_loss(s, c, cols, r, r, 0.5).loss, bir_r, 1e-15);
  EXPECT_NEAR(xir_loss(s, c, cols, r, k, 0.3).loss, oracle::xir(s, c, cols, r, k, 0.3), 1e-12);
  EXPECT_THROW(xir_loss(s, c, cols, r, k, 1.5), ValidationError);
}

TEST(XirLossTest, ZeroWeightTermLeavesCacheGradientEmpty) {
  Matrix s(1, 2), c(1, 2);
  s.setRandom();
  c.setRandom();
  const std::vector<Index> cols = {0};
  const std::vector<ResampleSet> r = {set_of({1})};
  const auto out = xir_loss(s, c, cols, r, {}, 0.0);
  EXPECT_TRUE(out.grad_cache_scores.isZero());
}

TEST(LossGradientTest, ScoreGradientsMatchFiniteDifferences) {
  Rng rng(9);
  Matrix s(3, 4), c(3, 2);
  s.setRandom();
  c.setRandom();
  const std::vector<Index> cols = {0, 2, 3};
  const std::vector<double> lq = {-1.0, -2.0, -0.5, -1.5};
  const std::vector<ResampleSet> r = {set_of({1, 1, 3}), set_of({0}), set_of({2, 0})};
  const std::vector<ResampleSet> k = {set_of({0}), set_of({1, 1}), set_of({0, 1})};
  const double h = 1e-5;
  auto check = [&](auto loss, const Matrix& grad, Matrix& target) {
    for (Eigen::Index i = 0; i < target.size(); ++i) {
      const double saved = target.data()[i];
      target.data()[i] = saved + h;
      const double up = loss();
      target.data()[i] = saved - h;
      const double down = loss();
      target.data()[i] = saved;
      EXPECT_NEAR(grad.data()[i], (up - down) / (2 * h), 1e-8);
    }
  };
  check([&] { return full_softmax_loss(s, cols).loss; }, full_softmax_loss(s, cols).grad_scores, s);
  check([&] { return sampled_softmax_loss(s, cols, lq).loss; },
        sampled_softmax_loss(s, cols, lq).grad_scores, s);
  check([&] { return bir_loss(s, cols, r).loss; }, bir_loss(s, cols, r).grad_scores, s);
  const auto x = xir_loss(s, c, cols, r, k, 0.4);
  check([&] { return xir_loss(s, c, cols, r, k, 0.4).loss; }, x.grad_scores, s);
  check([&] { return xir_loss(s, c, cols, r, k, 0.4).loss; }, x.grad_cache_scores, c);
}

TEST(LossGradientTest, ParameterGradientsForEveryLoss) {
  for (LossKind kind :
       {LossKind::kFullSoftmax, LossKind::kSampledSoftmax, LossKind::kBir, LossKind::kXir}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const TwoTowerModel model(5, 8, 4, std::nullopt, 100 + seed);
      Rng rng(seed);
      const BatchPlan plan = testing::random_plan(model, kind, rng);
      EXPECT_LT(oracle::max_gradient_error(model, plan), 1e-4)
          << "kind " << static_cast<int>(kind) << " seed " << seed;
    }
  }
}

TEST(LossGradientTest, ParameterGradientsThroughFeatureTower) {
  ItemTowerConfig tower;
  tower.mlp = parse_mlp_spec("6,4:tanh");
  tower.id_dim = 3;
  tower.feature_cardinality = {3, 2};
  tower.feature_dim = 2;
  TwoTowerModel model(5, 8, 4, tower, 77);
  ItemFeatures f;
  f.cardinality = {3, 2};
  for (Index i = 0; i < 8; ++i) f.categories.push_back({i % 3, i % 2});
  model.set_item_features(f);
  for (LossKind kind : {LossKind::kSampledSoftmax, LossKind::kXir}) {
    Rng rng(4);
    const BatchPlan plan = testing::random_plan(model, kind, rng);
    EXPECT_LT(oracle::max_gradient_error(model, plan), 1e-4);
  }
}

TEST(ObjectiveTest, XirWithZeroLambdaSkipsCacheRows) {
  const TwoTowerModel model(5, 8, 4, std::nullopt, 1);
  Rng rng(2);
  BatchPlan plan = testing::random_plan(model, LossKind::kXir, rng);
  plan.lambda = 0.0;
  const auto value = evaluate_objective(model, plan);
  for (std::size_t s = 0; s < value.grads.item.num_rows(); ++s) {
    const Index id = value.grads.item.row_id(s);
    EXPECT_NE(std::find(plan.pool.begin(), plan.pool.end(), id), plan.pool.end());
  }
}

}  // namespace
}  // namespace xir
