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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "instances.h"
#include "xir/checkpoint.h"
#include "xir/trainer.h"

namespace xir {
namespace {

RunConfig small_config(Method method) {
  RunConfig c;
  c.method = method;
  c.batch_size = 16;
  c.embedding_dim = 8;
  c.epochs = 2;
  c.seeds = {3};
  c.eval_every = 1;
  c.eval_cutoffs = {5, 10};
  return c;
}

std::vector<double> losses(const SeedRun& run) {
  std::vector<double> out;
  for (const auto& e : run.epochs) out.push_back(e.train_loss);
  return out;
}

class ScratchDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("xir_trainer_" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

using TrainerFiles = ScratchDir;

TEST_F(TrainerFiles, SmokeRunWritesOneRecordAndCheckpoint) {
  const TrainData data = testing::tiny_data(10, 30, 1);
  RunConfig c = small_config(Method::kSslPop);
  c.epochs = 1;
  TrainOptions options;
  options.out_dir = dir_.string();
  const SeedRun run = train_seed(c, data, 3, options);
  ASSERT_EQ(run.epochs.size(), 1u);
  EXPECT_EQ(run.epochs[0].epoch, 1);
  EXPECT_EQ(run.epochs[0].metrics.size(), 2u);
  EXPECT_TRUE(std::isfinite(run.epochs[0].train_loss));
  const auto seed_dir = dir_ / "seed_3";
  EXPECT_TRUE(std::filesystem::exists(seed_dir / "model.ttm"));
  EXPECT_TRUE(std::filesystem::exists(seed_dir / "timing.jsonl"));
  std::ifstream log(seed_dir / "metrics.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) ++lines;
  EXPECT_EQ(lines, 1);
  const TwoTowerModel saved = load_checkpoint((seed_dir / "model.ttm").string());
  EXPECT_EQ(saved.num_items(), 30);
}

TEST_F(TrainerFiles, XirWritesOccurrenceCounts) {
  const TrainData data = testing::tiny_data(20, 30, 2);
  RunConfig c = small_config(Method::kXir);
  TrainOptions options;
  options.out_dir = dir_.string();
  train_seed(c, data, 3, options);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "seed_3" / "occurrence.tsv"));
}

TEST(TrainerTest, EveryMethodTrainsWithFiniteLoss) {
  const TrainData data = testing::tiny_data(40, 60, 3);
  for (Method m : {Method::kSsl, Method::kSslPop, Method::kMns, Method::kGTower, Method::kBir,
                   Method::kXir}) {
    const SeedRun run = train_seed(small_config(m), data, 3);
    ASSERT_EQ(run.epochs.size(), 2u) << method_name(m);
    for (double l : losses(run)) EXPECT_TRUE(std::isfinite(l)) << method_name(m);
    EXPECT_GT(run.epochs[1].steps, 0u);
  }
}

TEST(TrainerTest, FeatureTowerTrains) {
  TrainData data = testing::tiny_data(30, 40, 4);
  ItemFeatures f;
  f.cardinality = {4, 3};
  for (Index i = 0; i < 40; ++i) f.categories.push_back({1 + i % 3, 1 + i % 2});
  data.features = f;
  RunConfig c = small_config(Method::kXir);
  c.tower = "16,8";
  c.tower_id_dim = 8;
  c.tower_feature_dim = 4;
  const SeedRun run = train_seed(c, data, 3);
  for (double l : losses(run)) EXPECT_TRUE(std::isfinite(l));
  EXPECT_TRUE(run.model.has_tower());
}

TEST(TrainerTest, SameSeedReproducesTheLog) {
  const TrainData data = testing::tiny_data(30, 40, 5);
  for (Method m : {Method::kBir, Method::kXir, Method::kGTower}) {
    const SeedRun a = train_seed(small_config(m), data, 3);
    const SeedRun b = train_seed(small_config(m), data, 3);
    ASSERT_EQ(a.epochs.size(), b.epochs.size());
    for (std::size_t e = 0; e < a.epochs.size(); ++e) {
      EXPECT_EQ(metrics_json(a.epochs[e]).dump(), metrics_json(b.epochs[e]).dump());
    }
    const SeedRun other = train_seed(small_config(m), data, 4);
    EXPECT_NE(losses(a), losses(other));
  }
}

TEST(TrainerTest, XirWithZeroLambdaMatchesBir) {
  const TrainData data = testing::tiny_data(50, 80, 6);
  RunConfig bir = small_config(Method::kBir);
  bir.epochs = 3;
  bir.resample_size = 8;
  RunConfig xir = bir;
  xir.method = Method::kXir;
  xir.lambda = 0.0;
  const auto a = losses(train_seed(bir, data, 3));
  const auto b = losses(train_seed(xir, data, 3));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t e = 0; e < a.size(); ++e) EXPECT_NEAR(a[e], b[e], 1e-10);
}

TEST(TrainerTest, MnsWithoutUniformDrawsMatchesSslPop) {
  const TrainData data = testing::tiny_data(50, 80, 7);
  RunConfig pop = small_config(Method::kSslPop);
  pop.epochs = 3;
  RunConfig mns = pop;
  mns.method = Method::kMns;
  mns.mns_b_prime = 0;
  const auto a = losses(train_seed(pop, data, 3));
  const auto b = losses(train_seed(mns, data, 3));
  for (std::size_t e = 0; e < a.size(); ++e) EXPECT_NEAR(a[e], b[e], 1e-10);
}

TEST(TrainerTest, SmallResampleSizeSpendsLessGradientTime) {
  const TrainData data = testing::tiny_data(400, 600, 8);
  RunConfig full = small_config(Method::kBir);
  full.batch_size = 512;
  full.embedding_dim = 16;
  full.epochs = 1;
  full.eval_every = 100;
  RunConfig small = full;
  small.resample_size = full.batch_size / 64;
  auto seconds = [&](const RunConfig& c) {
    const SeedRun run = train_seed(c, data, 3);
    EXPECT_GT(run.epochs.front().gradient_wall_seconds, 0.0);
    return run.epochs.front().gradient_wall_seconds;
  };
  double a = INFINITY, b = INFINITY;
  for (int r = 0; r < 3; ++r) {
    a = std::min(a, seconds(full));
    b = std::min(b, seconds(small));
  }
  EXPECT_LT(b, a);
}

TEST(TrainerTest, XirEncodesTheCacheEveryStep) {
  const TrainData data = testing::tiny_data(64, 80, 8);
  RunConfig bir = small_config(Method::kBir);
  RunConfig xir = small_config(Method::kXir);
  xir.cache_size = 5;
  const SeedRun a = train_seed(bir, data, 3);
  const SeedRun b = train_seed(xir, data, 3);
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    ASSERT_EQ(a.epochs[e].steps, b.epochs[e].steps);
    EXPECT_EQ(b.epochs[e].items_encoded - a.epochs[e].items_encoded, 5 * b.epochs[e].steps);
  }
}

TEST(TrainerTest, EvaluationScheduleIncludesFinalEpoch) {
  const TrainData data = testing::tiny_data(20, 30, 9);
  RunConfig c = small_config(Method::kSsl);
  c.epochs = 5;
  c.eval_every = 2;
  const SeedRun run = train_seed(c, data, 3);
  std::vector<int> evaluated;
  for (const auto& e : run.epochs) {
    if (!e.metrics.empty()) evaluated.push_back(e.epoch);
  }
  EXPECT_EQ(evaluated, (std::vector<int>{2, 4, 5}));
}

TEST(TrainerTest, SummaryAveragesSeeds) {
  const TrainData data = testing::tiny_data(20, 30, 10);
  RunConfig c = small_config(Method::kSslPop);
  c.seeds = {1, 2};
  const RunSummary s = train_all_seeds(c, data);
  ASSERT_EQ(s.runs.size(), 2u);
  const double a = s.runs[0].epochs.back().metrics[0].ndcg;
  const double b = s.runs[1].epochs.back().metrics[0].ndcg;
  EXPECT_NEAR(s.mean[0].ndcg, 0.5 * (a + b), 1e-12);
  EXPECT_NEAR(s.stddev[0].ndcg, 0.5 * std::abs(a - b), 1e-12);
}

TEST(SweepTest, ConfigValues) {
  RunConfig base = small_config(Method::kXir);
  EXPECT_DOUBLE_EQ(sweep_config(base, SweepAxis::kLambda, "0.25").lambda, 0.25);
  EXPECT_EQ(*sweep_config(base, SweepAxis::kCacheSize, "2x").cache_size, 32);
  EXPECT_EQ(sweep_config(base, SweepAxis::kBatchSize, "64").batch_size, 64);
  EXPECT_EQ(*sweep_config(base, SweepAxis::kResampleSize, "0.5x").resample_size, 8);
  EXPECT_THROW(sweep_config(base, SweepAxis::kLambda, "abc"), ValidationError);
  EXPECT_EQ(parse_sweep_axis(sweep_axis_name(SweepAxis::kCacheSize)), SweepAxis::kCacheSize);
  EXPECT_THROW(parse_sweep_axis("depth"), ValidationError);
}

TEST(SweepTest, InvalidValueIsRejectedBeforeTraining) {
  const TrainData data = testing::tiny_data(20, 30, 11);
  RunConfig base = small_config(Method::kXir);
  base.epochs = 1;
  EXPECT_THROW(run_sweep(base, SweepAxis::kLambda, {"0.5", "2"}, data, std::nullopt),
               ValidationError);
  const auto rows = run_sweep(base, SweepAxis::kLambda, {"0", "0.5"}, data, std::nullopt);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].summary.has_value());
  EXPECT_TRUE(rows[1].summary.has_value());
  EXPECT_NE(format_sweep_table(rows, 5).find("0.5"), std::string::npos);
}

}  // namespace
}  // namespace xir
