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

#ifndef XIR_TRAINER_H_
#define XIR_TRAINER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xir/config.h"
#include "xir/data.h"
#include "xir/metrics.h"
#include "xir/model.h"

namespace xir {

struct TrainData {
  InteractionStore train;
  InteractionStore test;
  std::optional<ItemFeatures> features;  // required when the config has a tower
};

struct EpochRecord {
  std::uint64_t seed = 0;
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  // Empty on epochs that were not evaluated.
  std::vector<CutoffMetrics> metrics;
  double wall_seconds = 0.0;
  double gradient_wall_seconds = 0.0;
  std::uint64_t steps = 0;
  std::uint64_t items_encoded = 0;  // item-tower encodes during training steps
};

// Deterministic part of the record: no wall times.
nlohmann::json metrics_json(const EpochRecord& r);
nlohmann::json timing_json(const EpochRecord& r);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  TwoTowerModel model;
  std::optional<std::string> failure;
};

struct TrainOptions {
  // When set, every seed writes seed_<s>/{metrics.jsonl, timing.jsonl,
  // model.ttm} below it, and XIR also writes occurrence.tsv.
  std::optional<std::string> out_dir;
  // Stop after this many steps per epoch (0: no limit). Used for timing.
  std::uint64_t max_steps_per_epoch = 0;
};

TwoTowerModel initial_model(const RunConfig& config, const TrainData& data, std::uint64_t seed);

// Trains one seed. Throws RuntimeAbort on non-finite values; the last
// written checkpoint is left untouched in that case.
SeedRun train_seed(const RunConfig& config, const TrainData& data, std::uint64_t seed,
                   const TrainOptions& options = {});

struct RunSummary {
  std::vector<SeedRun> runs;
  // Mean and population standard deviation of the final metrics over seeds.
  std::vector<CutoffMetrics> mean;
  std::vector<CutoffMetrics> stddev;
};

RunSummary train_all_seeds(const RunConfig& config, const TrainData& data,
                           const TrainOptions& options = {});
nlohmann::json to_json(const RunSummary& s);

enum class SweepAxis { kLambda, kCacheSize, kBatchSize, kResampleSize };
SweepAxis parse_sweep_axis(const std::string& name);
std::string sweep_axis_name(SweepAxis axis);

struct SweepRow {
  std::string value;
  std::optional<RunSummary> summary;
  std::optional<std::string> error;
};

// Values are numbers; for size axes "<f>x" means f times the base batch size.
RunConfig sweep_config(const RunConfig& base, SweepAxis axis, const std::string& value);

std::vector<SweepRow> run_sweep(const RunConfig& base, SweepAxis axis,
                                const std::vector<std::string>& values, const TrainData& data,
                                const std::optional<std::string>& out_dir);
std::string format_sweep_table(const std::vector<SweepRow>& rows, int cutoff);

}  // namespace xir

#endif  // XIR_TRAINER_H_
