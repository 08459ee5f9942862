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

#include "xir/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "xir/adam.h"
#include "xir/checkpoint.h"
#include "xir/freq_estimator.h"
#include "xir/objective.h"
#include "xir/random.h"
#include "xir/samplers.h"

namespace xir {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Independent random streams per purpose.
enum Stream : std::uint64_t {
  kInitStream = 1,
  kShuffleStream,
  kBatchResampleStream,
  kCacheResampleStream,
  kCacheInitStream,
  kCacheRefreshStream,
  kMnsStream,
  kFreqStream,
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

nlohmann::json metrics_object(const std::vector<CutoffMetrics>& m, bool ndcg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& c : m) j[std::to_string(c.k)] = ndcg ? c.ndcg : c.recall;
  return j;
}

void write_atomically(const fs::path& path, const std::function<void(const std::string&)>& write) {
  const fs::path tmp = path.string() + ".tmp";
  write(tmp.string());
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace '" + path.string() + "': " + ec.message());
}

class LineWriter {
 public:
  explicit LineWriter(const fs::path& path) : path_(path), out_(path, std::ios::trunc) {
    if (!out_) throw IoError("cannot write '" + path.string() + "'");
  }
  void write(const nlohmann::json& j) {
    out_ << j.dump() << '\n';
    out_.flush();
    if (!out_) throw IoError("write failed for '" + path_.string() + "'");
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

std::vector<Interaction> flatten(const InteractionStore& store) {
  std::vector<Interaction> pairs;
  for (Index u = 0; u < store.num_users(); ++u) {
    for (const auto& p : store.user_range(u)) pairs.push_back(p);
  }
  return pairs;
}

void shuffle_pairs(std::vector<Interaction>& pairs, Rng& rng) {
  for (std::size_t i = pairs.size(); i > 1; --i) {
    std::swap(pairs[i - 1], pairs[rng.below(i)]);
  }
}

bool evaluated_epoch(const RunConfig& config, int epoch) {
  return epoch % config.eval_every == 0 || epoch == config.epochs;
}

}  // namespace

nlohmann::json metrics_json(const EpochRecord& r) {
  nlohmann::json j = {{"seed", r.seed}, {"epoch", r.epoch}, {"train_loss", r.train_loss}};
  if (!r.metrics.empty()) {
    j["ndcg"] = metrics_object(r.metrics, true);
    j["recall"] = metrics_object(r.metrics, false);
  }
  return j;
}

nlohmann::json timing_json(const EpochRecord& r) {
  return {{"seed", r.seed},
          {"epoch", r.epoch},
          {"wall_seconds", r.wall_seconds},
          {"gradient_wall_seconds", r.gradient_wall_seconds},
          {"steps", r.steps},
          {"items_encoded", r.items_encoded}};
}

TwoTowerModel initial_model(const RunConfig& config, const TrainData& data, std::uint64_t seed) {
  if (data.test.num_users() != data.train.num_users() ||
      data.test.num_items() != data.train.num_items()) {
    throw ValidationError("train and test must share one user and item index space");
  }
  std::optional<ItemTowerConfig> tower;
  if (config.tower) {
    ItemTowerConfig t;
    t.mlp = parse_mlp_spec(*config.tower);
    t.id_dim = config.tower_id_dim;
    t.feature_dim = config.tower_feature_dim;
    if (data.features) t.feature_cardinality = data.features->cardinality;
    tower = t;
  }
  TwoTowerModel model(data.train.num_users(), data.train.num_items(), config.embedding_dim, tower,
                      derive_seed({seed, kInitStream}));
  if (config.tower && data.features) model.set_item_features(*data.features);
  if (config.float_parameters) round_parameters_to_float(model);
  return model;
}

SeedRun train_seed(const RunConfig& config, const TrainData& data, std::uint64_t seed,
                   const TrainOptions& options) {
  config.validate();
  if (data.train.size() == 0) throw ValidationError("training set is empty");
  SeedRun run;
  run.seed = seed;
  run.model = initial_model(config, data, seed);
  TwoTowerModel& model = run.model;
  const Index n = model.num_items();

  std::optional<fs::path> dir;
  std::optional<LineWriter> metrics_log, timing_log;
  if (options.out_dir) {
    dir = fs::path(*options.out_dir) / ("seed_" + std::to_string(seed));
    std::error_code ec;
    fs::create_directories(*dir, ec);
    if (ec) throw IoError("cannot create '" + dir->string() + "': " + ec.message());
    metrics_log.emplace(*dir / "metrics.jsonl");
    timing_log.emplace(*dir / "timing.jsonl");
  }

  const PopularityTable pop = compute_popularity(data.train, config.pop_epsilon);
  AdamConfig adam_config;
  adam_config.learning_rate = config.learning_rate;
  adam_config.weight_decay = config.weight_decay;
  adam_config.lr_decay_factor = config.lr_decay_factor;
  adam_config.lr_decay_every = config.lr_decay_every;
  adam_config.round_to_float = config.float_parameters;
  TwoTowerAdam adam(model, adam_config);

  Rng batch_rng(derive_seed({seed, kBatchResampleStream}));
  Rng cache_rng(derive_seed({seed, kCacheResampleStream}));
  Rng refresh_rng(derive_seed({seed, kCacheRefreshStream}));
  Rng mns_rng(derive_seed({seed, kMnsStream}));
  std::optional<SampleCache> cache;
  if (config.method == Method::kXir) {
    Rng init(derive_seed({seed, kCacheInitStream}));
    cache.emplace(n, config.effective_cache_size(), init);
  }
  std::optional<StreamFreqEstimator> freq;
  if (config.method == Method::kGTower) {
    freq.emplace(n, 5, 0, 0.95, derive_seed({seed, kFreqStream}));
  }
  const Index m = config.effective_resample_size();

  std::vector<Interaction> pairs = flatten(data.train);
  ModelGradients grads = model.make_gradients();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    Rng shuffle_rng(derive_seed({seed, kShuffleStream, static_cast<std::uint64_t>(epoch)}));
    shuffle_pairs(pairs, shuffle_rng);
    EpochRecord record;
    record.seed = seed;
    record.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t rows = 0;

    for (std::size_t begin = 0; begin < pairs.size(); begin += config.batch_size) {
      if (options.max_steps_per_epoch > 0 && record.steps >= options.max_steps_per_epoch) break;
      const std::size_t end = std::min(pairs.size(), begin + config.batch_size);
      BatchPlan plan;
      std::vector<Index> items;
      for (std::size_t r = begin; r < end; ++r) {
        plan.users.push_back(pairs[r].user_id);
        items.push_back(pairs[r].item_id);
      }
      const Index b = static_cast<Index>(items.size());
      plan.positive_columns.resize(b);
      std::iota(plan.positive_columns.begin(), plan.positive_columns.end(), 0);

      const std::uint64_t encoded_before = model.items_encoded();
      const auto step_start = Clock::now();
      switch (config.method) {
        case Method::kSsl:
          plan.kind = LossKind::kSampledSoftmax;
          plan.pool = items;
          plan.log_proposal.assign(b, 0.0);
          break;
        case Method::kSslPop:
          plan.kind = LossKind::kSampledSoftmax;
          plan.pool = items;
          for (Index i : items) plan.log_proposal.push_back(pop.log_prob[i]);
          break;
        case Method::kMns: {
          MnsCandidates cand = mns_candidates(items, config.effective_b_prime(), pop, mns_rng);
          plan.kind = LossKind::kSampledSoftmax;
          plan.pool = std::move(cand.items);
          plan.log_proposal = std::move(cand.log_proposal);
          break;
        }
        case Method::kGTower: {
          plan.kind = LossKind::kSampledSoftmax;
          plan.pool = items;
          for (double p : freq->update_and_estimate(items)) plan.log_proposal.push_back(std::log(p));
          break;
        }
        case Method::kBir:
          plan.kind = LossKind::kBir;
          plan.pool = items;
          break;
        case Method::kXir:
          plan.kind = LossKind::kXir;
          plan.pool = items;
          plan.cache.assign(cache->items().begin(), cache->items().end());
          plan.lambda = config.lambda;
          break;
      }
      const ForwardPass fwd = forward_pass(model, plan);
      if (plan.kind == LossKind::kBir || plan.kind == LossKind::kXir) {
        plan.batch_resampled = bir_resample(fwd.scores, items, pop, m, batch_rng);
      }
      if (plan.kind == LossKind::kXir) {
        plan.cache_resampled = cache_resample(fwd.cache_scores, *cache, pop, m, cache_rng);
      }
      const LossBatchOutput loss = compute_loss(fwd, plan);
      if (!std::isfinite(loss.loss)) {
        throw RuntimeAbort("non-finite loss at epoch " + std::to_string(epoch) + "; training aborted");
      }
      grads.clear();
      backward_pass(model, plan, fwd, loss, grads);
      if (plan.kind == LossKind::kXir) {
        const std::vector<ResampleSet> all[] = {std::move(plan.batch_resampled),
                                                std::move(plan.cache_resampled)};
        update_occurrence_and_cache(*cache, all, refresh_rng, config.occurrence_counting);
      }
      record.gradient_wall_seconds += seconds_since(step_start);
      record.items_encoded += model.items_encoded() - encoded_before;

      adam.step(model, grads, epoch - 1);
      loss_sum += loss.loss * b;
      rows += b;
      ++record.steps;
    }
    record.train_loss = rows > 0 ? loss_sum / static_cast<double>(rows) : 0.0;
    if (!model.all_finite()) {
      throw RuntimeAbort("non-finite parameters at epoch " + std::to_string(epoch) +
                         "; training aborted");
    }
    if (evaluated_epoch(config, epoch)) {
      record.metrics = evaluate_model(model, data.train, data.test, config.eval_cutoffs).cutoffs;
    }
    record.wall_seconds = seconds_since(epoch_start);
    if (dir) {
      write_atomically(*dir / "model.ttm",
                       [&](const std::string& p) { save_checkpoint(p, model); });
      if (cache) {
        write_atomically(*dir / "occurrence.tsv",
                         [&](const std::string& p) { cache->write_occurrence(p); });
      }
      metrics_log->write(metrics_json(record));
      timing_log->write(timing_json(record));
    }
    run.epochs.push_back(record);
  }
  return run;
}

RunSummary train_all_seeds(const RunConfig& config, const TrainData& data,
                           const TrainOptions& options) {
  config.validate();
  RunSummary s;
  for (std::uint64_t seed : config.seeds) s.runs.push_back(train_seed(config, data, seed, options));
  for (int k : config.eval_cutoffs) {
    CutoffMetrics mean{k, 0.0, 0.0}, sq{k, 0.0, 0.0};
    for (const auto& r : s.runs) {
      for (const auto& c : r.epochs.back().metrics) {
        if (c.k != k) continue;
        mean.ndcg += c.ndcg;
        mean.recall += c.recall;
        sq.ndcg += c.ndcg * c.ndcg;
        sq.recall += c.recall * c.recall;
      }
    }
    const double count = static_cast<double>(s.runs.size());
    mean.ndcg /= count;
    mean.recall /= count;
    CutoffMetrics sd{k, std::sqrt(std::max(sq.ndcg / count - mean.ndcg * mean.ndcg, 0.0)),
                     std::sqrt(std::max(sq.recall / count - mean.recall * mean.recall, 0.0))};
    s.mean.push_back(mean);
    s.stddev.push_back(sd);
  }
  return s;
}

nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : s.runs) {
    nlohmann::json j = metrics_json(r.epochs.back());
    if (r.failure) j["failure"] = *r.failure;
    runs.push_back(j);
  }
  return {{"runs", runs},
          {"mean", {{"ndcg", metrics_object(s.mean, true)}, {"recall", metrics_object(s.mean, false)}}},
          {"stddev",
           {{"ndcg", metrics_object(s.stddev, true)}, {"recall", metrics_object(s.stddev, false)}}}};
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "lambda") return SweepAxis::kLambda;
  if (name == "cache_size") return SweepAxis::kCacheSize;
  if (name == "batch_size") return SweepAxis::kBatchSize;
  if (name == "resample_size") return SweepAxis::kResampleSize;
  throw ValidationError("unknown sweep axis '" + name + "'");
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kLambda: return "lambda";
    case SweepAxis::kCacheSize: return "cache_size";
    case SweepAxis::kBatchSize: return "batch_size";
    case SweepAxis::kResampleSize: return "resample_size";
  }
  throw LogicError("unnamed sweep axis");
}

RunConfig sweep_config(const RunConfig& base, SweepAxis axis, const std::string& value) {
  const bool relative = !value.empty() && value.back() == 'x';
  const std::string number = relative ? value.substr(0, value.size() - 1) : value;
  double x = 0.0;
  std::size_t used = 0;
  try {
    x = std::stod(number, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != number.size() || !std::isfinite(x)) {
    throw ValidationError("sweep value '" + value + "' is not a number");
  }
  if (relative && axis == SweepAxis::kLambda) {
    throw ValidationError("lambda values cannot be relative");
  }
  RunConfig c = base;
  const double size = relative ? x * base.batch_size : x;
  const auto as_size = [&]() {
    if (size < 1.0 || size != std::floor(size)) {
      throw ValidationError("sweep value '" + value + "' is not a positive integer size");
    }
    return static_cast<Index>(size);
  };
  switch (axis) {
    case SweepAxis::kLambda: c.lambda = x; break;
    case SweepAxis::kCacheSize: c.cache_size = as_size(); break;
    case SweepAxis::kBatchSize: c.batch_size = as_size(); break;
    case SweepAxis::kResampleSize: c.resample_size = as_size(); break;
  }
  c.validate();
  return c;
}

std::vector<SweepRow> run_sweep(const RunConfig& base, SweepAxis axis,
                                const std::vector<std::string>& values, const TrainData& data,
                                const std::optional<std::string>& out_dir) {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  base.validate();
  std::vector<RunConfig> configs;
  for (const auto& v : values) configs.push_back(sweep_config(base, axis, v));
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRow row;
    row.value = values[i];
    TrainOptions options;
    if (out_dir) {
      options.out_dir = (fs::path(*out_dir) / (sweep_axis_name(axis) + "_" + values[i])).string();
    }
    try {
      row.summary = train_all_seeds(configs[i], data, options);
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_sweep_table(const std::vector<SweepRow>& rows, int cutoff) {
  std::ostringstream out;
  out.precision(6);
  out << "value\tndcg@" << cutoff << "\trecall@" << cutoff << "\tstatus\n";
  for (const auto& row : rows) {
    out << row.value << '\t';
    if (row.summary) {
      const auto it = std::find_if(row.summary->mean.begin(), row.summary->mean.end(),
                                   [&](const CutoffMetrics& c) { return c.k == cutoff; });
      if (it == row.summary->mean.end()) {
        out << "-\t-\tno metrics at cutoff\n";
      } else {
        out << std::fixed << it->ndcg << '\t' << it->recall << "\tok\n";
        out.unsetf(std::ios::fixed);
      }
    } else {
      out << "-\t-\tfailed: " << row.error.value_or("unknown") << '\n';
    }
  }
  return out.str();
}

}  // namespace xir
