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

#include "commands.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xir/checkpoint.h"
#include "xir/config.h"
#include "xir/data.h"
#include "xir/diagnostics.h"
#include "xir/features.h"
#include "xir/metrics.h"
#include "xir/synthetic.h"
#include "xir/trainer.h"

namespace xir::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum class FieldKind { kText, kValue, kList };

struct FieldSpec {
  const char* field;
  FieldKind kind;
  const char* help;
};

constexpr FieldSpec kRunFields[] = {
    {"method", FieldKind::kText, "ssl, ssl_pop, mns, gtower, bir or xir"},
    {"batch_size", FieldKind::kValue, "pairs per mini-batch"},
    {"embedding_dim", FieldKind::kValue, "embedding width k"},
    {"learning_rate", FieldKind::kValue, "Adam step size"},
    {"lr_decay_factor", FieldKind::kValue, "step size multiplier"},
    {"lr_decay_every", FieldKind::kValue, "epochs between decays"},
    {"weight_decay", FieldKind::kValue, "l2 coefficient"},
    {"epochs", FieldKind::kValue, "training epochs"},
    {"lambda", FieldKind::kValue, "cache term weight (xir)"},
    {"cache_size", FieldKind::kValue, "cache size C (xir)"},
    {"resample_size", FieldKind::kValue, "draws per query (bir, xir)"},
    {"mns_b_prime", FieldKind::kValue, "uniform negatives B' (mns)"},
    {"seeds", FieldKind::kList, "one run per seed"},
    {"eval_cutoffs", FieldKind::kList, "metric cutoffs"},
    {"pop_epsilon", FieldKind::kValue, "popularity smoothing"},
    {"eval_every", FieldKind::kValue, "epochs between evaluations"},
    {"tower", FieldKind::kText, "item MLP tower, e.g. 64,32:relu"},
    {"tower_id_dim", FieldKind::kValue, "id embedding width inside the tower"},
    {"tower_feature_dim", FieldKind::kValue, "feature embedding width"},
    {"occurrence_counting", FieldKind::kText, "multiset or set (xir)"},
    {"float_parameters", FieldKind::kValue, "store parameters at float precision"},
};

std::string kebab(std::string s) {
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return s;
}

json parse_value(const std::string& field, const std::string& raw) {
  try {
    return json::parse(raw);
  } catch (const json::exception&) {
    throw ValidationError("--" + kebab(field) + " expects a number or boolean, got '" + raw + "'");
  }
}

class RunFlags {
 public:
  void add_to(CLI::App& app) {
    app.add_option("--config", config_path_, "flat JSON run configuration");
    for (const auto& f : kRunFields) {
      CLI::Option* opt = f.kind == FieldKind::kList
                             ? app.add_option("--" + kebab(f.field), lists_[f.field], f.help)
                             : app.add_option("--" + kebab(f.field), scalars_[f.field], f.help);
      options_.emplace_back(f, opt);
    }
  }

  RunConfig build() const {
    RunConfig config = config_path_.empty() ? RunConfig{} : load_run_config(config_path_);
    json overrides = json::object();
    for (const auto& [f, opt] : options_) {
      if (opt->count() == 0) continue;
      switch (f.kind) {
        case FieldKind::kText:
          overrides[f.field] = scalars_.at(f.field);
          break;
        case FieldKind::kValue:
          overrides[f.field] = parse_value(f.field, scalars_.at(f.field));
          break;
        case FieldKind::kList: {
          json list = json::array();
          for (const auto& v : lists_.at(f.field)) list.push_back(parse_value(f.field, v));
          overrides[f.field] = list;
          break;
        }
      }
    }
    apply_json(config, overrides);
    apply_seed_override(config, std::getenv(kSeedEnvVar));
    config.validate();
    return config;
  }

 private:
  std::string config_path_;
  std::map<std::string, std::string> scalars_;
  std::map<std::string, std::vector<std::string>> lists_;
  std::vector<std::pair<FieldSpec, CLI::Option*>> options_;
};

struct DataFlags {
  std::string train;
  std::string test;
  std::string item_features;
  int user_col = 0;
  int item_col = 1;

  void add_to(CLI::App& app) {
    app.add_option("--train", train, "train interactions")->required();
    app.add_option("--test", test, "test interactions")->required();
    app.add_option("--item-features", item_features, "item feature file");
    add_columns(app);
  }
  void add_columns(CLI::App& app) {
    app.add_option("--user-col", user_col, "user column (0-based)");
    app.add_option("--item-col", item_col, "item column (0-based)");
  }
  ColumnSpec columns() const {
    ColumnSpec spec;
    spec.user_column = user_col;
    spec.item_column = item_col;
    return spec;
  }
};

struct LoadedData {
  TrainData data;
  Vocabulary users;
  Vocabulary items;
};

LoadedData load_data(const DataFlags& flags, std::ostream& err) {
  LoadedData out;
  const ColumnSpec spec = flags.columns();
  const LoadResult train = load_interactions(flags.train, spec, out.users, out.items);
  const LoadResult test = load_interactions(flags.test, spec, out.users, out.items);
  for (const auto* r : {&train, &test}) {
    if (r->malformed_lines > 0) {
      err << "warning: skipped " << r->malformed_lines << " malformed line(s)\n";
    }
  }
  out.data.train = with_dimensions(train.store, out.users.size(), out.items.size());
  out.data.test = with_dimensions(test.store, out.users.size(), out.items.size());
  if (!flags.item_features.empty()) {
    out.data.features = load_item_features(flags.item_features, out.items);
  }
  return out;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

json metrics_report(const EvaluationResult& r) {
  json ndcg = json::object(), recall = json::object();
  for (const auto& c : r.cutoffs) {
    ndcg[std::to_string(c.k)] = c.ndcg;
    recall[std::to_string(c.k)] = c.recall;
  }
  return {{"users_evaluated", r.users_evaluated}, {"ndcg", ndcg}, {"recall", recall}};
}

struct TrainCommand {
  RunFlags run;
  DataFlags data;
  std::string out_dir;

  void add_to(CLI::App& app) {
    run.add_to(app);
    data.add_to(app);
    app.add_option("--out", out_dir, "output directory")->required();
  }

  void execute(std::ostream& out, std::ostream& err) const {
    const RunConfig config = run.build();
    LoadedData loaded = load_data(data, err);
    make_dir(out_dir);
    write_json(fs::path(out_dir) / "config.json", to_json(config));
    loaded.users.save((fs::path(out_dir) / "users.vocab").string());
    loaded.items.save((fs::path(out_dir) / "items.vocab").string());
    TrainOptions options;
    options.out_dir = out_dir;
    const RunSummary summary = train_all_seeds(config, loaded.data, options);
    const json report = to_json(summary);
    write_json(fs::path(out_dir) / "summary.json", report);
    out << report.dump(2) << '\n';
  }
};

struct EvaluateCommand {
  std::string checkpoint;
  DataFlags data;
  std::vector<int> cutoffs = {10, 20};

  void add_to(CLI::App& app) {
    app.add_option("--checkpoint", checkpoint, "model checkpoint")->required();
    data.add_to(app);
    app.add_option("--cutoffs", cutoffs, "metric cutoffs");
  }

  void execute(std::ostream& out, std::ostream& err) const {
    TwoTowerModel model = load_checkpoint(checkpoint);
    LoadedData loaded = load_data(data, err);
    const InteractionStore& train = loaded.data.train;
    if (train.num_users() > model.num_users() || train.num_items() > model.num_items()) {
      throw ValidationError("interaction files have more users or items than the checkpoint");
    }
    const InteractionStore train_w = with_dimensions(train, model.num_users(), model.num_items());
    const InteractionStore test_w =
        with_dimensions(loaded.data.test, model.num_users(), model.num_items());
    if (model.has_tower() && !model.tower_config()->feature_cardinality.empty()) {
      if (!loaded.data.features) throw ValidationError("checkpoint needs --item-features");
      ItemFeatures f = *loaded.data.features;
      f.categories.resize(model.num_items(), std::vector<Index>(f.num_features(), 0));
      model.set_item_features(std::move(f));
    }
    out << metrics_report(evaluate_model(model, train_w, test_w, cutoffs)).dump(2) << '\n';
  }
};

struct DiagnoseCommand {
  CLI::App* lemma = nullptr;
  CLI::App* theorem = nullptr;
  CLI::App* bias = nullptr;
  std::uint64_t seed = 1;
  Index n = 0;
  std::uint64_t draws = 1000000;
  bool uniform = false;
  double zipf = 1.0;
  std::vector<Index> batch_sizes = {64, 256, 1024, 4096};
  std::uint64_t trials = 100000;
  Index batch_size = 256;
  Index resample_size = 0;
  Index dim = 8;
  double scale = 3.0;
  bool enumerate = false;

  void add_to(CLI::App& app) {
    app.require_subcommand(1);
    lemma = app.add_subcommand("lemma31", "two-stage resampling against uniform");
    theorem = app.add_subcommand("theorem31", "in-batch resampling against the softmax");
    bias = app.add_subcommand("grad_bias", "resampled gradient bias and bound terms");
    for (CLI::App* sub : {lemma, theorem, bias}) {
      sub->add_option("--seed", seed, "random seed");
      sub->add_option("--n", n, "number of items");
    }
    lemma->add_option("--draws", draws, "number of draws");
    lemma->add_flag("--uniform", uniform, "use a uniform P");
    theorem->add_option("--zipf", zipf, "popularity exponent");
    theorem->add_option("--batch-sizes", batch_sizes, "batch sizes");
    theorem->add_option("--trials", trials, "trials per batch size");
    bias->add_option("--zipf", zipf, "popularity exponent");
    bias->add_option("--batch-size", batch_size, "batch size");
    bias->add_option("--resample-size", resample_size, "draws per trial (default: batch size)");
    bias->add_option("--trials", trials, "trials");
    bias->add_option("--dim", dim, "embedding width");
    bias->add_option("--scale", scale, "embedding scale");
    bias->add_flag("--uniform", uniform, "zero scores and uniform popularity");
    bias->add_flag("--enumerate", enumerate, "use the whole corpus as the batch");
  }

  void execute(std::ostream& out) const {
    if (const char* env = std::getenv(kSeedEnvVar)) {
      RunConfig probe;
      apply_seed_override(probe, env);
      if (env[0] != '\0') return run(out, probe.seeds.front());
    }
    run(out, seed);
  }

  void run(std::ostream& out, std::uint64_t s) const {
    Rng rng(s);
    json report;
    if (lemma->parsed()) {
      const Index items = n > 0 ? n : 100;
      std::vector<double> p(items, 1.0 / items);
      if (!uniform) {
        double total = 0.0;
        for (auto& x : p) total += (x = 0.05 + rng.uniform());
        for (auto& x : p) x /= total;
      }
      report = to_json(verify_lemma31(p, draws, rng));
      report["kind"] = "lemma31";
    } else if (theorem->parsed()) {
      const Index items = n > 0 ? n : 1000;
      const std::vector<double> scores = normal_scores(items, rng);
      const auto reports = verify_theorem31(scores, zipf_popularity(items, zipf), batch_sizes,
                                            trials, rng);
      bool non_increasing = true;
      for (std::size_t i = 1; i < reports.size(); ++i) {
        non_increasing = non_increasing &&
                         reports[i].report.tv_distance <= 1.1 * reports[i - 1].report.tv_distance;
      }
      report = {{"kind", "theorem31"}, {"reports", to_json(reports)},
                {"non_increasing", non_increasing}};
    } else {
      const Index items = n > 0 ? n : 500;
      const TwoTowerModel model = bias_instance(items, dim, scale, uniform, s);
      const PopularityTable pop = zipf_popularity(items, uniform ? 0.0 : zipf);
      GradientBiasOptions options;
      options.resample_size = resample_size;
      options.enumerate_batch = enumerate;
      report = to_json(gradient_bias(model, 0, 0, pop, batch_size, trials, rng, options));
      report["kind"] = "grad_bias";
    }
    out << report.dump(2) << '\n';
  }
};

struct SweepCommand {
  RunFlags run;
  DataFlags data;
  std::string axis;
  std::vector<std::string> values;
  std::string out_dir;

  void add_to(CLI::App& app) {
    run.add_to(app);
    data.add_to(app);
    app.add_option("--axis", axis, "lambda, cache_size, batch_size or resample_size")->required();
    app.add_option("--values", values, "values; sizes may be written as multiples like 2x");
    app.add_option("--out", out_dir, "output directory");
  }

  void execute(std::ostream& out, std::ostream& err) const {
    const RunConfig base = run.build();
    const SweepAxis a = parse_sweep_axis(axis);
    if (values.empty()) throw ValidationError("sweep needs at least one value");
    for (const auto& v : values) sweep_config(base, a, v);
    const LoadedData loaded = load_data(data, err);
    std::optional<std::string> dir;
    if (!out_dir.empty()) {
      make_dir(out_dir);
      dir = out_dir;
    }
    const auto rows = run_sweep(base, a, values, loaded.data, dir);
    const bool has_ten = std::find(base.eval_cutoffs.begin(), base.eval_cutoffs.end(), 10) !=
                         base.eval_cutoffs.end();
    const std::string table = format_sweep_table(rows, has_ten ? 10 : base.eval_cutoffs.front());
    if (dir) {
      json j = json::array();
      for (const auto& r : rows) {
        json row = {{"value", r.value}};
        if (r.summary) row["summary"] = to_json(*r.summary);
        if (r.error) row["error"] = *r.error;
        j.push_back(row);
      }
      write_json(fs::path(*dir) / "sweep.json", j);
      std::ofstream(fs::path(*dir) / "sweep.tsv") << table;
    }
    out << table;
  }
};

struct SplitCommand {
  std::string input;
  std::string out_dir;
  double ratio = 0.8;
  std::uint64_t seed = 1;
  DataFlags columns;
  std::optional<int> rating_col;
  std::optional<double> rating_threshold;

  void add_to(CLI::App& app) {
    app.add_option("--input", input, "interaction file")->required();
    app.add_option("--out-dir", out_dir, "output directory")->required();
    app.add_option("--ratio", ratio, "train fraction per user");
    app.add_option("--seed", seed, "split seed");
    columns.add_columns(app);
    app.add_option("--rating-col", rating_col, "keep rows whose rating passes the threshold");
    app.add_option("--rating-threshold", rating_threshold, "default: mean rating");
  }

  void execute(std::ostream& out) const {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("--ratio must lie in (0, 1)");
    ColumnSpec spec = columns.columns();
    spec.rating_column = rating_col;
    spec.rating_threshold = rating_threshold;
    Vocabulary users, items;
    const LoadResult loaded = load_interactions(input, spec, users, items);
    const auto [train, test] = split_per_user(loaded.store, ratio, seed);
    make_dir(out_dir);
    const fs::path dir(out_dir);
    write_interactions((dir / "train.tsv").string(), train, users, items);
    write_interactions((dir / "test.tsv").string(), test, users, items);
    users.save((dir / "users.vocab").string());
    items.save((dir / "items.vocab").string());
    out << json{{"users", users.size()},
                {"items", items.size()},
                {"train", train.size()},
                {"test", test.size()},
                {"malformed_lines", loaded.malformed_lines},
                {"filtered_lines", loaded.filtered_lines}}
               .dump(2)
        << '\n';
  }
};

struct SynthCommand {
  SyntheticConfig config;
  std::string out_dir;

  void add_to(CLI::App& app) {
    app.add_option("--out-dir", out_dir, "output directory")->required();
    app.add_option("--users", config.num_users, "number of users");
    app.add_option("--items", config.num_items, "number of items");
    app.add_option("--mean-interactions", config.mean_interactions, "mean items per user");
    app.add_option("--features", config.num_item_features, "categorical item features");
    app.add_option("--latent-dim", config.latent_dim, "ground-truth factor width");
    app.add_option("--affinity", config.affinity, "weight of the factor score against popularity");
    app.add_option("--zipf", config.zipf_exponent, "popularity exponent");
    app.add_option("--seed", config.seed, "generator seed");
  }

  void execute(std::ostream& out) const {
    make_dir(out_dir);
    const SyntheticDataset data = make_synthetic(config);
    const fs::path dir(out_dir);
    write_synthetic(data, (dir / "interactions.tsv").string(),
                    (dir / "item_features.tsv").string());
    out << json{{"users", data.num_users}, {"items", data.num_items},
                {"interactions", data.pairs.size()}}
               .dump(2)
        << '\n';
  }
};

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-tower retriever training, evaluation and diagnostics"};
  app.require_subcommand(1);
  TrainCommand train;
  EvaluateCommand evaluate;
  DiagnoseCommand diagnose;
  SweepCommand sweep;
  SplitCommand split;
  SynthCommand synth;
  CLI::App* train_app = app.add_subcommand("train", "train one run per seed");
  CLI::App* evaluate_app = app.add_subcommand("evaluate", "evaluate a checkpoint");
  CLI::App* diagnose_app = app.add_subcommand("diagnose", "sampling and gradient diagnostics");
  CLI::App* sweep_app = app.add_subcommand("sweep", "train over a list of values");
  CLI::App* split_app = app.add_subcommand("split", "per-user train/test split");
  CLI::App* synth_app = app.add_subcommand("synth", "generate a synthetic dataset");
  train.add_to(*train_app);
  evaluate.add_to(*evaluate_app);
  diagnose.add_to(*diagnose_app);
  sweep.add_to(*sweep_app);
  split.add_to(*split_app);
  synth.add_to(*synth_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }
  try {
    if (train_app->parsed()) train.execute(out, err);
    if (evaluate_app->parsed()) evaluate.execute(out, err);
    if (diagnose_app->parsed()) diagnose.execute(out);
    if (sweep_app->parsed()) sweep.execute(out, err);
    if (split_app->parsed()) split.execute(out);
    if (synth_app->parsed()) synth.execute(out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace xir::cli
