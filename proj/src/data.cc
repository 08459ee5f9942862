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

#include "xir/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "xir/random.h"

namespace xir {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
  }
  return fields;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r';
  });
}

}  // namespace

Index Vocabulary::intern(const std::string& token) {
  auto [it, inserted] = index_.try_emplace(token, size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::optional<Index> Vocabulary::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary: " + path);
  for (Index i = 0; i < size(); ++i) out << tokens_[i] << '\t' << i << '\n';
  if (!out) throw IoError("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read vocabulary: " + path);
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected token<TAB>index");
    }
    const std::string token = line.substr(0, tab);
    const long index = std::stol(line.substr(tab + 1));
    if (index != vocab.size()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": indices must be dense and ordered");
    }
    vocab.intern(token);
  }
  return vocab;
}

InteractionStore InteractionStore::from_pairs(std::vector<Interaction> pairs,
                                              Index num_users,
                                              Index num_items) {
  for (const auto& p : pairs) {
    XIR_CHECK(p.user_id >= 0 && p.user_id < num_users, "user id out of range");
    XIR_CHECK(p.item_id >= 0 && p.item_id < num_items, "item id out of range");
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Interaction& a, const Interaction& b) {
                     return a.user_id < b.user_id;
                   });
  InteractionStore store;
  store.num_users_ = num_users;
  store.num_items_ = num_items;
  store.offsets_.assign(static_cast<std::size_t>(num_users) + 1, 0);
  for (const auto& p : pairs) ++store.offsets_[p.user_id + 1];
  std::partial_sum(store.offsets_.begin(), store.offsets_.end(),
                   store.offsets_.begin());
  store.interactions_ = std::move(pairs);
  return store;
}

std::span<const Interaction> InteractionStore::user_range(Index user) const {
  XIR_CHECK(user >= 0 && user < num_users_, "user id out of range");
  return std::span<const Interaction>(interactions_)
      .subspan(offsets_[user], offsets_[user + 1] - offsets_[user]);
}

std::size_t InteractionStore::user_count(Index user) const {
  return offsets_[user + 1] - offsets_[user];
}

std::vector<Index> InteractionStore::active_users() const {
  std::vector<Index> users;
  for (Index u = 0; u < num_users_; ++u) {
    if (user_count(u) > 0) users.push_back(u);
  }
  return users;
}

std::vector<std::size_t> InteractionStore::item_counts() const {
  std::vector<std::size_t> counts(num_items_, 0);
  for (const auto& p : interactions_) ++counts[p.item_id];
  return counts;
}

LoadResult load_interactions(const std::string& path, const ColumnSpec& spec,
                             Vocabulary& users, Vocabulary& items) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read interactions: " + path);

  struct Row {
    std::string user, item;
    double rating;
  };
  std::vector<Row> rows;
  LoadResult result;
  const int needed = std::max({spec.user_column, spec.item_column,
                               spec.rating_column.value_or(0)});
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    const auto fields = split_line(line);
    if (static_cast<int>(fields.size()) <= needed ||
        fields[spec.user_column].empty() || fields[spec.item_column].empty()) {
      ++result.malformed_lines;
      continue;
    }
    Row row{fields[spec.user_column], fields[spec.item_column], 0.0};
    if (spec.rating_column) {
      try {
        std::size_t used = 0;
        row.rating = std::stod(fields[*spec.rating_column], &used);
        if (used != fields[*spec.rating_column].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        ++result.malformed_lines;
        continue;
      }
    }
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read failed: " + path);

  double threshold = -INFINITY;
  if (spec.rating_column && !rows.empty()) {
    if (spec.rating_threshold) {
      threshold = *spec.rating_threshold;
    } else {
      double sum = 0.0;
      for (const auto& r : rows) sum += r.rating;
      threshold = sum / static_cast<double>(rows.size());
    }
  }

  std::vector<Interaction> pairs;
  pairs.reserve(rows.size());
  for (const auto& r : rows) {
    if (spec.rating_column && !(r.rating > threshold)) {
      ++result.filtered_lines;
      continue;
    }
    pairs.push_back({users.intern(r.user), items.intern(r.item)});
  }
  if (pairs.empty()) throw ValidationError("no valid interactions in " + path);
  result.store =
      InteractionStore::from_pairs(std::move(pairs), users.size(), items.size());
  return result;
}

InteractionStore with_dimensions(const InteractionStore& store,
                                 Index num_users, Index num_items) {
  XIR_CHECK(num_users >= store.num_users() && num_items >= store.num_items(),
            "dimensions may only grow");
  std::vector<Interaction> pairs(store.interactions().begin(),
                                 store.interactions().end());
  return InteractionStore::from_pairs(std::move(pairs), num_users, num_items);
}

void write_interactions(const std::string& path, const InteractionStore& store,
                        const Vocabulary& users, const Vocabulary& items,
                        char delimiter) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write interactions: " + path);
  for (const auto& p : store.interactions()) {
    out << users.token(p.user_id) << delimiter << items.token(p.item_id) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::pair<InteractionStore, InteractionStore> split_per_user(
    const InteractionStore& store, double train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw ValidationError("train_ratio must lie in (0, 1)");
  }
  std::vector<Interaction> train, test;
  std::vector<std::size_t> order;
  for (Index u = 0; u < store.num_users(); ++u) {
    const auto range = store.user_range(u);
    const std::size_t n = range.size();
    if (n == 0) continue;
    // The small epsilon keeps products such as 0.29 * 100 from flooring low.
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_ratio * static_cast<double>(n) + 1e-9));
    if (n_train == 0) n_train = 1;

    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(u)}));
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[rng.below(i + 1)]);
    }
    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;
    for (std::size_t i = 0; i < n; ++i) {
      (in_train[i] ? train : test).push_back(range[i]);
    }
  }
  return {InteractionStore::from_pairs(std::move(train), store.num_users(),
                                       store.num_items()),
          InteractionStore::from_pairs(std::move(test), store.num_users(),
                                       store.num_items())};
}

PopularityTable popularity_from_counts(std::span<const double> counts,
                                       double epsilon) {
  XIR_CHECK(!counts.empty(), "popularity needs at least one item");
  XIR_CHECK(epsilon >= 0.0, "smoothing epsilon must be non-negative");
  const double n = static_cast<double>(counts.size());
  double total = epsilon * n;
  for (double c : counts) total += c;
  XIR_CHECK(total > 0.0, "popularity needs a positive total count");
  PopularityTable table;
  table.smoothing_epsilon = epsilon;
  table.prob.resize(counts.size());
  table.log_prob.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    table.prob[i] = (counts[i] + epsilon) / total;
    table.log_prob[i] = std::log(table.prob[i]);
  }
  return table;
}

PopularityTable compute_popularity(const InteractionStore& train,
                                   double epsilon) {
  const auto counts = train.item_counts();
  std::vector<double> as_double(counts.begin(), counts.end());
  return popularity_from_counts(as_double, epsilon);
}

}  // namespace xir
