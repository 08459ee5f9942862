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

#ifndef XIR_DATA_H_
#define XIR_DATA_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xir/common.h"

namespace xir {

struct Interaction {
  Index user_id = 0;
  Index item_id = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

// Maps raw tokens to dense indices in first-appearance order.
class Vocabulary {
 public:
  Index intern(const std::string& token);
  std::optional<Index> find(const std::string& token) const;
  const std::string& token(Index index) const { return tokens_.at(index); }
  Index size() const { return static_cast<Index>(tokens_.size()); }

  // "token<TAB>index" per line, in index order.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::unordered_map<std::string, Index> index_;
  std::vector<std::string> tokens_;
};

// Interactions grouped by user. Per-user ranges are stored CSR-style; a user
// with no interactions in this store has an empty range.
class InteractionStore {
 public:
  InteractionStore() = default;

  // Stable-groups `pairs` by user. Throws LogicError on out-of-range ids.
  static InteractionStore from_pairs(std::vector<Interaction> pairs,
                                     Index num_users, Index num_items);

  Index num_users() const { return num_users_; }
  Index num_items() const { return num_items_; }
  std::size_t size() const { return interactions_.size(); }
  bool empty() const { return interactions_.empty(); }

  std::span<const Interaction> interactions() const { return interactions_; }
  std::span<const Interaction> user_range(Index user) const;
  std::size_t user_count(Index user) const;

  // Users with at least one interaction, ascending.
  std::vector<Index> active_users() const;

  // Per-item interaction counts, length num_items().
  std::vector<std::size_t> item_counts() const;

 private:
  std::vector<Interaction> interactions_;
  std::vector<std::size_t> offsets_;  // length num_users + 1
  Index num_users_ = 0;
  Index num_items_ = 0;
};

// Which columns of a delimited line carry the ids. Lines are split on tabs
// when the line contains one, otherwise on commas.
struct ColumnSpec {
  int user_column = 0;
  int item_column = 1;
  // Optional positive-feedback filter: keep rows whose rating column
  // exceeds the threshold (or the file-wide mean when threshold is unset).
  std::optional<int> rating_column;
  std::optional<double> rating_threshold;
};

struct LoadResult {
  InteractionStore store;
  std::size_t malformed_lines = 0;
  std::size_t filtered_lines = 0;
};

// Reads a delimited interaction file. Tokens are interned into the supplied
// vocabularies so that several files can share one index space; the store's
// M and N are the vocabulary sizes after loading.
// Throws IoError if unreadable and ValidationError if no valid line exists.
LoadResult load_interactions(const std::string& path, const ColumnSpec& spec,
                             Vocabulary& users, Vocabulary& items);

// Widens a store's index space (e.g. after a second file added tokens).
InteractionStore with_dimensions(const InteractionStore& store,
                                 Index num_users, Index num_items);

void write_interactions(const std::string& path, const InteractionStore& store,
                        const Vocabulary& users, const Vocabulary& items,
                        char delimiter = '\t');

// Per-user random split: floor(ratio * n) interactions go to train, with at
// least one when n >= 2 (and the single one when n == 1).
std::pair<InteractionStore, InteractionStore> split_per_user(
    const InteractionStore& store, double train_ratio, std::uint64_t seed);

struct PopularityTable {
  std::vector<double> prob;
  std::vector<double> log_prob;
  double smoothing_epsilon = 0.0;

  Index size() const { return static_cast<Index>(prob.size()); }
};

// prob[i] = (f_i + eps) / (sum_j f_j + eps * N) with f the train counts.
PopularityTable compute_popularity(const InteractionStore& train,
                                   double epsilon);
PopularityTable popularity_from_counts(std::span<const double> counts,
                                       double epsilon);

}  // namespace xir

#endif  // XIR_DATA_H_
