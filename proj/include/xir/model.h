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

#ifndef XIR_MODEL_H_
#define XIR_MODEL_H_

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "xir/common.h"
#include "xir/mlp.h"

namespace xir {

// Categorical side features for items: categories[i][f] < cardinality[f].
struct ItemFeatures {
  std::vector<std::vector<Index>> categories;
  std::vector<Index> cardinality;

  Index num_features() const { return static_cast<Index>(cardinality.size()); }
};

// Item tower configuration. The tower input is the item id embedding
// concatenated with one embedding per categorical feature.
struct ItemTowerConfig {
  MlpTowerSpec mlp;
  Index id_dim = 32;
  std::vector<Index> feature_cardinality;
  Index feature_dim = 8;

  Index input_width() const {
    return id_dim + feature_dim * static_cast<Index>(feature_cardinality.size());
  }
};

// Accumulates gradient rows for an embedding table. Only touched rows are
// stored; slots are kept in first-touch order so iteration is deterministic.
class RowGradient {
 public:
  explicit RowGradient(Index width = 0) : width_(width) {}

  Index width() const { return width_; }
  std::size_t num_rows() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  Index row_id(std::size_t slot) const { return rows_[slot]; }

  // Zero-initialised on first touch.
  Eigen::Map<Eigen::RowVectorXd> row(Index id);
  Eigen::Map<const Eigen::RowVectorXd> slot_values(std::size_t slot) const;
  // Marks a row as touched without adding anything.
  void touch(Index id) { row(id); }
  void clear();

 private:
  Index width_;
  std::vector<Index> rows_;
  std::vector<double> values_;
  std::unordered_map<Index, std::size_t> slot_;
};

struct ModelGradients {
  RowGradient user;
  RowGradient item;
  std::vector<RowGradient> features;
  MlpTower::Gradients tower;

  void clear();
};

// Forward state of an item encode, needed for the backward pass.
struct ItemEncoding {
  std::vector<Index> items;
  Matrix output;                       // rows = items, cols = k
  MlpTower::Activations tower_cache;   // empty without a tower
};

class TwoTowerModel {
 public:
  TwoTowerModel() = default;
  // Embeddings are drawn uniformly from [-1/sqrt(k), 1/sqrt(k)].
  TwoTowerModel(Index num_users, Index num_items, Index dim,
                std::optional<ItemTowerConfig> tower, std::uint64_t seed);

  TwoTowerModel(const TwoTowerModel& other);
  TwoTowerModel& operator=(const TwoTowerModel& other);
  TwoTowerModel(TwoTowerModel&&) noexcept;
  TwoTowerModel& operator=(TwoTowerModel&&) noexcept;

  Index num_users() const { return num_users_; }
  Index num_items() const { return num_items_; }
  Index dim() const { return dim_; }
  bool has_tower() const { return tower_config_.has_value(); }
  const std::optional<ItemTowerConfig>& tower_config() const { return tower_config_; }

  Matrix& user_embeddings() { return user_embeddings_; }
  const Matrix& user_embeddings() const { return user_embeddings_; }
  Matrix& item_embeddings() { return item_embeddings_; }
  const Matrix& item_embeddings() const { return item_embeddings_; }
  std::vector<Matrix>& feature_tables() { return feature_tables_; }
  const std::vector<Matrix>& feature_tables() const { return feature_tables_; }
  MlpTower& tower() { return tower_; }
  const MlpTower& tower() const { return tower_; }

  // Required before encoding when the tower has categorical features.
  void set_item_features(ItemFeatures features);
  const ItemFeatures& item_features() const { return item_features_; }

  Matrix encode_users(std::span<const Index> users) const;
  // Counts every encoded item (duplicates included) in items_encoded().
  ItemEncoding encode_items(std::span<const Index> items) const;

  // S[a][b] = <user_repr(users[a]), item_repr(items[b])>.
  Matrix score_batch(std::span<const Index> users, std::span<const Index> items) const;

  // Representations of all N items; does not touch the encode counter.
  Matrix all_item_representations() const;

  void backward_users(std::span<const Index> users, const Matrix& grad,
                      ModelGradients& grads) const;
  void backward_items(const ItemEncoding& encoding, const Matrix& grad,
                      ModelGradients& grads) const;

  // Gradient container shaped for this model.
  ModelGradients make_gradients() const;

  std::uint64_t items_encoded() const { return items_encoded_.load(); }
  void reset_encode_counter() { items_encoded_.store(0); }

  bool all_finite() const;

 private:
  void check_ids(std::span<const Index> ids, Index bound, const char* what) const;
  Matrix tower_input(std::span<const Index> items) const;

  Index num_users_ = 0;
  Index num_items_ = 0;
  Index dim_ = 0;
  std::optional<ItemTowerConfig> tower_config_;
  Matrix user_embeddings_;
  Matrix item_embeddings_;
  std::vector<Matrix> feature_tables_;
  MlpTower tower_;
  ItemFeatures item_features_;
  mutable std::atomic<std::uint64_t> items_encoded_{0};
};

}  // namespace xir

#endif  // XIR_MODEL_H_
