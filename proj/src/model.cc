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

#include "xir/model.h"

#include <cmath>

#include "xir/random.h"

namespace xir {

Eigen::Map<Eigen::RowVectorXd> RowGradient::row(Index id) {
  auto [it, inserted] = slot_.try_emplace(id, rows_.size());
  if (inserted) {
    rows_.push_back(id);
    values_.resize(values_.size() + width_, 0.0);
  }
  return Eigen::Map<Eigen::RowVectorXd>(values_.data() + it->second * width_, width_);
}

Eigen::Map<const Eigen::RowVectorXd> RowGradient::slot_values(std::size_t slot) const {
  return Eigen::Map<const Eigen::RowVectorXd>(values_.data() + slot * width_, width_);
}

void RowGradient::clear() {
  rows_.clear();
  values_.clear();
  slot_.clear();
}

void ModelGradients::clear() {
  user.clear();
  item.clear();
  for (auto& f : features) f.clear();
  tower.set_zero();
}

namespace {

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
  }
}

}  // namespace

TwoTowerModel::TwoTowerModel(Index num_users, Index num_items, Index dim,
                             std::optional<ItemTowerConfig> tower,
                             std::uint64_t seed)
    : num_users_(num_users),
      num_items_(num_items),
      dim_(dim),
      tower_config_(std::move(tower)) {
  if (num_users <= 0 || num_items <= 0 || dim <= 0) {
    throw ValidationError("model dimensions must be positive");
  }
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  user_embeddings_.resize(num_users, dim);
  fill_uniform(user_embeddings_, bound, rng);
  if (!tower_config_) {
    item_embeddings_.resize(num_items, dim);
    fill_uniform(item_embeddings_, bound, rng);
    return;
  }
  const auto& cfg = *tower_config_;
  if (cfg.mlp.output_width() != dim) {
    throw ValidationError("item tower output width " + std::to_string(cfg.mlp.output_width()) +
                          " must equal embedding dim " + std::to_string(dim));
  }
  if (cfg.id_dim <= 0 || (!cfg.feature_cardinality.empty() && cfg.feature_dim <= 0)) {
    throw ValidationError("item tower embedding widths must be positive");
  }
  item_embeddings_.resize(num_items, cfg.id_dim);
  fill_uniform(item_embeddings_, 1.0 / std::sqrt(static_cast<double>(cfg.id_dim)), rng);
  for (Index card : cfg.feature_cardinality) {
    if (card <= 0) throw ValidationError("feature cardinality must be positive");
    Matrix table(card, cfg.feature_dim);
    fill_uniform(table, 1.0 / std::sqrt(static_cast<double>(cfg.feature_dim)), rng);
    feature_tables_.push_back(std::move(table));
  }
  tower_ = MlpTower(cfg.input_width(), cfg.mlp, rng);
}

TwoTowerModel::TwoTowerModel(const TwoTowerModel& other)
    : num_users_(other.num_users_),
      num_items_(other.num_items_),
      dim_(other.dim_),
      tower_config_(other.tower_config_),
      user_embeddings_(other.user_embeddings_),
      item_embeddings_(other.item_embeddings_),
      feature_tables_(other.feature_tables_),
      tower_(other.tower_),
      item_features_(other.item_features_),
      items_encoded_(other.items_encoded_.load()) {}

TwoTowerModel& TwoTowerModel::operator=(const TwoTowerModel& other) {
  if (this != &other) {
    TwoTowerModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

TwoTowerModel::TwoTowerModel(TwoTowerModel&& other) noexcept
    : num_users_(other.num_users_),
      num_items_(other.num_items_),
      dim_(other.dim_),
      tower_config_(std::move(other.tower_config_)),
      user_embeddings_(std::move(other.user_embeddings_)),
      item_embeddings_(std::move(other.item_embeddings_)),
      feature_tables_(std::move(other.feature_tables_)),
      tower_(std::move(other.tower_)),
      item_features_(std::move(other.item_features_)),
      items_encoded_(other.items_encoded_.load()) {}

TwoTowerModel& TwoTowerModel::operator=(TwoTowerModel&& other) noexcept {
  num_users_ = other.num_users_;
  num_items_ = other.num_items_;
  dim_ = other.dim_;
  tower_config_ = std::move(other.tower_config_);
  user_embeddings_ = std::move(other.user_embeddings_);
  item_embeddings_ = std::move(other.item_embeddings_);
  feature_tables_ = std::move(other.feature_tables_);
  tower_ = std::move(other.tower_);
  item_features_ = std::move(other.item_features_);
  items_encoded_.store(other.items_encoded_.load());
  return *this;
}

void TwoTowerModel::set_item_features(ItemFeatures features) {
  if (!tower_config_) throw ValidationError("item features require an item tower");
  const auto& card = tower_config_->feature_cardinality;
  if (features.cardinality != card) {
    throw ValidationError("item feature cardinalities do not match the tower configuration");
  }
  if (static_cast<Index>(features.categories.size()) != num_items_) {
    throw ValidationError("item features must cover every item");
  }
  for (const auto& row : features.categories) {
    if (row.size() != card.size()) throw ValidationError("item feature row has wrong width");
    for (std::size_t f = 0; f < row.size(); ++f) {
      if (row[f] < 0 || row[f] >= card[f]) throw ValidationError("item feature category out of range");
    }
  }
  item_features_ = std::move(features);
}

void TwoTowerModel::check_ids(std::span<const Index> ids, Index bound,
                              const char* what) const {
  for (Index id : ids) {
    if (id < 0 || id >= bound) {
      throw LogicError(std::string(what) + " index " + std::to_string(id) + " out of range");
    }
  }
}

Matrix TwoTowerModel::encode_users(std::span<const Index> users) const {
  check_ids(users, num_users_, "user");
  Matrix out(users.size(), dim_);
  for (std::size_t a = 0; a < users.size(); ++a) out.row(a) = user_embeddings_.row(users[a]);
  return out;
}

Matrix TwoTowerModel::tower_input(std::span<const Index> items) const {
  const auto& cfg = *tower_config_;
  if (!cfg.feature_cardinality.empty() && item_features_.categories.empty()) {
    throw ValidationError("item tower needs item features; none were loaded");
  }
  Matrix input(items.size(), cfg.input_width());
  for (std::size_t r = 0; r < items.size(); ++r) {
    const Index item = items[r];
    input.row(r).head(cfg.id_dim) = item_embeddings_.row(item);
    for (std::size_t f = 0; f < feature_tables_.size(); ++f) {
      const Index cat = item_features_.categories[item][f];
      input.row(r).segment(cfg.id_dim + f * cfg.feature_dim, cfg.feature_dim) =
          feature_tables_[f].row(cat);
    }
  }
  return input;
}

ItemEncoding TwoTowerModel::encode_items(std::span<const Index> items) const {
  check_ids(items, num_items_, "item");
  items_encoded_.fetch_add(items.size());
  ItemEncoding enc;
  enc.items.assign(items.begin(), items.end());
  if (!tower_config_) {
    enc.output.resize(items.size(), dim_);
    for (std::size_t r = 0; r < items.size(); ++r) enc.output.row(r) = item_embeddings_.row(items[r]);
    return enc;
  }
  enc.output = tower_.forward(tower_input(items), &enc.tower_cache);
  return enc;
}

Matrix TwoTowerModel::score_batch(std::span<const Index> users,
                                  std::span<const Index> items) const {
  const Matrix u = encode_users(users);
  const ItemEncoding i = encode_items(items);
  return u * i.output.transpose();
}

Matrix TwoTowerModel::all_item_representations() const {
  if (!tower_config_) return item_embeddings_;
  std::vector<Index> all(num_items_);
  for (Index i = 0; i < num_items_; ++i) all[i] = i;
  return tower_.forward(tower_input(all), nullptr);
}

void TwoTowerModel::backward_users(std::span<const Index> users, const Matrix& grad,
                                   ModelGradients& grads) const {
  XIR_CHECK(grad.rows() == static_cast<Eigen::Index>(users.size()) && grad.cols() == dim_,
            "user gradient shape mismatch");
  for (std::size_t a = 0; a < users.size(); ++a) grads.user.row(users[a]) += grad.row(a);
}

void TwoTowerModel::backward_items(const ItemEncoding& enc, const Matrix& grad,
                                   ModelGradients& grads) const {
  XIR_CHECK(grad.rows() == static_cast<Eigen::Index>(enc.items.size()) && grad.cols() == dim_,
            "item gradient shape mismatch");
  if (!tower_config_) {
    for (std::size_t r = 0; r < enc.items.size(); ++r) grads.item.row(enc.items[r]) += grad.row(r);
    return;
  }
  const auto& cfg = *tower_config_;
  const Matrix input_grad = tower_.backward(enc.tower_cache, grad, grads.tower);
  for (std::size_t r = 0; r < enc.items.size(); ++r) {
    const Index item = enc.items[r];
    grads.item.row(item) += input_grad.row(r).head(cfg.id_dim);
    for (std::size_t f = 0; f < feature_tables_.size(); ++f) {
      const Index cat = item_features_.categories[item][f];
      grads.features[f].row(cat) +=
          input_grad.row(r).segment(cfg.id_dim + f * cfg.feature_dim, cfg.feature_dim);
    }
  }
}

ModelGradients TwoTowerModel::make_gradients() const {
  ModelGradients g;
  g.user = RowGradient(dim_);
  g.item = RowGradient(static_cast<Index>(item_embeddings_.cols()));
  for (const auto& t : feature_tables_) g.features.emplace_back(static_cast<Index>(t.cols()));
  if (tower_config_) g.tower.resize_like(tower_);
  return g;
}

bool TwoTowerModel::all_finite() const {
  if (!user_embeddings_.allFinite() || !item_embeddings_.allFinite()) return false;
  for (const auto& t : feature_tables_) {
    if (!t.allFinite()) return false;
  }
  for (const auto& l : tower_.layers()) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

}  // namespace xir
