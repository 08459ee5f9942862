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

#include "xir/adam.h"

#include <cmath>

namespace xir {

namespace {

AdamMoments zero_moments(Eigen::Index rows, Eigen::Index cols) {
  return {Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)};
}

bool finite_rows(const RowGradient& g) {
  for (std::size_t s = 0; s < g.num_rows(); ++s) {
    if (!g.slot_values(s).allFinite()) return false;
  }
  return true;
}

}  // namespace

double decayed_learning_rate(const AdamConfig& config, int completed_epochs) {
  if (config.lr_decay_every <= 0) return config.learning_rate;
  const int periods = completed_epochs / config.lr_decay_every;
  return config.learning_rate * std::pow(config.lr_decay_factor, periods);
}

void AdamState::update_entry(double& p, double g, double& m, double& v, double lr,
                             double c1, double c2) const {
  g += config_.weight_decay * p;
  m = config_.beta1 * m + (1.0 - config_.beta1) * g;
  v = config_.beta2 * v + (1.0 - config_.beta2) * g * g;
  const double m_hat = m / c1;
  const double v_hat = v / c2;
  p -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
  if (config_.round_to_float) p = static_cast<double>(static_cast<float>(p));
}

void AdamState::update_dense(Matrix& param, const Matrix& grad, AdamMoments& moments,
                             double learning_rate) const {
  XIR_CHECK(step_count_ > 0, "begin_step() must precede updates");
  XIR_CHECK(param.rows() == grad.rows() && param.cols() == grad.cols(), "gradient shape mismatch");
  if (moments.first.size() != param.size()) moments = zero_moments(param.rows(), param.cols());
  const double t = static_cast<double>(step_count_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (Eigen::Index i = 0; i < param.size(); ++i) {
    update_entry(param.data()[i], grad.data()[i], moments.first.data()[i],
                 moments.second.data()[i], learning_rate, c1, c2);
  }
}

void AdamState::update_dense(Vector& param, const Vector& grad, AdamMoments& moments,
                             double learning_rate) const {
  Matrix p = Eigen::Map<Matrix>(param.data(), 1, param.size());
  const Matrix g = Eigen::Map<const Matrix>(grad.data(), 1, grad.size());
  update_dense(p, g, moments, learning_rate);
  param = Eigen::Map<Vector>(p.data(), p.size());
}

void AdamState::update_rows(Matrix& param, const RowGradient& grad, AdamMoments& moments,
                            double learning_rate) const {
  XIR_CHECK(step_count_ > 0, "begin_step() must precede updates");
  XIR_CHECK(grad.width() == param.cols(), "row gradient width mismatch");
  if (moments.first.size() != param.size()) moments = zero_moments(param.rows(), param.cols());
  const double t = static_cast<double>(step_count_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t s = 0; s < grad.num_rows(); ++s) {
    const Index r = grad.row_id(s);
    XIR_CHECK(r >= 0 && r < param.rows(), "row gradient id out of range");
    const auto g = grad.slot_values(s);
    for (Eigen::Index c = 0; c < param.cols(); ++c) {
      update_entry(param(r, c), g(c), moments.first(r, c), moments.second(r, c),
                   learning_rate, c1, c2);
    }
  }
}

TwoTowerAdam::TwoTowerAdam(const TwoTowerModel& model, AdamConfig config)
    : state_(config) {
  user_ = zero_moments(model.user_embeddings().rows(), model.user_embeddings().cols());
  item_ = zero_moments(model.item_embeddings().rows(), model.item_embeddings().cols());
  for (const auto& t : model.feature_tables()) features_.push_back(zero_moments(t.rows(), t.cols()));
  for (const auto& l : model.tower().layers()) {
    weights_.push_back(zero_moments(l.weight.rows(), l.weight.cols()));
    biases_.push_back(zero_moments(1, l.bias.size()));
  }
}

void TwoTowerAdam::step(TwoTowerModel& model, const ModelGradients& grads,
                        int completed_epochs) {
  bool finite = finite_rows(grads.user) && finite_rows(grads.item);
  for (const auto& f : grads.features) finite = finite && finite_rows(f);
  for (const auto& w : grads.tower.weight) finite = finite && w.allFinite();
  for (const auto& b : grads.tower.bias) finite = finite && b.allFinite();
  if (!finite) throw RuntimeAbort("non-finite gradient; training aborted");

  const double lr = decayed_learning_rate(state_.config(), completed_epochs);
  state_.begin_step();
  state_.update_rows(model.user_embeddings(), grads.user, user_, lr);
  state_.update_rows(model.item_embeddings(), grads.item, item_, lr);
  for (std::size_t f = 0; f < features_.size(); ++f) {
    state_.update_rows(model.feature_tables()[f], grads.features[f], features_[f], lr);
  }
  auto& layers = model.tower().layers();
  for (std::size_t l = 0; l < layers.size() && l < grads.tower.weight.size(); ++l) {
    state_.update_dense(layers[l].weight, grads.tower.weight[l], weights_[l], lr);
    state_.update_dense(layers[l].bias, grads.tower.bias[l], biases_[l], lr);
  }
}

}  // namespace xir
