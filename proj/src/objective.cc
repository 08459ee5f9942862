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

#include "xir/objective.h"

#include <numeric>

namespace xir {

ForwardPass forward_pass(const TwoTowerModel& model, const BatchPlan& plan) {
  XIR_CHECK(plan.users.size() == plan.positive_columns.size(),
            "one positive column per user row is required");
  ForwardPass fwd;
  fwd.user_repr = model.encode_users(plan.users);
  fwd.pool_encoding = model.encode_items(plan.pool);
  fwd.scores = fwd.user_repr * fwd.pool_encoding.output.transpose();
  if (plan.kind == LossKind::kXir) {
    fwd.cache_encoding = model.encode_items(plan.cache);
    fwd.cache_scores = fwd.user_repr * fwd.cache_encoding.output.transpose();
  }
  return fwd;
}

LossBatchOutput compute_loss(const ForwardPass& fwd, const BatchPlan& plan) {
  switch (plan.kind) {
    case LossKind::kFullSoftmax: {
      XIR_CHECK(static_cast<Eigen::Index>(plan.pool.size()) == fwd.scores.cols(),
                "full softmax pool must be the whole corpus");
      return full_softmax_loss(fwd.scores, plan.positive_columns);
    }
    case LossKind::kSampledSoftmax:
      return sampled_softmax_loss(fwd.scores, plan.positive_columns, plan.log_proposal);
    case LossKind::kBir:
      return bir_loss(fwd.scores, plan.positive_columns, plan.batch_resampled);
    case LossKind::kXir:
      return xir_loss(fwd.scores, fwd.cache_scores, plan.positive_columns,
                      plan.batch_resampled, plan.cache_resampled, plan.lambda);
  }
  throw LogicError("unknown loss kind");
}

void backward_pass(const TwoTowerModel& model, const BatchPlan& plan, const ForwardPass& fwd,
                   const LossBatchOutput& loss, ModelGradients& grads) {
  // S = U P^T  =>  dU = G P, dP = G^T U (and likewise for the cache).
  Matrix user_grad = loss.grad_scores * fwd.pool_encoding.output;
  model.backward_items(fwd.pool_encoding, loss.grad_scores.transpose() * fwd.user_repr, grads);
  if (plan.kind == LossKind::kXir && plan.lambda != 0.0) {
    user_grad += loss.grad_cache_scores * fwd.cache_encoding.output;
    model.backward_items(fwd.cache_encoding, loss.grad_cache_scores.transpose() * fwd.user_repr,
                         grads);
  }
  model.backward_users(plan.users, user_grad, grads);
}

ObjectiveValue evaluate_objective(const TwoTowerModel& model, const BatchPlan& plan,
                                  bool with_gradients) {
  const ForwardPass fwd = forward_pass(model, plan);
  const LossBatchOutput loss = compute_loss(fwd, plan);
  ObjectiveValue value;
  value.loss = loss.loss;
  if (with_gradients) {
    value.grads = model.make_gradients();
    backward_pass(model, plan, fwd, loss, value.grads);
  }
  return value;
}

BatchPlan full_softmax_plan(const TwoTowerModel& model, std::vector<Index> users,
                            std::vector<Index> positives) {
  BatchPlan plan;
  plan.kind = LossKind::kFullSoftmax;
  plan.users = std::move(users);
  plan.pool.resize(model.num_items());
  std::iota(plan.pool.begin(), plan.pool.end(), 0);
  plan.positive_columns = std::move(positives);
  return plan;
}

}  // namespace xir
