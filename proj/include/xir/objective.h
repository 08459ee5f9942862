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

#ifndef XIR_OBJECTIVE_H_
#define XIR_OBJECTIVE_H_

#include <vector>

#include "xir/losses.h"
#include "xir/model.h"

namespace xir {

enum class LossKind { kFullSoftmax, kSampledSoftmax, kBir, kXir };

// Everything that is held fixed while the parameters vary: the batch pairs,
// the candidate pool and the drawn samples. Row a pairs users[a] with the
// item at pool[positive_columns[a]].
struct BatchPlan {
  LossKind kind = LossKind::kSampledSoftmax;
  std::vector<Index> users;
  std::vector<Index> pool;
  std::vector<Index> positive_columns;
  std::vector<double> log_proposal;             // kSampledSoftmax
  std::vector<Index> cache;                     // kXir
  std::vector<ResampleSet> batch_resampled;     // kBir, kXir
  std::vector<ResampleSet> cache_resampled;     // kXir
  double lambda = 0.5;                          // kXir
};

struct ForwardPass {
  Matrix user_repr;
  ItemEncoding pool_encoding;
  ItemEncoding cache_encoding;
  Matrix scores;        // users x pool
  Matrix cache_scores;  // users x cache
};

// Encodes users, pool items and (for kXir) cache items, then scores them.
ForwardPass forward_pass(const TwoTowerModel& model, const BatchPlan& plan);

// Dispatches to the score-level loss named by plan.kind.
LossBatchOutput compute_loss(const ForwardPass& fwd, const BatchPlan& plan);

// Chains the score gradients back into the model parameters.
void backward_pass(const TwoTowerModel& model, const BatchPlan& plan, const ForwardPass& fwd,
                   const LossBatchOutput& loss, ModelGradients& grads);

struct ObjectiveValue {
  double loss = 0.0;
  ModelGradients grads;
};

// forward + loss (+ backward when with_gradients).
ObjectiveValue evaluate_objective(const TwoTowerModel& model, const BatchPlan& plan,
                                  bool with_gradients = true);

// Plan for the exact full softmax over every item of the model.
BatchPlan full_softmax_plan(const TwoTowerModel& model, std::vector<Index> users,
                            std::vector<Index> positives);

}  // namespace xir

#endif  // XIR_OBJECTIVE_H_
