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

#ifndef XIR_ADAM_H_
#define XIR_ADAM_H_

#include <cstdint>
#include <vector>

#include "xir/common.h"
#include "xir/model.h"

namespace xir {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // l2 coefficient; weight_decay * param is added to the gradient.
  double weight_decay = 0.0;
  // Step size is multiplied by factor^(completed_epochs / every).
  double lr_decay_factor = 0.95;
  int lr_decay_every = 5;
  // Store updated parameters at float32 precision.
  bool round_to_float = false;
};

// Step size after `completed_epochs` full epochs.
double decayed_learning_rate(const AdamConfig& config, int completed_epochs);

struct AdamMoments {
  Matrix first;
  Matrix second;
};

// Bias-corrected Adam for one parameter tensor. The step count is shared by
// all tensors of a model and lives in AdamState.
class AdamState {
 public:
  explicit AdamState(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_count_; }

  // Advances the step count; call once per optimizer step before updates.
  void begin_step() { ++step_count_; }

  // Dense update of every entry.
  void update_dense(Matrix& param, const Matrix& grad, AdamMoments& moments,
                    double learning_rate) const;
  void update_dense(Vector& param, const Vector& grad, AdamMoments& moments,
                    double learning_rate) const;
  // Sparse ("lazy") update: only rows present in `grad` are touched, and the
  // moments of other rows are left as they are.
  void update_rows(Matrix& param, const RowGradient& grad, AdamMoments& moments,
                   double learning_rate) const;

 private:
  void update_entry(double& p, double g, double& m, double& v, double lr,
                    double c1, double c2) const;

  AdamConfig config_;
  std::uint64_t step_count_ = 0;
};

// Optimizer over all TwoTowerModel parameters: sparse for embedding tables,
// dense for tower layers. Aborts with RuntimeAbort on a non-finite gradient.
class TwoTowerAdam {
 public:
  TwoTowerAdam(const TwoTowerModel& model, AdamConfig config);

  void step(TwoTowerModel& model, const ModelGradients& grads, int completed_epochs);

  const AdamState& state() const { return state_; }

 private:
  AdamState state_;
  AdamMoments user_;
  AdamMoments item_;
  std::vector<AdamMoments> features_;
  std::vector<AdamMoments> weights_;
  std::vector<AdamMoments> biases_;
};

}  // namespace xir

#endif  // XIR_ADAM_H_
