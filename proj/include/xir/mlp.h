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

#ifndef XIR_MLP_H_
#define XIR_MLP_H_

#include <string>
#include <vector>

#include "xir/common.h"
#include "xir/random.h"

namespace xir {

enum class Activation { kRelu, kTanh };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

// Fully-connected stack; the activation follows every layer except the last.
struct MlpTowerSpec {
  std::vector<Index> layer_widths;
  Activation activation = Activation::kRelu;

  Index output_width() const { return layer_widths.empty() ? 0 : layer_widths.back(); }
  friend bool operator==(const MlpTowerSpec&, const MlpTowerSpec&) = default;
};

// "32,16" or "32,16:relu".
MlpTowerSpec parse_mlp_spec(const std::string& text);
std::string format_mlp_spec(const MlpTowerSpec& spec);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

class MlpTower {
 public:
  struct Activations {
    Matrix input;
    std::vector<Matrix> pre;   // pre-activation per layer
    std::vector<Matrix> post;  // layer outputs (post[last] is the tower output)
  };

  struct Gradients {
    std::vector<Matrix> weight;
    std::vector<Vector> bias;

    void resize_like(const MlpTower& tower);
    void set_zero();
  };

  MlpTower() = default;
  // Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  MlpTower(Index input_width, MlpTowerSpec spec, Rng& rng);

  Index input_width() const { return input_width_; }
  const MlpTowerSpec& spec() const { return spec_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  // Rows of `input` are samples. `cache` may be null for inference.
  Matrix forward(const Matrix& input, Activations* cache) const;

  // Accumulates parameter gradients into `grads` and returns dL/dinput.
  Matrix backward(const Activations& cache, const Matrix& upstream,
                  Gradients& grads) const;

 private:
  Index input_width_ = 0;
  MlpTowerSpec spec_;
  std::vector<DenseLayer> layers_;
};

struct TowerPass {
  Matrix output;
  MlpTower::Gradients param_grads;
  Matrix input_grad;
};

// One forward and backward pass with fresh (zeroed) parameter gradients.
TowerPass tower_forward_backward(const MlpTower& tower, const Matrix& input,
                                 const Matrix& upstream);

}  // namespace xir

#endif  // XIR_MLP_H_
