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

#include "xir/mlp.h"

#include <cmath>
#include <sstream>

namespace xir {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
  }
  return "relu";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ValidationError("unknown activation: " + name);
}

MlpTowerSpec parse_mlp_spec(const std::string& text) {
  MlpTowerSpec spec;
  std::string widths = text;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    widths = text.substr(0, colon);
    spec.activation = parse_activation(text.substr(colon + 1));
  }
  std::stringstream ss(widths);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      const long w = std::stol(part);
      if (w <= 0) throw std::out_of_range("");
      spec.layer_widths.push_back(static_cast<Index>(w));
    } catch (const std::exception&) {
      throw ValidationError("bad tower width '" + part + "' in '" + text + "'");
    }
  }
  if (spec.layer_widths.empty()) throw ValidationError("tower spec has no layers");
  return spec;
}

std::string format_mlp_spec(const MlpTowerSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.layer_widths.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(spec.layer_widths[i]);
  }
  return out + ':' + activation_name(spec.activation);
}

void MlpTower::Gradients::resize_like(const MlpTower& tower) {
  weight.clear();
  bias.clear();
  for (const auto& layer : tower.layers()) {
    weight.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
    bias.push_back(Vector::Zero(layer.bias.size()));
  }
}

void MlpTower::Gradients::set_zero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
}

MlpTower::MlpTower(Index input_width, MlpTowerSpec spec, Rng& rng)
    : input_width_(input_width), spec_(std::move(spec)) {
  if (input_width <= 0) throw ValidationError("tower input width must be positive");
  if (spec_.layer_widths.empty()) throw ValidationError("tower spec has no layers");
  Index fan_in = input_width;
  for (Index width : spec_.layer_widths) {
    if (width <= 0) throw ValidationError("tower widths must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer{Matrix(width, fan_in), Vector(width)};
    for (Index r = 0; r < width; ++r) {
      for (Index c = 0; c < fan_in; ++c) layer.weight(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
      layer.bias(r) = (2.0 * rng.uniform() - 1.0) * bound;
    }
    layers_.push_back(std::move(layer));
    fan_in = width;
  }
}

namespace {

void apply_activation(Activation a, const Matrix& pre, Matrix& post) {
  switch (a) {
    case Activation::kRelu:
      post = pre.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      post = pre.array().tanh().matrix();
      break;
  }
}

// Multiplies `grad` in place by the activation derivative at `pre`.
void activation_backward(Activation a, const Matrix& pre, const Matrix& post,
                         Matrix& grad) {
  switch (a) {
    case Activation::kRelu:
      grad = (pre.array() > 0.0).select(grad, 0.0);
      break;
    case Activation::kTanh:
      grad.array() *= 1.0 - post.array().square();
      break;
  }
}

}  // namespace

Matrix MlpTower::forward(const Matrix& input, Activations* cache) const {
  if (input.cols() != input_width_) {
    throw ValidationError("tower input width " + std::to_string(input.cols()) +
                          " does not match configured " + std::to_string(input_width_));
  }
  Matrix x = input;
  if (cache) {
    cache->input = input;
    cache->pre.clear();
    cache->post.clear();
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix pre = x * layers_[l].weight.transpose();
    pre.rowwise() += layers_[l].bias.transpose();
    Matrix post;
    if (l + 1 < layers_.size()) {
      apply_activation(spec_.activation, pre, post);
    } else {
      post = pre;
    }
    if (cache) {
      cache->pre.push_back(pre);
      cache->post.push_back(post);
    }
    x = std::move(post);
  }
  return x;
}

Matrix MlpTower::backward(const Activations& cache, const Matrix& upstream,
                          Gradients& grads) const {
  XIR_CHECK(cache.pre.size() == layers_.size(), "tower cache does not match layers");
  if (grads.weight.size() != layers_.size()) grads.resize_like(*this);
  Matrix grad = upstream;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (l + 1 < layers_.size()) {
      activation_backward(spec_.activation, cache.pre[l], cache.post[l], grad);
    }
    const Matrix& layer_input = l == 0 ? cache.input : cache.post[l - 1];
    grads.weight[l].noalias() += grad.transpose() * layer_input;
    grads.bias[l] += grad.colwise().sum().transpose();
    grad = grad * layers_[l].weight;
  }
  return grad;
}

TowerPass tower_forward_backward(const MlpTower& tower, const Matrix& input,
                                 const Matrix& upstream) {
  MlpTower::Activations cache;
  TowerPass pass;
  pass.output = tower.forward(input, &cache);
  if (upstream.rows() != pass.output.rows() || upstream.cols() != pass.output.cols()) {
    throw ValidationError("upstream gradient shape does not match tower output");
  }
  pass.param_grads.resize_like(tower);
  pass.input_grad = tower.backward(cache, upstream, pass.param_grads);
  return pass;
}

}  // namespace xir
