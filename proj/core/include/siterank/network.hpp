/*
 * Copyright 2026 The siterank Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace siterank {

enum class Activation { kLinear, kRelu, kLeakyRelu, kTanh, kSigmoid };

std::string ToString(Activation a);
Activation ParseActivation(const std::string& name);

struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out
  Activation activation = Activation::kLinear;
};

// Per-sample activations kept for the backward pass.
struct Tape {
  std::vector<std::vector<double>> inputs;  // input of each layer
  std::vector<std::vector<double>> pre;     // pre-activation of each layer
};

// Fully connected feed-forward network.
class Network {
 public:
  Network() = default;
  // dims = {input, hidden..., output}. Hidden layers use `hidden`, the last
  // layer `output`. Weights are drawn from N(0, gain / fan_in) with gain 2 for
  // rectifiers and 1 otherwise; biases start at zero.
  Network(const std::vector<std::size_t>& dims, Activation hidden, Activation output,
          std::uint64_t seed);
  // Throws std::invalid_argument on incompatible shapes.
  explicit Network(std::vector<Layer> layers);

  std::size_t input_size() const { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t output_size() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }

  // Throws NonFiniteError naming the first layer whose output is not finite.
  std::vector<double> Forward(std::span<const double> x) const;
  std::vector<double> Forward(std::span<const double> x, Tape& tape) const;

  // Adds dLoss/dparam into `grads` (layout of Parameters()) and returns
  // dLoss/dinput.
  std::vector<double> Backward(const Tape& tape, std::span<const double> grad_out,
                               std::span<double> grads) const;

  std::size_t parameter_count() const;
  // Per layer: weights then bias.
  std::vector<double> Parameters() const;
  void SetParameters(std::span<const double> params);

 private:
  std::vector<Layer> layers_;
};

enum class OutputUnit { kLinear, kSigmoid, kSoftmax };

// Maps raw network outputs to predictions and scores them. Linear units use
// squared error, sigmoid units binary cross-entropy, and the softmax units
// form one group normalized to sum 1 and scored with squared error.
struct Head {
  std::vector<OutputUnit> units;
  std::vector<double> weights;  // loss weight per unit
  std::vector<int> groups;      // reporting bucket per unit

  std::size_t size() const { return units.size(); }

  std::vector<double> Transform(std::span<const double> z) const;

  // Loss for one sample. When grad_z is non-empty, dLoss/dz is added to it.
  // `group_losses`, when non-empty, accumulates loss per reporting bucket.
  double Loss(std::span<const double> z, std::span<const double> target,
              std::span<double> grad_z, std::span<double> group_losses = {}) const;

  // Chains dLoss/dy (post-transform) back to dLoss/dz, adding into grad_z.
  void BackpropTransform(std::span<const double> z, std::span<const double> grad_y,
                         std::span<double> grad_z) const;
};

}  // namespace siterank
