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

#include "siterank/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "siterank/errors.hpp"

namespace siterank {

namespace {

constexpr double kLeakySlope = 0.01;

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double Apply(Activation a, double z) {
  switch (a) {
    case Activation::kLinear:
      return z;
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kLeakyRelu:
      return z > 0.0 ? z : kLeakySlope * z;
    case Activation::kTanh:
      return std::tanh(z);
    case Activation::kSigmoid:
      return Sigmoid(z);
  }
  return z;
}

double Derivative(Activation a, double z) {
  switch (a) {
    case Activation::kLinear:
      return 1.0;
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kLeakyRelu:
      return z > 0.0 ? 1.0 : kLeakySlope;
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kSigmoid: {
      const double s = Sigmoid(z);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

void Softmax(std::span<const double> z, const std::vector<std::size_t>& idx, std::vector<double>& p) {
  p.assign(idx.size(), 0.0);
  if (idx.empty()) return;
  double hi = z[idx[0]];
  for (std::size_t k : idx) hi = std::max(hi, z[k]);
  double sum = 0.0;
  for (std::size_t q = 0; q < idx.size(); ++q) {
    p[q] = std::exp(z[idx[q]] - hi);
    sum += p[q];
  }
  for (double& v : p) v /= sum;
}

std::vector<std::size_t> SoftmaxUnits(const std::vector<OutputUnit>& units) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < units.size(); ++k) {
    if (units[k] == OutputUnit::kSoftmax) idx.push_back(k);
  }
  return idx;
}

}  // namespace

std::string ToString(Activation a) {
  switch (a) {
    case Activation::kLinear:
      return "linear";
    case Activation::kRelu:
      return "relu";
    case Activation::kLeakyRelu:
      return "leaky_relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kSigmoid:
      return "sigmoid";
  }
  return "linear";
}

Activation ParseActivation(const std::string& name) {
  for (auto a : {Activation::kLinear, Activation::kRelu, Activation::kLeakyRelu, Activation::kTanh,
                 Activation::kSigmoid}) {
    if (ToString(a) == name) return a;
  }
  throw ConfigError("unknown activation '" + name + "'");
}

Network::Network(const std::vector<std::size_t>& dims, Activation hidden, Activation output,
                 std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("network needs input and output sizes");
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] == 0 || dims[l + 1] == 0) throw std::invalid_argument("zero-width layer");
    Layer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    layer.activation = l + 2 == dims.size() ? output : hidden;
    const bool rectifier =
        layer.activation == Activation::kRelu || layer.activation == Activation::kLeakyRelu;
    const double stddev = std::sqrt((rectifier ? 2.0 : 1.0) / static_cast<double>(layer.in));
    std::normal_distribution<double> dist(0.0, stddev);
    layer.weights.resize(layer.in * layer.out);
    for (double& w : layer.weights) w = dist(rng);
    layer.bias.assign(layer.out, 0.0);
    layers_.push_back(std::move(layer));
  }
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("network has no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    if (L.in == 0 || L.out == 0 || L.weights.size() != L.in * L.out || L.bias.size() != L.out) {
      throw std::invalid_argument("layer " + std::to_string(l) + " has inconsistent shape");
    }
    if (l > 0 && layers_[l - 1].out != L.in) {
      throw std::invalid_argument("layer " + std::to_string(l) + " input does not match previous output");
    }
  }
}

std::vector<double> Network::Forward(std::span<const double> x) const {
  Tape tape;
  return Forward(x, tape);
}

std::vector<double> Network::Forward(std::span<const double> x, Tape& tape) const {
  if (x.size() != input_size()) {
    throw std::invalid_argument("network input has " + std::to_string(x.size()) +
                                " values, expected " + std::to_string(input_size()));
  }
  tape.inputs.resize(layers_.size());
  tape.pre.resize(layers_.size());
  std::vector<double> current(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& L = layers_[l];
    tape.inputs[l] = current;
    auto& z = tape.pre[l];
    z.assign(L.out, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double* w = L.weights.data() + o * L.in;
      double acc = L.bias[o];
      for (std::size_t i = 0; i < L.in; ++i) acc += w[i] * current[i];
      z[o] = acc;
    }
    current.resize(L.out);
    for (std::size_t o = 0; o < L.out; ++o) {
      current[o] = Apply(L.activation, z[o]);
      if (!std::isfinite(current[o])) {
        throw NonFiniteError(l, "non-finite activation at unit " + std::to_string(o));
      }
    }
  }
  return current;
}

std::vector<double> Network::Backward(const Tape& tape, std::span<const double> grad_out,
                                      std::span<double> grads) const {
  if (grads.size() != parameter_count()) throw std::invalid_argument("gradient buffer size mismatch");
  std::vector<std::size_t> offsets(layers_.size());
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    offsets[l] = offset;
    offset += layers_[l].weights.size() + layers_[l].bias.size();
  }
  std::vector<double> grad(grad_out.begin(), grad_out.end());
  std::vector<double> delta;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& L = layers_[l];
    const auto& input = tape.inputs[l];
    const auto& z = tape.pre[l];
    delta.resize(L.out);
    for (std::size_t o = 0; o < L.out; ++o) delta[o] = grad[o] * Derivative(L.activation, z[o]);
    double* gw = grads.data() + offsets[l];
    double* gb = gw + L.weights.size();
    std::vector<double> grad_in(L.in, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      if (d == 0.0) continue;
      const double* w = L.weights.data() + o * L.in;
      double* gwo = gw + o * L.in;
      for (std::size_t i = 0; i < L.in; ++i) {
        gwo[i] += d * input[i];
        grad_in[i] += d * w[i];
      }
    }
    grad = std::move(grad_in);
  }
  return grad;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& L : layers_) n += L.weights.size() + L.bias.size();
  return n;
}

std::vector<double> Network::Parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (const auto& L : layers_) {
    p.insert(p.end(), L.weights.begin(), L.weights.end());
    p.insert(p.end(), L.bias.begin(), L.bias.end());
  }
  return p;
}

void Network::SetParameters(std::span<const double> params) {
  if (params.size() != parameter_count()) throw std::invalid_argument("parameter count mismatch");
  std::size_t k = 0;
  for (auto& L : layers_) {
    for (double& w : L.weights) w = params[k++];
    for (double& b : L.bias) b = params[k++];
  }
}

std::vector<double> Head::Transform(std::span<const double> z) const {
  std::vector<double> y(z.begin(), z.end());
  for (std::size_t k = 0; k < units.size(); ++k) {
    if (units[k] == OutputUnit::kSigmoid) y[k] = Sigmoid(z[k]);
  }
  const auto idx = SoftmaxUnits(units);
  std::vector<double> p;
  Softmax(z, idx, p);
  for (std::size_t q = 0; q < idx.size(); ++q) y[idx[q]] = p[q];
  return y;
}

double Head::Loss(std::span<const double> z, std::span<const double> target,
                  std::span<double> grad_z, std::span<double> group_losses) const {
  if (z.size() != units.size() || target.size() != units.size()) {
    throw std::invalid_argument("head size mismatch");
  }
  auto add_group = [&](std::size_t k, double l) {
    if (group_losses.empty()) return;
    const int g = groups.empty() ? 0 : groups[k];
    group_losses[static_cast<std::size_t>(g)] += l;
  };
  double loss = 0.0;
  for (std::size_t k = 0; k < units.size(); ++k) {
    const double w = weights[k];
    if (units[k] == OutputUnit::kLinear) {
      const double e = z[k] - target[k];
      loss += w * e * e;
      add_group(k, w * e * e);
      if (!grad_z.empty()) grad_z[k] += 2.0 * w * e;
    } else if (units[k] == OutputUnit::kSigmoid) {
      const double l = w * (Softplus(z[k]) - target[k] * z[k]);
      loss += l;
      add_group(k, l);
      if (!grad_z.empty()) grad_z[k] += w * (Sigmoid(z[k]) - target[k]);
    }
  }
  const auto idx = SoftmaxUnits(units);
  if (!idx.empty()) {
    std::vector<double> p;
    Softmax(z, idx, p);
    std::vector<double> g(idx.size());
    double dot = 0.0;
    for (std::size_t q = 0; q < idx.size(); ++q) {
      const std::size_t k = idx[q];
      const double e = p[q] - target[k];
      loss += weights[k] * e * e;
      add_group(k, weights[k] * e * e);
      g[q] = 2.0 * weights[k] * e;
      dot += g[q] * p[q];
    }
    if (!grad_z.empty()) {
      for (std::size_t q = 0; q < idx.size(); ++q) grad_z[idx[q]] += p[q] * (g[q] - dot);
    }
  }
  return loss;
}

void Head::BackpropTransform(std::span<const double> z, std::span<const double> grad_y,
                             std::span<double> grad_z) const {
  for (std::size_t k = 0; k < units.size(); ++k) {
    if (units[k] == OutputUnit::kLinear) {
      grad_z[k] += grad_y[k];
    } else if (units[k] == OutputUnit::kSigmoid) {
      const double s = Sigmoid(z[k]);
      grad_z[k] += grad_y[k] * s * (1.0 - s);
    }
  }
  const auto idx = SoftmaxUnits(units);
  if (idx.empty()) return;
  std::vector<double> p;
  Softmax(z, idx, p);
  double dot = 0.0;
  for (std::size_t q = 0; q < idx.size(); ++q) dot += grad_y[idx[q]] * p[q];
  for (std::size_t q = 0; q < idx.size(); ++q) grad_z[idx[q]] += p[q] * (grad_y[idx[q]] - dot);
}

}  // namespace siterank
