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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "siterank/errors.hpp"

namespace siterank {
namespace {

Layer Dense(std::size_t in, std::size_t out, Activation a, double w = 0.0, double b = 0.0) {
  Layer L;
  L.in = in;
  L.out = out;
  L.activation = a;
  L.weights.assign(in * out, w);
  L.bias.assign(out, b);
  return L;
}

TEST(Network, ZeroWeightsGiveActivatedBias) {
  Network net({Dense(3, 2, Activation::kSigmoid, 0.0, 0.0)});
  const std::vector<double> x{5, -7, 11};
  EXPECT_EQ(net.Forward(x), (std::vector<double>{0.5, 0.5}));
  net.mutable_layers()[0].bias = {-2.0, 3.0};
  net.mutable_layers()[0].activation = Activation::kRelu;
  EXPECT_EQ(net.Forward(x), (std::vector<double>{0.0, 3.0}));
  net.mutable_layers()[0].activation = Activation::kLeakyRelu;
  EXPECT_EQ(net.Forward(x), (std::vector<double>{-0.02, 3.0}));
}

TEST(Network, IdentityLayer) {
  Layer L = Dense(3, 3, Activation::kLinear);
  for (std::size_t i = 0; i < 3; ++i) L.weights[i * 3 + i] = 1.0;
  const Network net({L});
  const std::vector<double> x{0.25, -4, 9};
  EXPECT_EQ(net.Forward(x), x);
}

TEST(Network, SeededInitIsDeterministic) {
  const Network a({4, 8, 8, 2}, Activation::kTanh, Activation::kLinear, 99);
  const Network b({4, 8, 8, 2}, Activation::kTanh, Activation::kLinear, 99);
  const Network c({4, 8, 8, 2}, Activation::kTanh, Activation::kLinear, 100);
  EXPECT_EQ(a.Parameters(), b.Parameters());
  EXPECT_NE(a.Parameters(), c.Parameters());
  EXPECT_EQ(a.parameter_count(), 4u * 8 + 8 + 8 * 8 + 8 + 8 * 2 + 2);
  for (const auto& L : a.layers()) {
    for (double v : L.bias) EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(a.layers().back().activation, Activation::kLinear);
  EXPECT_EQ(a.layers().front().activation, Activation::kTanh);
}

TEST(Network, ParameterRoundTrip) {
  Network a({3, 5, 2}, Activation::kRelu, Activation::kLinear, 1);
  auto p = a.Parameters();
  for (double& v : p) v *= -1.5;
  a.SetParameters(p);
  EXPECT_EQ(a.Parameters(), p);
  p.pop_back();
  EXPECT_THROW(a.SetParameters(p), std::invalid_argument);
}

TEST(Network, NonFiniteNamesLayer) {
  Network net({Dense(1, 1, Activation::kLinear, 1e200), Dense(1, 1, Activation::kLinear, 1e200)});
  const std::vector<double> x{1e10};
  try {
    net.Forward(x);
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_EQ(e.layer(), 1u);
  }
  const std::vector<double> nan{std::numeric_limits<double>::quiet_NaN()};
  try {
    net.Forward(nan);
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_EQ(e.layer(), 0u);
  }
}

TEST(Network, RejectsBadShapes) {
  EXPECT_THROW(Network({Dense(2, 3, Activation::kLinear), Dense(2, 1, Activation::kLinear)}),
               std::invalid_argument);
  Layer bad = Dense(2, 2, Activation::kLinear);
  bad.bias.pop_back();
  EXPECT_THROW(Network({bad}), std::invalid_argument);
  const Network ok({2, 1}, Activation::kRelu, Activation::kLinear, 0);
  const std::vector<double> x{1, 2, 3};
  EXPECT_THROW(ok.Forward(x), std::invalid_argument);
}

TEST(Network, ActivationNames) {
  for (auto a : {Activation::kLinear, Activation::kRelu, Activation::kLeakyRelu, Activation::kTanh,
                 Activation::kSigmoid}) {
    EXPECT_EQ(ParseActivation(ToString(a)), a);
  }
  EXPECT_THROW(ParseActivation("swish"), ConfigError);
}

Head MixedHead() {
  Head h;
  h.units = {OutputUnit::kLinear, OutputUnit::kSigmoid, OutputUnit::kSoftmax, OutputUnit::kSoftmax,
             OutputUnit::kSoftmax};
  h.weights = {1.0, 0.5, 0.3, 0.3, 0.3};
  h.groups = {0, 1, 2, 2, 2};
  return h;
}

TEST(Head, TransformNormalizesSoftmaxGroup) {
  const Head h = MixedHead();
  const std::vector<double> z{2.5, 0.0, 1.0, 1.0, 1.0};
  const auto y = h.Transform(z);
  EXPECT_EQ(y[0], 2.5);
  EXPECT_EQ(y[1], 0.5);
  EXPECT_DOUBLE_EQ(y[2] + y[3] + y[4], 1.0);
  EXPECT_DOUBLE_EQ(y[2], 1.0 / 3.0);
}

TEST(Head, LossGradientMatchesFiniteDifferences) {
  const Head h = MixedHead();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> z(5), target{g(rng), 1.0, 0.2, 0.5, 0.3};
    for (double& v : z) v = g(rng);
    std::vector<double> grad(5, 0.0), groups(3, 0.0);
    const double loss = h.Loss(z, target, grad, groups);
    EXPECT_NEAR(groups[0] + groups[1] + groups[2], loss, 1e-12);
    for (std::size_t k = 0; k < 5; ++k) {
      const double eps = 1e-6;
      auto zp = z, zm = z;
      zp[k] += eps;
      zm[k] -= eps;
      const double numeric = (h.Loss(zp, target, {}) - h.Loss(zm, target, {})) / (2 * eps);
      EXPECT_NEAR(grad[k], numeric, 1e-7) << "unit " << k;
    }
  }
}

TEST(Head, BackpropTransformMatchesFiniteDifferences) {
  const Head h = MixedHead();
  const std::vector<double> z{0.3, -1.2, 0.4, -0.7, 1.9};
  const std::vector<double> gy{1.0, -2.0, 0.5, 3.0, -1.0};
  std::vector<double> gz(5, 0.0);
  h.BackpropTransform(z, gy, gz);
  for (std::size_t k = 0; k < 5; ++k) {
    const double eps = 1e-6;
    auto zp = z, zm = z;
    zp[k] += eps;
    zm[k] -= eps;
    const auto yp = h.Transform(zp), ym = h.Transform(zm);
    double numeric = 0.0;
    for (std::size_t q = 0; q < 5; ++q) numeric += gy[q] * (yp[q] - ym[q]) / (2 * eps);
    EXPECT_NEAR(gz[k], numeric, 1e-7) << "unit " << k;
  }
}

}  // namespace
}  // namespace siterank
