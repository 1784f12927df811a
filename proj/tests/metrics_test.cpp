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

#include "siterank/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace siterank {
namespace {

TEST(Metrics, HandComputedCase) {
  const std::vector<double> y{1, 2, 3, 4};
  const std::vector<double> p{2, 2, 2, 6};
  const auto m = evaluate(y, p);
  // errors -1, 0, 1, -2; ss_res 6; ss_tot 5
  EXPECT_DOUBLE_EQ(m.mse, 1.5);
  EXPECT_DOUBLE_EQ(m.mae, 1.0);
  EXPECT_DOUBLE_EQ(m.rmse, std::sqrt(1.5));
  EXPECT_DOUBLE_EQ(m.r2, 1.0 - 6.0 / 5.0);
  EXPECT_TRUE(m.r2_defined);
}

TEST(Metrics, SwappedPairGivesMinusThree) {
  const std::vector<double> y{0, 1};
  const std::vector<double> p{1, 0};
  // ss_res 2, ss_tot 0.5
  const auto m = evaluate(y, p);
  EXPECT_EQ(m.mse, 1.0);
  EXPECT_EQ(m.rmse, 1.0);
  EXPECT_EQ(m.mae, 1.0);
  EXPECT_EQ(m.r2, -3.0);
}

TEST(Metrics, NegativeR2) {
  const std::vector<double> y{0, 1};
  const std::vector<double> p{1, -1};
  // ss_res 1 + 4 = 5, ss_tot 0.5
  EXPECT_DOUBLE_EQ(evaluate(y, p).r2, -9.0);
}

TEST(Metrics, PerfectAndMeanPredictions) {
  const std::vector<double> y{0.5, -2, 7, 3.25};
  EXPECT_DOUBLE_EQ(evaluate(y, y).r2, 1.0);
  EXPECT_EQ(evaluate(y, y).mse, 0.0);
  const double mean = (0.5 - 2 + 7 + 3.25) / 4;
  const std::vector<double> flat(4, mean);
  EXPECT_NEAR(evaluate(y, flat).r2, 0.0, 1e-15);
}

TEST(Metrics, RmseSquaredIsMse) {
  const std::vector<double> y{3, 1, 4, 1, 5, 9, 2, 6};
  const std::vector<double> p{2, 7, 1, 8, 2, 8, 1, 8};
  const auto m = evaluate(y, p);
  EXPECT_NEAR(m.rmse * m.rmse, m.mse, 1e-12);
  EXPECT_LE(m.mae, m.rmse);
}

TEST(Metrics, ConstantTargetsLeaveR2Undefined) {
  const std::vector<double> y{2, 2, 2};
  const std::vector<double> p{1, 2, 3};
  const auto m = evaluate(y, p);
  EXPECT_FALSE(m.r2_defined);
  EXPECT_TRUE(std::isnan(m.r2));
  EXPECT_DOUBLE_EQ(m.mse, 2.0 / 3.0);
}

TEST(Metrics, RejectsBadInput) {
  const std::vector<double> a{1, 2}, b{1}, one{1};
  EXPECT_THROW(evaluate(a, b), std::invalid_argument);
  EXPECT_THROW(evaluate(one, one), std::invalid_argument);
}

}  // namespace
}  // namespace siterank
