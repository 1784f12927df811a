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

#include <span>

namespace siterank {

struct EvalMetrics {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  // NaN with r2_defined = false when the targets have zero variance.
  double r2 = 0.0;
  bool r2_defined = true;
};

// Regression metrics over paired values. Multi-output targets are passed
// flattened. Throws std::invalid_argument on length mismatch or fewer than two
// values.
EvalMetrics evaluate(std::span<const double> y_true, std::span<const double> y_pred);

}  // namespace siterank
