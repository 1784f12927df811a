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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "siterank/dataset.hpp"

namespace siterank {

struct LookupConfig {
  std::size_t neighbors = 3;
  // Inverse-distance weights are 1 / d^power, d in degrees.
  double power = 1.0;
};

// Objective predictor for arbitrary locations. Exact coordinates return the
// stored row; otherwise state-level objectives come from the state's row and
// site-level objectives are inverse-distance weighted over the nearest stored
// sites, with binary objectives rounded at 0.5.
class LookupTable {
 public:
  LookupTable() = default;

  // Throws std::invalid_argument on an empty table and Error when two sites
  // share exact coordinates but disagree on any objective.
  static LookupTable Build(const SiteTable& table, const LookupConfig& config = {});

  // x = (longitude, latitude, county_fips, state_fips). Throws Error for a
  // state absent from the table.
  std::vector<double> Predict(std::span<const double> x) const;
  std::vector<double> Predict(double longitude, double latitude, std::int64_t state_fips) const;

  std::size_t size() const { return longitude_.size(); }
  std::size_t width() const { return kinds_.size(); }
  const LookupConfig& config() const { return config_; }
  bool has_state(std::int64_t state_fips) const { return state_rows_.contains(state_fips); }

  void Save(const std::filesystem::path& path) const;
  static LookupTable Load(const std::filesystem::path& path);

 private:
  LookupConfig config_;
  std::vector<ObjectiveKind> kinds_;
  std::vector<bool> state_level_;
  std::vector<double> longitude_;
  std::vector<double> latitude_;
  std::vector<double> rows_;  // size() x width()
  std::map<std::int64_t, std::vector<double>> state_rows_;
  std::map<std::pair<double, double>, std::size_t> exact_;
};

}  // namespace siterank
