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

// Shared fixtures: temporary directories, random matrices and an independent
// dense reference for the whole ranking pipeline.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "siterank/dataset.hpp"
#include "siterank/ranking.hpp"

namespace siterank::testing {

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    auto base = std::filesystem::temp_directory_path();
    for (;;) {
      path_ = base / ("siterank-test-" + std::to_string(rng()));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string DataPath(const std::string& name) {
  return std::string(SITERANK_TEST_DATA) + "/" + name;
}

inline ObjectiveSpec SyntheticSpec(const std::vector<bool>& binary) {
  std::vector<ObjectiveDef> defs;
  for (std::size_t j = 0; j < binary.size(); ++j) {
    ObjectiveDef d;
    d.name = "obj" + std::to_string(j + 1);
    d.kind = binary[j] ? ObjectiveKind::kBinary : ObjectiveKind::kContinuous;
    defs.push_back(d);
  }
  return ObjectiveSpec(defs);
}

// Values in [0, 1]. Binary columns hold 0/1; continuous columns are drawn
// from `levels` evenly spaced values when levels > 0 (forcing ties) and
// uniformly otherwise.
inline ScaledMatrix RandomMatrix(std::size_t n, std::size_t m, std::mt19937_64& rng,
                                 double binary_share = 0.3, int levels = 0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<bool> binary(m);
  for (std::size_t j = 0; j < m; ++j) binary[j] = u(rng) < binary_share;
  ScaledMatrix x;
  x.rows = n;
  x.cols = m;
  x.spec = SyntheticSpec(binary);
  x.values.resize(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    x.site_ids.push_back("s" + std::to_string(i + 1));
    for (std::size_t j = 0; j < m; ++j) {
      double v = u(rng);
      if (binary[j]) {
        v = v < 0.5 ? 0.0 : 1.0;
      } else if (levels > 0) {
        v = std::floor(v * levels) / std::max(1, levels - 1);
        v = std::min(v, 1.0);
      }
      x.values[i * m + j] = v;
    }
  }
  return x;
}

// Brute force over every nonempty column subset, enumerated by bitmask, with
// its own all-pairs dominance test.
struct DenseOracle {
  std::size_t n = 0, m = 0;
  std::vector<std::vector<double>> nr;  // [s-1][i]
  std::vector<std::vector<double>> oc;  // [s-1][i*m+j]
  std::vector<std::uint64_t> count;     // subsets per length
  std::vector<std::vector<std::uint8_t>> full_front;  // mask for the all-columns subset
  std::vector<double> sr, metric;
  std::vector<std::vector<double>> nc;  // [s-1][i*m+j]
  std::vector<double> s_matrix, sc;
  std::vector<double> variance;

  explicit DenseOracle(const ScaledMatrix& x) : n(x.rows), m(x.cols) {
    nr.assign(m, std::vector<double>(n, 0.0));
    oc.assign(m, std::vector<double>(n * m, 0.0));
    count.assign(m, 0);
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
      std::vector<std::size_t> cols;
      for (std::size_t j = 0; j < m; ++j) {
        if (mask >> j & 1U) cols.push_back(j);
      }
      const std::size_t s = cols.size();
      std::vector<std::uint8_t> front(n, 1);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n && front[i]; ++k) {
          if (k == i) continue;
          bool all_ge = true, any_gt = false;
          for (std::size_t j : cols) {
            const double a = x.values[k * m + j], b = x.values[i * m + j];
            if (a < b) all_ge = false;
            if (a > b) any_gt = true;
          }
          if (all_ge && any_gt) front[i] = 0;
        }
      }
      std::size_t size = 0;
      for (auto f : front) size += f;
      ++count[s - 1];
      for (std::size_t i = 0; i < n; ++i) {
        if (!front[i]) continue;
        nr[s - 1][i] += 1.0 / static_cast<double>(size);
        for (std::size_t j : cols) oc[s - 1][i * m + j] += 1.0;
      }
      if (s == m) full_front.push_back(front);
    }

    sr.assign(n, 0.0);
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t i = 0; i < n; ++i) sr[i] += nr[s][i];
    }
    const auto [lo, hi] = std::minmax_element(sr.begin(), sr.end());
    metric.assign(n, 0.0);
    if (*hi > *lo) {
      for (std::size_t i = 0; i < n; ++i) metric[i] = (sr[i] - *lo) / (*hi - *lo);
    }

    nc.assign(m, std::vector<double>(n * m, 0.0));
    s_matrix.assign(n * m, 0.0);
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m; ++j) row += oc[s][i * m + j];
        for (std::size_t j = 0; j < m; ++j) {
          nc[s][i * m + j] = row > 0.0 ? oc[s][i * m + j] / row : 0.0;
          s_matrix[i * m + j] += nc[s][i * m + j];
        }
      }
    }
    sc.assign(n * m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j) row += s_matrix[i * m + j];
      for (std::size_t j = 0; j < m; ++j) sc[i * m + j] = row > 0.0 ? s_matrix[i * m + j] / row : 0.0;
    }

    for (std::size_t s = 0; s < m; ++s) {
      double mean = 0.0;
      for (double v : nr[s]) mean += v;
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (double v : nr[s]) var += (v - mean) * (v - mean);
      variance.push_back(var / static_cast<double>(n));
    }
  }
};

inline double MaxAbsDiff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Largest elementwise deviation between a sweep and the oracle across every
// derived quantity; infinity on shape mismatch or an incomplete result.
inline double OracleDeviation(const RankResult& r, const DenseOracle& o) {
  if (!r.complete || r.lengths.size() != o.m) return INFINITY;
  double d = 0.0;
  for (std::size_t s = 0; s < o.m; ++s) {
    d = std::max(d, MaxAbsDiff(r.lengths[s]->nr_row, o.nr[s]));
    d = std::max(d, MaxAbsDiff(r.lengths[s]->oc, o.oc[s]));
    d = std::max(d, MaxAbsDiff(r.contributions.nc_by_length[s], o.nc[s]));
  }
  d = std::max(d, MaxAbsDiff(r.scores.sr, o.sr));
  d = std::max(d, MaxAbsDiff(r.scores.metric, o.metric));
  d = std::max(d, MaxAbsDiff(r.contributions.s_matrix, o.s_matrix));
  d = std::max(d, MaxAbsDiff(r.contributions.sc, o.sc));
  d = std::max(d, MaxAbsDiff(r.variance, o.variance));
  return d;
}

// Exact equality of every floating-point field, compared bit for bit.
inline bool BitwiseEqual(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

inline bool BitwiseEqual(const RankResult& a, const RankResult& b) {
  if (a.complete != b.complete || a.lengths.size() != b.lengths.size()) return false;
  for (std::size_t s = 0; s < a.lengths.size(); ++s) {
    if (a.lengths[s].has_value() != b.lengths[s].has_value()) return false;
    if (!a.lengths[s]) continue;
    if (a.lengths[s]->combos_done != b.lengths[s]->combos_done) return false;
    if (!BitwiseEqual(a.lengths[s]->nr_row, b.lengths[s]->nr_row)) return false;
    if (!BitwiseEqual(a.lengths[s]->oc, b.lengths[s]->oc)) return false;
  }
  if (!a.complete) return true;
  return BitwiseEqual(a.scores.sr, b.scores.sr) && BitwiseEqual(a.scores.metric, b.scores.metric) &&
         BitwiseEqual(a.contributions.s_matrix, b.contributions.s_matrix) &&
         BitwiseEqual(a.contributions.sc, b.contributions.sc) && BitwiseEqual(a.variance, b.variance);
}

// Raw site table with `states` states, state-level columns shared within a
// state and site-level columns varying per site.
inline SiteTable SyntheticSites(std::size_t n, std::size_t states, std::mt19937_64& rng,
                                const ObjectiveSpec& spec = DefaultObjectiveSpec()) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t m = spec.size();
  std::vector<std::vector<double>> state_values(states, std::vector<double>(m));
  for (auto& row : state_values) {
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = spec[j].kind == ObjectiveKind::kBinary ? (u(rng) < 0.5 ? 0.0 : 1.0) : 100.0 * u(rng);
    }
  }
  SiteTable t{spec, {}};
  for (std::size_t i = 0; i < n; ++i) {
    SiteRecord r;
    r.registry_id = "site" + std::to_string(i + 1);
    r.site_type = i % 7 == 0 ? SiteType::kCoal : SiteType::kBrownfield;
    const std::size_t st = i % states;
    r.state_fips = static_cast<std::int64_t>(st + 1);
    r.county_fips = r.state_fips * 1000 + static_cast<std::int64_t>(i % 5);
    // States occupy separate longitude bands.
    r.longitude = -120.0 + 8.0 * static_cast<double>(st) + 6.0 * u(rng);
    r.latitude = 30.0 + 12.0 * u(rng);
    for (std::size_t j = 0; j < m; ++j) {
      double v;
      if (spec[j].state_level) {
        v = state_values[st][j];
      } else if (spec[j].kind == ObjectiveKind::kBinary) {
        v = u(rng) < 0.5 ? 0.0 : 1.0;
      } else {
        v = std::round(1000.0 * (r.longitude * 0.1 + r.latitude * 0.05 + u(rng))) / 1000.0;
      }
      r.raw_objectives.push_back(v);
    }
    t.sites.push_back(std::move(r));
  }
  return t;
}

}  // namespace siterank::testing
