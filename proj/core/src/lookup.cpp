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

#include "siterank/lookup.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <stdexcept>

#include "binary_io.hpp"
#include "siterank/errors.hpp"

namespace siterank {

namespace {
constexpr std::string_view kLookupMagic = "SRLT";
constexpr std::uint32_t kLookupVersion = 1;
}  // namespace

LookupTable LookupTable::Build(const SiteTable& table, const LookupConfig& config) {
  if (table.sites.empty()) throw std::invalid_argument("lookup table needs at least one site");
  if (config.neighbors == 0) throw std::invalid_argument("lookup needs at least one neighbor");
  LookupTable lut;
  lut.config_ = config;
  const std::size_t m = table.spec.size();
  for (const auto& o : table.spec.objectives()) {
    lut.kinds_.push_back(o.kind);
    lut.state_level_.push_back(o.state_level);
  }
  std::map<std::int64_t, std::pair<std::vector<double>, std::size_t>> state_sums;
  for (const auto& site : table.sites) {
    if (site.raw_objectives.size() != m) throw std::invalid_argument("site row width mismatch");
    const std::pair key{site.longitude, site.latitude};
    if (auto it = lut.exact_.find(key); it != lut.exact_.end()) {
      const double* prior = lut.rows_.data() + it->second * m;
      if (!std::equal(prior, prior + m, site.raw_objectives.begin())) {
        throw Error("sites share coordinates (" + std::to_string(site.longitude) + ", " +
                    std::to_string(site.latitude) + ") with conflicting objectives; deduplicate first");
      }
      continue;
    }
    lut.exact_.emplace(key, lut.longitude_.size());
    lut.longitude_.push_back(site.longitude);
    lut.latitude_.push_back(site.latitude);
    lut.rows_.insert(lut.rows_.end(), site.raw_objectives.begin(), site.raw_objectives.end());
    auto& [sum, count] = state_sums[site.state_fips];
    if (sum.empty()) sum.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) sum[j] += site.raw_objectives[j];
    ++count;
  }
  for (auto& [state, entry] : state_sums) {
    auto& [sum, count] = entry;
    for (double& v : sum) v /= static_cast<double>(count);
    lut.state_rows_.emplace(state, std::move(sum));
  }
  return lut;
}

std::vector<double> LookupTable::Predict(std::span<const double> x) const {
  if (x.size() != 4) throw std::invalid_argument("lookup input is (lon, lat, county, state)");
  return Predict(x[0], x[1], static_cast<std::int64_t>(std::llround(x[3])));
}

std::vector<double> LookupTable::Predict(double longitude, double latitude,
                                         std::int64_t state_fips) const {
  const std::size_t m = width();
  auto state = state_rows_.find(state_fips);
  if (state == state_rows_.end()) {
    throw Error("state FIPS " + std::to_string(state_fips) + " is not in the lookup table");
  }
  if (auto it = exact_.find({longitude, latitude}); it != exact_.end()) {
    const double* row = rows_.data() + it->second * m;
    return std::vector<double>(row, row + m);
  }

  const std::size_t k = std::min(config_.neighbors, size());
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> dist(size());
  for (std::size_t i = 0; i < size(); ++i) {
    dist[i] = std::hypot(longitude_[i] - longitude, latitude_[i] - latitude);
  }
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
                    });

  std::vector<double> weight(k);
  double total = 0.0;
  for (std::size_t q = 0; q < k; ++q) {
    weight[q] = 1.0 / std::pow(dist[order[q]], config_.power);
    total += weight[q];
  }

  std::vector<double> out(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (state_level_[j]) {
      out[j] = state->second[j];
      continue;
    }
    double v = 0.0;
    double lo = rows_[order[0] * m + j], hi = lo;
    for (std::size_t q = 0; q < k; ++q) {
      const double r = rows_[order[q] * m + j];
      v += weight[q] * r;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    // Rounding can push the weighted mean a few ulps outside the neighbors.
    v = std::clamp(v / total, lo, hi);
    if (kinds_[j] == ObjectiveKind::kBinary) v = v >= 0.5 ? 1.0 : 0.0;
    out[j] = v;
  }
  return out;
}

void LookupTable::Save(const std::filesystem::path& path) const {
  binary::Writer w;
  w.Raw(kLookupMagic);
  w.U32(kLookupVersion);
  w.U64(config_.neighbors);
  w.F64(config_.power);
  w.U64(width());
  for (std::size_t j = 0; j < width(); ++j) {
    w.U8(kinds_[j] == ObjectiveKind::kBinary ? 1 : 0);
    w.U8(state_level_[j] ? 1 : 0);
  }
  w.F64s(longitude_);
  w.F64s(latitude_);
  w.F64s(rows_);
  w.U64(state_rows_.size());
  for (const auto& [state, row] : state_rows_) {
    w.I64(state);
    w.F64s(row);
  }
  w.U64(binary::HashBytes(w.bytes()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error("cannot write lookup table " + path.string());
}

LookupTable LookupTable::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open lookup table " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12) throw Error(path.string() + ": lookup table truncated");
  const std::string_view body(bytes.data(), bytes.size() - 8);
  binary::Reader tail(std::string_view(bytes).substr(bytes.size() - 8));
  if (tail.U64() != binary::HashBytes(body)) throw Error(path.string() + ": checksum mismatch");
  try {
    binary::Reader r(body);
    if (r.Take(4) != kLookupMagic) throw Error(path.string() + ": not a lookup table");
    if (r.U32() != kLookupVersion) throw Error(path.string() + ": unsupported version");
    LookupTable lut;
    lut.config_.neighbors = r.U64();
    lut.config_.power = r.F64();
    const std::uint64_t m = r.U64();
    for (std::uint64_t j = 0; j < m; ++j) {
      lut.kinds_.push_back(r.U8() ? ObjectiveKind::kBinary : ObjectiveKind::kContinuous);
      lut.state_level_.push_back(r.U8() != 0);
    }
    lut.longitude_ = r.F64s();
    lut.latitude_ = r.F64s();
    lut.rows_ = r.F64s();
    if (lut.latitude_.size() != lut.longitude_.size() || lut.rows_.size() != lut.longitude_.size() * m) {
      throw Error(path.string() + ": inconsistent lookup table shape");
    }
    const std::uint64_t states = r.U64();
    for (std::uint64_t q = 0; q < states; ++q) {
      const std::int64_t state = r.I64();
      lut.state_rows_.emplace(state, r.F64s());
    }
    for (std::size_t i = 0; i < lut.longitude_.size(); ++i) {
      lut.exact_.emplace(std::pair{lut.longitude_[i], lut.latitude_[i]}, i);
    }
    return lut;
  } catch (const std::out_of_range&) {
    throw Error(path.string() + ": lookup table truncated");
  }
}

}  // namespace siterank
