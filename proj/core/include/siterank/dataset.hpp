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
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace siterank {

enum class SiteType { kCoal, kBrownfield };
enum class Direction { kMaximize, kMinimize };
enum class ObjectiveKind { kContinuous, kBinary };
enum class Category { kSocioeconomic, kSafety, kProximity };

struct ObjectiveDef {
  std::string name;
  Direction direction = Direction::kMaximize;
  ObjectiveKind kind = ObjectiveKind::kContinuous;
  Category category = Category::kSocioeconomic;
  // Value depends only on the state the site lies in (used by the lookup
  // table predictor; ignored by ranking).
  bool state_level = false;

  friend bool operator==(const ObjectiveDef&, const ObjectiveDef&) = default;
};

class ObjectiveSpec {
 public:
  ObjectiveSpec() = default;
  // Throws ConfigError on empty list or duplicate names.
  explicit ObjectiveSpec(std::vector<ObjectiveDef> objectives);

  std::size_t size() const { return objectives_.size(); }
  const ObjectiveDef& operator[](std::size_t j) const { return objectives_[j]; }
  const std::vector<ObjectiveDef>& objectives() const { return objectives_; }

  // Index of objective `name`, or -1.
  std::ptrdiff_t IndexOf(const std::string& name) const;

  std::vector<std::size_t> IndicesOfKind(ObjectiveKind kind) const;

  // JSON document of the form {"objectives": [{"name", "direction", "kind",
  // "category", "state_level"?}, ...]}.
  static ObjectiveSpec FromJson(const std::string& text);
  static ObjectiveSpec Load(const std::filesystem::path& path);
  std::string ToJson() const;

  friend bool operator==(const ObjectiveSpec&, const ObjectiveSpec&) = default;

 private:
  std::vector<ObjectiveDef> objectives_;
};

// The 22 siting objectives in their customary order.
ObjectiveSpec DefaultObjectiveSpec();

struct SiteRecord {
  std::string registry_id;
  SiteType site_type = SiteType::kBrownfield;
  double longitude = 0.0;
  double latitude = 0.0;
  std::int64_t county_fips = 0;
  std::int64_t state_fips = 0;
  std::vector<double> raw_objectives;
};

struct SiteTable {
  ObjectiveSpec spec;
  std::vector<SiteRecord> sites;

  std::size_t size() const { return sites.size(); }
};

struct ParseOptions {
  // Reject coordinates outside the contiguous-US bounding box.
  bool validate_bounds = false;
};

// Reads delimited text whose header names registry_id, site_type, longitude,
// latitude, county_fips, state_fips and every objective in `spec`.
// Throws ParseError naming the offending row/column.
SiteTable parse_sites(std::istream& in, const ObjectiveSpec& spec,
                      const ParseOptions& options = {});
SiteTable load_sites(const std::filesystem::path& path, const ObjectiveSpec& spec,
                     const ParseOptions& options = {});
void write_sites(std::ostream& out, const SiteTable& table);

std::string ToString(SiteType t);
std::string ToString(Direction d);
std::string ToString(ObjectiveKind k);
std::string ToString(Category c);

// kept id -> ids removed because they share its truncated coordinate key.
using AliasMap = std::map<std::string, std::vector<std::string>>;

struct DedupResult {
  SiteTable table;
  AliasMap aliases;
};

// Drops digits beyond `precision` (toward zero): -81.4682 -> -81.46.
double truncate_coordinate(double value, double precision);

// Collapses sites whose truncated (lon, lat) keys collide onto the first one
// seen. Throws std::invalid_argument if precision <= 0.
DedupResult truncate_dedup(const SiteTable& table, double precision = 0.01);

void write_aliases(std::ostream& out, const AliasMap& aliases);
AliasMap read_aliases(std::istream& in);

// n x m matrix in [0, 1], larger is better in every column.
struct ScaledMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  std::vector<std::string> site_ids;
  ObjectiveSpec spec;
  // Columns that were constant before scaling (set to 0.5).
  std::vector<std::size_t> constant_columns;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
};

// Min-max scales each column of a row-major n x m block in place.
// Constant columns become 0.5 and are reported in the return value.
std::vector<std::size_t> minmax_scale_columns(std::span<double> values,
                                              std::size_t rows, std::size_t cols);

// Negates minimize-direction columns, then min-max scales every column.
// Throws std::invalid_argument on an empty table or a non-finite value.
ScaledMatrix orient_and_scale(const SiteTable& table);

// Scaled matrices are stored as CSV: registry_id followed by one column per
// objective, values printed round-trip exact.
void write_scaled(std::ostream& out, const ScaledMatrix& matrix);
ScaledMatrix read_scaled(std::istream& in, const ObjectiveSpec& spec);

}  // namespace siterank
