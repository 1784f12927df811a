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

#include "siterank/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "json.hpp"
#include "siterank/csv.hpp"
#include "siterank/errors.hpp"

namespace siterank {

namespace {

using nlohmann::json;

constexpr const char* kIdColumn = "registry_id";
constexpr const char* kTypeColumn = "site_type";
constexpr const char* kLonColumn = "longitude";
constexpr const char* kLatColumn = "latitude";
constexpr const char* kCountyColumn = "county_fips";
constexpr const char* kStateColumn = "state_fips";

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool ParseDouble(std::string_view text, double& out) {
  text = Trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool ParseInt(std::string_view text, std::int64_t& out) {
  text = Trim(text);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec == std::errc() && ptr == text.data() + text.size()) return true;
  // Codes exported through spreadsheets sometimes arrive as "24.0".
  double d = 0.0;
  if (ParseDouble(text, d) && std::isfinite(d) && d == std::floor(d) &&
      std::abs(d) < 9.0e15) {
    out = static_cast<std::int64_t>(d);
    return true;
  }
  return false;
}

template <typename Enum>
Enum ParseEnum(const std::string& text,
               std::initializer_list<std::pair<const char*, Enum>> names,
               const char* what) {
  const std::string lowered = Lower(text);
  for (const auto& [name, value] : names) {
    if (lowered == name) return value;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + text + "'");
}

Direction ParseDirection(const std::string& s) {
  return ParseEnum<Direction>(
      s, {{"maximize", Direction::kMaximize}, {"max", Direction::kMaximize},
          {"minimize", Direction::kMinimize}, {"min", Direction::kMinimize}},
      "direction");
}

ObjectiveKind ParseKind(const std::string& s) {
  return ParseEnum<ObjectiveKind>(
      s, {{"continuous", ObjectiveKind::kContinuous}, {"binary", ObjectiveKind::kBinary}},
      "kind");
}

Category ParseCategory(const std::string& s) {
  return ParseEnum<Category>(s,
                             {{"socioeconomic", Category::kSocioeconomic},
                              {"safety", Category::kSafety},
                              {"proximity", Category::kProximity}},
                             "category");
}

bool ParseSiteType(std::string_view text, SiteType& out) {
  const std::string lowered = Lower(std::string(Trim(text)));
  if (lowered == "coal" || lowered == "cpp") {
    out = SiteType::kCoal;
    return true;
  }
  if (lowered == "brownfield") {
    out = SiteType::kBrownfield;
    return true;
  }
  return false;
}

// Integer grid cell of a coordinate, truncated toward zero. Quotients that
// land within rounding noise of an integer snap to it, so 0.29 / 0.01 maps to
// cell 29 rather than 28.
std::int64_t TruncatedCell(double value, double precision) {
  const double q = value / precision;
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q))) {
    return static_cast<std::int64_t>(r);
  }
  return static_cast<std::int64_t>(std::trunc(q));
}

}  // namespace

ObjectiveSpec::ObjectiveSpec(std::vector<ObjectiveDef> objectives)
    : objectives_(std::move(objectives)) {
  if (objectives_.empty()) throw ConfigError("objective spec is empty");
  if (objectives_.size() > 64) {
    throw ConfigError("at most 64 objectives are supported");
  }
  std::set<std::string> names;
  for (const auto& o : objectives_) {
    if (o.name.empty()) throw ConfigError("objective with empty name");
    if (!names.insert(o.name).second) {
      throw ConfigError("duplicate objective name '" + o.name + "'");
    }
  }
}

std::ptrdiff_t ObjectiveSpec::IndexOf(const std::string& name) const {
  for (std::size_t j = 0; j < objectives_.size(); ++j) {
    if (objectives_[j].name == name) return static_cast<std::ptrdiff_t>(j);
  }
  return -1;
}

std::vector<std::size_t> ObjectiveSpec::IndicesOfKind(ObjectiveKind kind) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < objectives_.size(); ++j) {
    if (objectives_[j].kind == kind) out.push_back(j);
  }
  return out;
}

ObjectiveSpec ObjectiveSpec::FromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("objective spec: ") + e.what());
  }
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("objectives")) {
      throw ConfigError("objective spec: missing 'objectives' array");
    }
    list = &doc["objectives"];
  }
  if (!list->is_array()) throw ConfigError("objective spec: 'objectives' must be an array");
  std::vector<ObjectiveDef> defs;
  for (const auto& item : *list) {
    if (!item.is_object() || !item.contains("name")) {
      throw ConfigError("objective spec: every entry needs a 'name'");
    }
    ObjectiveDef d;
    d.name = item["name"].get<std::string>();
    if (item.contains("direction")) d.direction = ParseDirection(item["direction"].get<std::string>());
    if (item.contains("kind")) d.kind = ParseKind(item["kind"].get<std::string>());
    if (item.contains("category")) d.category = ParseCategory(item["category"].get<std::string>());
    if (item.contains("state_level")) d.state_level = item["state_level"].get<bool>();
    defs.push_back(std::move(d));
  }
  return ObjectiveSpec(std::move(defs));
}

ObjectiveSpec ObjectiveSpec::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open objective spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

std::string ObjectiveSpec::ToJson() const {
  json list = json::array();
  for (const auto& o : objectives_) {
    list.push_back({{"name", o.name},
                    {"direction", ToString(o.direction)},
                    {"kind", ToString(o.kind)},
                    {"category", ToString(o.category)},
                    {"state_level", o.state_level}});
  }
  return json{{"objectives", list}}.dump(2) + "\n";
}

ObjectiveSpec DefaultObjectiveSpec() {
  using D = Direction;
  using K = ObjectiveKind;
  using C = Category;
  constexpr auto kMax = D::kMaximize;
  constexpr auto kMin = D::kMinimize;
  constexpr auto kCont = K::kContinuous;
  constexpr auto kBin = K::kBinary;
  return ObjectiveSpec({
      {"state_nuclear_restrictions", kMin, kCont, C::kSocioeconomic, true},
      {"state_electricity_price", kMax, kCont, C::kSocioeconomic, true},
      {"state_net_electricity_imports", kMax, kCont, C::kSocioeconomic, true},
      {"state_nuclear_inclusive_policy", kMax, kBin, C::kSocioeconomic, true},
      {"population_sentiment", kMax, kCont, C::kSocioeconomic, false},
      {"traditional_regulation", kMax, kCont, C::kSocioeconomic, true},
      {"labor_rate_5yr", kMin, kCont, C::kSocioeconomic, true},
      {"social_vulnerability_index", kMin, kCont, C::kSocioeconomic, false},
      {"protected_lands", kMin, kCont, C::kSafety, false},
      {"hazardous_facilities_5mi", kMin, kCont, C::kSafety, false},
      {"no_fault_line", kMax, kBin, C::kSafety, false},
      {"no_landslide_area", kMax, kBin, C::kSafety, false},
      {"pga_below_0_3g", kMax, kBin, C::kSafety, false},
      {"no_flood_100yr", kMax, kBin, C::kSafety, false},
      {"no_open_water_wetland", kMax, kBin, C::kSafety, false},
      {"slope_below_12pct", kMax, kBin, C::kSafety, false},
      {"population_center_distance", kMax, kCont, C::kProximity, false},
      {"retiring_facility_distance", kMax, kCont, C::kProximity, false},
      {"nuclear_rd_centers_100mi", kMax, kCont, C::kProximity, false},
      {"substation_distance", kMin, kCont, C::kProximity, false},
      {"transportation_distance", kMin, kCont, C::kProximity, false},
      {"streamflow_50kgpm_20mi", kMax, kBin, C::kProximity, false},
  });
}

std::string ToString(SiteType t) { return t == SiteType::kCoal ? "coal" : "brownfield"; }
std::string ToString(Direction d) {
  return d == Direction::kMaximize ? "maximize" : "minimize";
}
std::string ToString(ObjectiveKind k) {
  return k == ObjectiveKind::kContinuous ? "continuous" : "binary";
}
std::string ToString(Category c) {
  switch (c) {
    case Category::kSocioeconomic:
      return "socioeconomic";
    case Category::kSafety:
      return "safety";
    case Category::kProximity:
      return "proximity";
  }
  return "unknown";
}

SiteTable parse_sites(std::istream& in, const ObjectiveSpec& spec,
                      const ParseOptions& options) {
  csv::Reader reader(in);
  auto header = reader.Next();
  if (!header) throw ParseError(0, "", "no sites");

  const std::vector<std::string> fixed = {kIdColumn,  kTypeColumn,   kLonColumn,
                                          kLatColumn, kCountyColumn, kStateColumn};
  std::unordered_map<std::string, std::size_t> column_of;
  for (std::size_t c = 0; c < header->size(); ++c) {
    std::string name(Trim((*header)[c]));
    const bool known = std::find(fixed.begin(), fixed.end(), name) != fixed.end() ||
                       spec.IndexOf(name) >= 0;
    if (!known) throw ParseError(0, name, "unknown objective column");
    if (!column_of.emplace(name, c).second) {
      throw ParseError(0, name, "duplicate column");
    }
  }
  for (const auto& name : fixed) {
    if (!column_of.contains(name)) throw ParseError(0, name, "missing column");
  }
  std::vector<std::size_t> objective_column(spec.size());
  for (std::size_t j = 0; j < spec.size(); ++j) {
    auto it = column_of.find(spec[j].name);
    if (it == column_of.end()) throw ParseError(0, spec[j].name, "missing column");
    objective_column[j] = it->second;
  }

  SiteTable table;
  table.spec = spec;
  std::unordered_set<std::string> seen_ids;
  std::size_t row = 0;
  while (auto fields = reader.Next()) {
    ++row;
    if (fields->size() != header->size()) {
      throw ParseError(row, "", "expected " + std::to_string(header->size()) +
                                    " fields, found " + std::to_string(fields->size()));
    }
    auto field = [&](const std::string& name) -> const std::string& {
      return (*fields)[column_of.at(name)];
    };
    SiteRecord rec;
    rec.registry_id = std::string(Trim(field(kIdColumn)));
    if (rec.registry_id.empty()) throw ParseError(row, kIdColumn, "empty registry id");
    if (!seen_ids.insert(rec.registry_id).second) {
      throw ParseError(row, kIdColumn, "duplicate registry_id '" + rec.registry_id + "'");
    }
    if (!ParseSiteType(field(kTypeColumn), rec.site_type)) {
      throw ParseError(row, kTypeColumn, "expected 'coal' or 'brownfield'");
    }
    if (!ParseDouble(field(kLonColumn), rec.longitude) || !std::isfinite(rec.longitude) ||
        std::abs(rec.longitude) > 180.0) {
      throw ParseError(row, kLonColumn, "invalid longitude '" + field(kLonColumn) + "'");
    }
    if (!ParseDouble(field(kLatColumn), rec.latitude) || !std::isfinite(rec.latitude) ||
        std::abs(rec.latitude) > 90.0) {
      throw ParseError(row, kLatColumn, "invalid latitude '" + field(kLatColumn) + "'");
    }
    if (options.validate_bounds &&
        (rec.longitude < -125.0 || rec.longitude > -66.0 || rec.latitude < 24.0 ||
         rec.latitude > 50.0)) {
      throw ParseError(row, kLonColumn, "coordinates outside the contiguous US");
    }
    if (!ParseInt(field(kCountyColumn), rec.county_fips)) {
      throw ParseError(row, kCountyColumn, "invalid FIPS code '" + field(kCountyColumn) + "'");
    }
    if (!ParseInt(field(kStateColumn), rec.state_fips)) {
      throw ParseError(row, kStateColumn, "invalid FIPS code '" + field(kStateColumn) + "'");
    }
    rec.raw_objectives.resize(spec.size());
    for (std::size_t j = 0; j < spec.size(); ++j) {
      const std::string& text = (*fields)[objective_column[j]];
      if (!ParseDouble(text, rec.raw_objectives[j])) {
        throw ParseError(row, spec[j].name, "not a number: '" + text + "'");
      }
    }
    table.sites.push_back(std::move(rec));
  }
  if (table.sites.empty()) throw ParseError(0, "", "no sites");
  return table;
}

SiteTable load_sites(const std::filesystem::path& path, const ObjectiveSpec& spec,
                     const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_sites(in, spec, options);
}

void write_sites(std::ostream& out, const SiteTable& table) {
  std::vector<std::string> header = {kIdColumn,  kTypeColumn,   kLonColumn,
                                     kLatColumn, kCountyColumn, kStateColumn};
  for (const auto& o : table.spec.objectives()) header.push_back(o.name);
  csv::WriteRow(out, header);
  for (const auto& s : table.sites) {
    std::vector<std::string> row = {s.registry_id,
                                    ToString(s.site_type),
                                    csv::FormatDouble(s.longitude),
                                    csv::FormatDouble(s.latitude),
                                    std::to_string(s.county_fips),
                                    std::to_string(s.state_fips)};
    for (double v : s.raw_objectives) row.push_back(csv::FormatDouble(v));
    csv::WriteRow(out, row);
  }
}

double truncate_coordinate(double value, double precision) {
  return static_cast<double>(TruncatedCell(value, precision)) * precision;
}

DedupResult truncate_dedup(const SiteTable& table, double precision) {
  if (!(precision > 0.0) || !std::isfinite(precision)) {
    throw std::invalid_argument("dedup precision must be positive");
  }
  struct KeyHash {
    std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const {
      return std::hash<std::int64_t>()(k.first) * 1000003u ^ std::hash<std::int64_t>()(k.second);
    }
  };
  std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::size_t, KeyHash> kept_at;
  DedupResult result;
  result.table.spec = table.spec;
  for (const auto& site : table.sites) {
    const std::pair key{TruncatedCell(site.longitude, precision),
                        TruncatedCell(site.latitude, precision)};
    auto [it, inserted] = kept_at.emplace(key, result.table.sites.size());
    if (inserted) {
      result.table.sites.push_back(site);
    } else {
      result.aliases[result.table.sites[it->second].registry_id].push_back(site.registry_id);
    }
  }
  return result;
}

void write_aliases(std::ostream& out, const AliasMap& aliases) {
  csv::WriteRow(out, {"kept_id", "removed_id"});
  for (const auto& [kept, removed] : aliases) {
    for (const auto& r : removed) csv::WriteRow(out, {kept, r});
  }
}

AliasMap read_aliases(std::istream& in) {
  csv::Reader reader(in);
  AliasMap aliases;
  auto header = reader.Next();
  if (!header) return aliases;
  if (header->size() != 2 || (*header)[0] != "kept_id" || (*header)[1] != "removed_id") {
    throw ParseError(0, "", "alias file header must be kept_id,removed_id");
  }
  std::size_t row = 0;
  while (auto fields = reader.Next()) {
    ++row;
    if (fields->size() != 2) throw ParseError(row, "", "expected 2 fields");
    aliases[(*fields)[0]].push_back((*fields)[1]);
  }
  return aliases;
}

std::vector<std::size_t> minmax_scale_columns(std::span<double> values, std::size_t rows,
                                              std::size_t cols) {
  std::vector<std::size_t> constant;
  for (std::size_t j = 0; j < cols; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < rows; ++i) {
      lo = std::min(lo, values[i * cols + j]);
      hi = std::max(hi, values[i * cols + j]);
    }
    if (!(hi > lo)) {
      constant.push_back(j);
      for (std::size_t i = 0; i < rows; ++i) values[i * cols + j] = 0.5;
      continue;
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < rows; ++i) {
      double& v = values[i * cols + j];
      v = std::clamp((v - lo) / range, 0.0, 1.0);
    }
  }
  return constant;
}

ScaledMatrix orient_and_scale(const SiteTable& table) {
  if (table.sites.empty()) throw std::invalid_argument("cannot scale an empty table");
  ScaledMatrix m;
  m.rows = table.sites.size();
  m.cols = table.spec.size();
  m.spec = table.spec;
  m.values.resize(m.rows * m.cols);
  m.site_ids.reserve(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const auto& site = table.sites[i];
    if (site.raw_objectives.size() != m.cols) {
      throw std::invalid_argument("site " + site.registry_id + " has " +
                                  std::to_string(site.raw_objectives.size()) +
                                  " objectives, spec has " + std::to_string(m.cols));
    }
    m.site_ids.push_back(site.registry_id);
    for (std::size_t j = 0; j < m.cols; ++j) {
      const double v = site.raw_objectives[j];
      if (!std::isfinite(v)) {
        throw std::invalid_argument("non-finite value for '" + table.spec[j].name +
                                    "' at site " + site.registry_id);
      }
      m.values[i * m.cols + j] = table.spec[j].direction == Direction::kMinimize ? -v : v;
    }
  }
  m.constant_columns = minmax_scale_columns(m.values, m.rows, m.cols);
  return m;
}

void write_scaled(std::ostream& out, const ScaledMatrix& matrix) {
  std::vector<std::string> header = {kIdColumn};
  for (const auto& o : matrix.spec.objectives()) header.push_back(o.name);
  csv::WriteRow(out, header);
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    std::vector<std::string> row = {matrix.site_ids[i]};
    for (std::size_t j = 0; j < matrix.cols; ++j) {
      row.push_back(csv::FormatDouble(matrix.at(i, j)));
    }
    csv::WriteRow(out, row);
  }
}

ScaledMatrix read_scaled(std::istream& in, const ObjectiveSpec& spec) {
  csv::Reader reader(in);
  auto header = reader.Next();
  if (!header || header->size() != spec.size() + 1 || (*header)[0] != kIdColumn) {
    throw ParseError(0, "", "scaled matrix header must be registry_id + objectives");
  }
  for (std::size_t j = 0; j < spec.size(); ++j) {
    if ((*header)[j + 1] != spec[j].name) {
      throw ParseError(0, (*header)[j + 1], "column does not match objective spec order");
    }
  }
  ScaledMatrix m;
  m.cols = spec.size();
  m.spec = spec;
  std::size_t row = 0;
  while (auto fields = reader.Next()) {
    ++row;
    if (fields->size() != spec.size() + 1) throw ParseError(row, "", "wrong field count");
    m.site_ids.push_back((*fields)[0]);
    for (std::size_t j = 0; j < spec.size(); ++j) {
      double v = 0.0;
      if (!ParseDouble((*fields)[j + 1], v) || !(v >= 0.0 && v <= 1.0)) {
        throw ParseError(row, spec[j].name, "expected a value in [0, 1]");
      }
      m.values.push_back(v);
    }
  }
  m.rows = row;
  if (m.rows == 0) throw ParseError(0, "", "no sites");
  return m;
}

}  // namespace siterank
