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

#include "siterank/export.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "siterank/combinatorics.hpp"
#include "siterank/csv.hpp"

namespace siterank {

namespace {

using csv::FormatDouble;

void RequireComplete(const RankResult& result) {
  if (!result.complete) throw std::invalid_argument("rank result is incomplete");
}

class SiteLookup {
 public:
  explicit SiteLookup(const SiteTable* sites) {
    if (!sites) return;
    for (const auto& s : sites->sites) by_id_.emplace(s.registry_id, &s);
  }
  const SiteRecord* Find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : it->second;
  }

 private:
  std::unordered_map<std::string, const SiteRecord*> by_id_;
};

}  // namespace

std::vector<OutputRow> output_rows(const RankResult& result) {
  std::vector<OutputRow> rows;
  rows.reserve(result.site_ids.size());
  for (std::size_t i = 0; i < result.site_ids.size(); ++i) {
    rows.push_back({result.site_ids[i], i});
    auto it = result.aliases.find(result.site_ids[i]);
    if (it == result.aliases.end()) continue;
    for (const auto& alias : it->second) rows.push_back({alias, i});
  }
  return rows;
}

void write_rank_csv(std::ostream& out, const RankResult& result, const SiteTable* sites) {
  RequireComplete(result);
  const SiteLookup lookup(sites);
  std::vector<std::string> header = {"site_id", "site_type", "sr", "metric"};
  for (int j = 1; j <= result.m; ++j) header.push_back("sc_" + std::to_string(j));
  csv::WriteRow(out, header);
  const auto m = static_cast<std::size_t>(result.m);
  for (const auto& row : output_rows(result)) {
    const SiteRecord* rec = lookup.Find(row.site_id);
    std::vector<std::string> f = {row.site_id, rec ? ToString(rec->site_type) : "",
                                  FormatDouble(result.scores.sr[row.source]),
                                  FormatDouble(result.scores.metric[row.source])};
    for (std::size_t j = 0; j < m; ++j) {
      f.push_back(FormatDouble(result.contributions.sc_at(row.source, j)));
    }
    csv::WriteRow(out, f);
  }
}

void write_scores_csv(std::ostream& out, const RankResult& result, const SiteTable* sites) {
  RequireComplete(result);
  const SiteLookup lookup(sites);
  auto rows = output_rows(result);
  std::stable_sort(rows.begin(), rows.end(), [&](const OutputRow& a, const OutputRow& b) {
    return result.scores.metric[a.source] > result.scores.metric[b.source];
  });
  csv::WriteRow(out, {"site_id", "site_type", "state_fips", "county_fips", "longitude",
                      "latitude", "sr", "metric"});
  for (const auto& row : rows) {
    const SiteRecord* rec = lookup.Find(row.site_id);
    csv::WriteRow(out, {row.site_id, rec ? ToString(rec->site_type) : "",
                        rec ? std::to_string(rec->state_fips) : "",
                        rec ? std::to_string(rec->county_fips) : "",
                        rec ? FormatDouble(rec->longitude) : "",
                        rec ? FormatDouble(rec->latitude) : "",
                        FormatDouble(result.scores.sr[row.source]),
                        FormatDouble(result.scores.metric[row.source])});
  }
}

void write_contributions_csv(std::ostream& out, const RankResult& result) {
  RequireComplete(result);
  std::vector<std::string> header = {"site_id"};
  for (int j = 1; j <= result.m; ++j) header.push_back("sc_" + std::to_string(j));
  csv::WriteRow(out, header);
  const auto m = static_cast<std::size_t>(result.m);
  for (const auto& row : output_rows(result)) {
    std::vector<std::string> f = {row.site_id};
    for (std::size_t j = 0; j < m; ++j) {
      f.push_back(FormatDouble(result.contributions.sc_at(row.source, j)));
    }
    csv::WriteRow(out, f);
  }
}

void write_nr_series_csv(std::ostream& out, const RankResult& result) {
  csv::WriteRow(out, {"site_id", "s", "nr"});
  for (const auto& row : output_rows(result)) {
    for (const auto& l : result.lengths) {
      if (!l || !l->complete()) continue;
      csv::WriteRow(out, {row.site_id, std::to_string(l->s), FormatDouble(l->nr_row[row.source])});
    }
  }
}

void write_variance_csv(std::ostream& out, const RankResult& result) {
  RequireComplete(result);
  csv::WriteRow(out, {"s", "combinations", "variance"});
  for (int s = 1; s <= result.m; ++s) {
    csv::WriteRow(out, {std::to_string(s), std::to_string(binomial(result.m, s)),
                        FormatDouble(result.variance[static_cast<std::size_t>(s - 1)])});
  }
}

void write_rank_json(std::ostream& out, const RankResult& result, const SiteTable* sites) {
  RequireComplete(result);
  using nlohmann::json;
  const SiteLookup lookup(sites);
  const auto m = static_cast<std::size_t>(result.m);
  json doc;
  doc["num_objectives"] = result.m;
  doc["num_sites"] = result.site_ids.size();
  json combos = json::array();
  for (int s = 1; s <= result.m; ++s) combos.push_back(binomial(result.m, s));
  doc["combinations_per_length"] = combos;
  doc["variance_by_length"] = result.variance;
  json rows = json::array();
  for (const auto& row : output_rows(result)) {
    json r;
    r["site_id"] = row.site_id;
    if (const SiteRecord* rec = lookup.Find(row.site_id)) r["site_type"] = ToString(rec->site_type);
    if (row.site_id != result.site_ids[row.source]) {
      r["represented_by"] = result.site_ids[row.source];
    }
    r["sr"] = result.scores.sr[row.source];
    r["metric"] = result.scores.metric[row.source];
    std::vector<double> nr;
    for (const auto& l : result.lengths) nr.push_back(l->nr_row[row.source]);
    r["nr_by_length"] = nr;
    std::vector<double> sc(m);
    for (std::size_t j = 0; j < m; ++j) sc[j] = result.contributions.sc_at(row.source, j);
    r["sc"] = sc;
    rows.push_back(std::move(r));
  }
  doc["sites"] = std::move(rows);
  doc["warnings"] = result.warnings;
  out << doc.dump(1) << '\n';
}

}  // namespace siterank
