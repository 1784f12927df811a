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
#include <ostream>
#include <string>
#include <vector>

#include "siterank/dataset.hpp"
#include "siterank/ranking.hpp"

namespace siterank {

// One output row: a kept site, or a removed duplicate reporting the scores of
// the kept site (`source`) that represents it.
struct OutputRow {
  std::string site_id;
  std::size_t source = 0;
};

// Kept sites in matrix order, each followed by its aliases.
std::vector<OutputRow> output_rows(const RankResult& result);

// Writers below require a complete result. `sites`, when given, supplies
// site_type and location passthrough columns by registry id.

// site_id,site_type,sr,metric,sc_1..sc_m
void write_rank_csv(std::ostream& out, const RankResult& result, const SiteTable* sites = nullptr);

// site_id,site_type,state_fips,county_fips,longitude,latitude,sr,metric
// sorted by metric descending (ties keep output_rows order).
void write_scores_csv(std::ostream& out, const RankResult& result, const SiteTable* sites = nullptr);

// site_id,<objective names>: the SC matrix.
void write_contributions_csv(std::ostream& out, const RankResult& result);

// Long format site_id,s,nr for every completed length.
void write_nr_series_csv(std::ostream& out, const RankResult& result);

// s,combinations,variance
void write_variance_csv(std::ostream& out, const RankResult& result);

// Everything above in one document, including per-length NR series.
void write_rank_json(std::ostream& out, const RankResult& result, const SiteTable* sites = nullptr);

}  // namespace siterank
