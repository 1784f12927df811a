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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "json.hpp"
#include "siterank/csv.hpp"
#include "support.hpp"

namespace siterank {
namespace {

std::vector<std::vector<std::string>> ReadAll(const std::string& text) {
  std::istringstream in(text);
  csv::Reader r(in);
  std::vector<std::vector<std::string>> rows;
  while (auto rec = r.Next()) rows.push_back(*rec);
  return rows;
}

RankResult Ranked(std::size_t n, std::size_t m, std::uint64_t seed, AliasMap aliases = {}) {
  std::mt19937_64 rng(seed);
  const auto x = testing::RandomMatrix(n, m, rng);
  return run_sweep(x, SweepOptions{}, aliases);
}

TEST(Export, AliasesFollowTheirKeptSite) {
  const auto r = Ranked(4, 3, 1, {{"s2", {"dupA", "dupB"}}});
  const auto rows = output_rows(r);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[1].site_id, "s2");
  EXPECT_EQ(rows[2].site_id, "dupA");
  EXPECT_EQ(rows[2].source, 1u);
  EXPECT_EQ(rows[3].site_id, "dupB");
  EXPECT_EQ(rows[4].site_id, "s3");
}

TEST(Export, RankCsvShapeAndExactValues) {
  const auto r = Ranked(6, 4, 2, {{"s1", {"twin"}}});
  std::ostringstream out;
  write_rank_csv(out, r);
  const auto rows = ReadAll(out.str());
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"site_id", "site_type", "sr", "metric", "sc_1",
                                               "sc_2", "sc_3", "sc_4"}));
  EXPECT_EQ(rows[2][0], "twin");
  EXPECT_EQ(rows[2][3], rows[1][3]);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& row = rows[i + 1 + (i > 0 ? 1 : 0)];
    EXPECT_EQ(std::stod(row[3]), r.scores.metric[i]);
  }
}

TEST(Export, ScoresSortedByMetric) {
  const auto r = Ranked(25, 5, 3);
  std::ostringstream out;
  write_scores_csv(out, r);
  const auto rows = ReadAll(out.str());
  ASSERT_EQ(rows.size(), 26u);
  for (std::size_t k = 2; k < rows.size(); ++k) {
    EXPECT_GE(std::stod(rows[k - 1][7]), std::stod(rows[k][7]));
  }
  EXPECT_EQ(rows[1][7], "1");
}

TEST(Export, NrSeriesAndVariance) {
  const auto r = Ranked(5, 3, 4);
  std::ostringstream nr, var;
  write_nr_series_csv(nr, r);
  write_variance_csv(var, r);
  EXPECT_EQ(ReadAll(nr.str()).size(), 1u + 5 * 3);
  const auto v = ReadAll(var.str());
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v[2], (std::vector<std::string>{"2", "3", csv::FormatDouble(r.variance[1])}));
}

TEST(Export, JsonDocument) {
  const auto r = Ranked(5, 3, 4, {{"s5", {"alias"}}});
  std::ostringstream out;
  write_rank_json(out, r);
  const auto doc = nlohmann::json::parse(out.str());
  EXPECT_EQ(doc["num_objectives"], 3);
  EXPECT_EQ(doc["sites"].size(), 6u);
  EXPECT_EQ(doc["sites"][5]["represented_by"], "s5");
  EXPECT_EQ(doc["combinations_per_length"], nlohmann::json({3, 3, 1}));
}

TEST(Export, IncompleteResultIsRejected) {
  std::mt19937_64 rng(1);
  const auto x = testing::RandomMatrix(5, 3, rng);
  SweepOptions o;
  o.last_length = 2;
  const auto r = run_sweep(x, o);
  std::ostringstream out;
  EXPECT_THROW(write_rank_csv(out, r), std::invalid_argument);
}

}  // namespace
}  // namespace siterank
