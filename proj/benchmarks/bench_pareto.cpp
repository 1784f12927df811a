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

#include <benchmark/benchmark.h>

#include <random>

#include "siterank/pareto.hpp"

namespace {

using siterank::Combination;
using siterank::ScaledMatrix;

ScaledMatrix Uniform(std::size_t n, std::size_t m) {
  std::mt19937_64 rng(n * 131 + m);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScaledMatrix x;
  x.rows = n;
  x.cols = m;
  x.values.resize(n * m);
  for (double& v : x.values) v = u(rng);
  for (std::size_t i = 0; i < n; ++i) x.site_ids.push_back(std::to_string(i));
  return x;
}

Combination FirstColumns(int m, int s) { return Combination::First(m, s); }

void BM_FrontSortBased(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int s = static_cast<int>(state.range(1));
  const auto x = Uniform(n, 12);
  siterank::FrontFinder finder(x);
  const auto cols = FirstColumns(12, s);
  for (auto _ : state) benchmark::DoNotOptimize(finder.Front(cols).size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_FrontSortBased)->ArgsProduct({{500, 2000, 8000}, {2, 6, 12}});

void BM_FrontAllPairs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int s = static_cast<int>(state.range(1));
  const auto x = Uniform(n, 12);
  const auto cols = FirstColumns(12, s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(siterank::non_dominated_mask_reference(x, cols).count());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_FrontAllPairs)->ArgsProduct({{500, 2000}, {2, 6, 12}});

}  // namespace

BENCHMARK_MAIN();
