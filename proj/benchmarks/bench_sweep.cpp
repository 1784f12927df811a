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

#include "siterank/combinatorics.hpp"
#include "siterank/ranking.hpp"

namespace {

siterank::ScaledMatrix Sites(std::size_t n, std::size_t m) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  siterank::ScaledMatrix x;
  x.rows = n;
  x.cols = m;
  x.values.resize(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    x.site_ids.push_back(std::to_string(i));
    for (std::size_t j = 0; j < m; ++j) {
      const double v = u(rng);
      // Every third column is binary.
      x.values[i * m + j] = j % 3 == 2 ? (v < 0.5 ? 0.0 : 1.0) : v;
    }
  }
  return x;
}

// One length of the sweep; args are s and the worker count.
void BM_AccumulateLength(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  const auto x = Sites(1000, 12);
  siterank::AccumulateOptions opts;
  opts.workers = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(siterank::accumulate_length(x, s, std::nullopt, opts).combos_done);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(siterank::binomial(12, s)));
}
BENCHMARK(BM_AccumulateLength)
    ->ArgsProduct({{1, 3, 6, 9, 12}, {1, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_Unrank(benchmark::State& state) {
  std::uint64_t k = 1;
  const std::uint64_t total = siterank::binomial(22, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(siterank::unrank(22, 11, k).bitmask());
    k = (k - 1 + 7919) % total + 1;
  }
}
BENCHMARK(BM_Unrank);

}  // namespace

BENCHMARK_MAIN();
