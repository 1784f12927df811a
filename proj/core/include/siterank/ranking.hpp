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
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "siterank/combinatorics.hpp"
#include "siterank/dataset.hpp"
#include "siterank/pareto.hpp"

namespace siterank {

// Combinations are processed in fixed blocks of this many ranks. Every block
// is summed into a zeroed partial and merged in ascending order, which pins
// the floating-point summation order regardless of worker count or where a
// run was interrupted.
inline constexpr std::uint64_t kBlockSize = 64;

// Running sums for one combination length s.
struct LengthAccumulator {
  int s = 0;
  int m = 0;
  std::size_t n = 0;
  std::vector<double> nr_row;  // n, running NR_{s,i}
  std::vector<double> oc;      // n x m row-major, running OC_{s,i,j}
  std::uint64_t combos_done = 0;
  double elapsed_seconds = 0.0;

  static LengthAccumulator Empty(std::size_t n, int m, int s);

  double oc_at(std::size_t i, std::size_t j) const {
    return oc[i * static_cast<std::size_t>(m) + j];
  }
  std::uint64_t total_combinations() const;
  bool complete() const { return combos_done == total_combinations(); }
};

struct AccumulateOptions {
  int workers = 1;
  // Rounded up to a multiple of kBlockSize.
  std::uint64_t checkpoint_stride = 100000;
  // Stop after at least this many new combinations (block granularity).
  // Leaves a resumable, incomplete accumulator.
  std::uint64_t max_combinations = std::numeric_limits<std::uint64_t>::max();
  // Called on the coordinator at every stride boundary and on completion.
  std::function<void(const LengthAccumulator&)> on_checkpoint;
};

// One index set on its own: the front mask and the n x m contribution, the
// outer product of the mask with the set's column indicator.
struct CombinationObservation {
  ParetoMask mask;
  std::vector<double> contribution;
};

CombinationObservation observe_combination(const ScaledMatrix& matrix, const Combination& columns);

// For every combination of length s in lexicographic order, finds the front,
// adds 1/|front| to each member's NR and 1 to each member's OC entries for the
// columns of the combination. Throws CheckpointError when `resume` does not
// fit this matrix and length or fails its mass checksum.
LengthAccumulator accumulate_length(const ScaledMatrix& matrix, int s,
                                    const std::optional<LengthAccumulator>& resume = std::nullopt,
                                    const AccumulateOptions& options = {});

struct SitingScores {
  std::vector<std::string> site_ids;
  std::vector<double> sr;      // summed NR over all lengths
  std::vector<double> metric;  // min-max scaled sr
  bool degenerate = false;     // sr constant, metric set to zeros
};

// Requires exactly one complete accumulator for every s in 1..m.
SitingScores siting_metric(std::span<const LengthAccumulator> accumulators,
                           std::vector<std::string> site_ids);

struct ContributionResult {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<std::vector<double>> nc_by_length;  // [s-1] -> n x m
  std::vector<double> s_matrix;                   // n x m
  std::vector<double> sc;                         // n x m

  double sc_at(std::size_t i, std::size_t j) const { return sc[i * m + j]; }
};

// Row-normalizes each OC_s (zero rows stay zero), sums over s, and
// row-normalizes the sum.
ContributionResult contributions(std::span<const LengthAccumulator> accumulators);

// Population variance of NR_s over sites, one entry per accumulator.
std::vector<double> variance_by_length(std::span<const LengthAccumulator> accumulators);

struct SweepOptions {
  int first_length = 1;
  int last_length = 0;  // 0 = m
  int workers = 1;
  std::optional<std::filesystem::path> checkpoint_dir;
  std::uint64_t checkpoint_stride = 100000;
  // Per-length interruption budget; see AccumulateOptions.
  std::uint64_t max_combinations_per_length = std::numeric_limits<std::uint64_t>::max();
  std::function<void(const std::string&)> log;
};

struct RankResult {
  std::vector<std::string> site_ids;
  int m = 0;
  // Index s - 1. Lengths outside the requested range come from completed
  // checkpoints when available.
  std::vector<std::optional<LengthAccumulator>> lengths;
  // True when every length 1..m is complete; the fields below are set only
  // then.
  bool complete = false;
  SitingScores scores;
  ContributionResult contributions;
  std::vector<double> variance;
  AliasMap aliases;
  std::vector<std::string> warnings;

  std::vector<int> missing_lengths() const;
};

// Runs accumulate_length over the requested lengths, resuming from and
// writing to checkpoint_dir when given, then derives scores, contributions
// and variance once all lengths are complete.
RankResult run_sweep(const ScaledMatrix& matrix, const SweepOptions& options,
                     const AliasMap& aliases = {});

// Rebuilds the derived fields of a result from its accumulators.
void finalize(RankResult& result);

}  // namespace siterank
