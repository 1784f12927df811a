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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "siterank/dataset.hpp"
#include "siterank/ranking.hpp"

namespace siterank {

inline constexpr std::uint8_t kCheckpointVersion = 1;

// 64-bit FNV-1a over the matrix shape, objective names, site ids and the
// exact bit patterns of every value.
std::uint64_t fingerprint(const ScaledMatrix& matrix);

// <dir>/len_<s>.ckpt
std::filesystem::path checkpoint_path(const std::filesystem::path& dir, int s);

// Writes a temporary file and renames it over the previous checkpoint for the
// same length. On failure throws CheckpointError and leaves any prior
// checkpoint untouched. Creates `dir` if needed.
std::filesystem::path save_checkpoint(const LengthAccumulator& acc, std::uint64_t fingerprint,
                                      const std::filesystem::path& dir);

// nullopt when no checkpoint exists for s. Throws CheckpointError when the
// file is corrupt or was written for a different dataset.
std::optional<LengthAccumulator> load_checkpoint(const std::filesystem::path& dir, int s,
                                                 std::uint64_t fingerprint);

struct TimingRow {
  int s = 0;
  std::uint64_t combinations = 0;
  double elapsed_seconds = 0.0;

  friend bool operator==(const TimingRow&, const TimingRow&) = default;
};

// Upserts the row for `row.s` in <dir>/timings.csv.
void record_timing(const std::filesystem::path& dir, const TimingRow& row);

// Rows of <dir>/timings.csv sorted by s; empty when absent.
std::vector<TimingRow> timing_report(const std::filesystem::path& dir);

void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows);

}  // namespace siterank
