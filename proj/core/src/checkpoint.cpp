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

#include "siterank/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "siterank/combinatorics.hpp"
#include "siterank/csv.hpp"
#include "siterank/errors.hpp"
#include "binary_io.hpp"

namespace siterank {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'R', 'C', 'K'};
using binary::Fnv1a;
using binary::HashBytes;
using binary::Reader;
using binary::Writer;

// Temp file + rename. Throws CheckpointError with `what` on any failure.
void AtomicWrite(const fs::path& target, const std::string& bytes, std::ios::openmode mode) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, mode | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw CheckpointError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw CheckpointError("cannot replace " + target.string() + ": " + ec.message());
  }
}

}  // namespace

std::uint64_t fingerprint(const ScaledMatrix& matrix) {
  Fnv1a h;
  h.U64(matrix.rows);
  h.U64(matrix.cols);
  for (const auto& o : matrix.spec.objectives()) h.String(o.name);
  for (const auto& id : matrix.site_ids) h.String(id);
  for (double v : matrix.values) h.U64(std::bit_cast<std::uint64_t>(v));
  return h.value();
}

fs::path checkpoint_path(const fs::path& dir, int s) {
  return dir / ("len_" + std::to_string(s) + ".ckpt");
}

fs::path save_checkpoint(const LengthAccumulator& acc, std::uint64_t fp, const fs::path& dir) {
  if (acc.nr_row.size() != acc.n || acc.oc.size() != acc.n * static_cast<std::size_t>(acc.m)) {
    throw CheckpointError("accumulator dimensions are inconsistent");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CheckpointError("cannot create " + dir.string() + ": " + ec.message());

  Writer w;
  w.Raw(std::string_view(kMagic.data(), kMagic.size()));
  w.U8(kCheckpointVersion);
  w.U8(0);
  w.U8(0);
  w.U8(0);
  w.U64(fp);
  w.U32(static_cast<std::uint32_t>(acc.m));
  w.U32(static_cast<std::uint32_t>(acc.s));
  w.U64(acc.n);
  w.U64(acc.combos_done);
  w.F64(acc.elapsed_seconds);
  for (double v : acc.nr_row) w.F64(v);
  for (double v : acc.oc) w.F64(v);
  w.U64(HashBytes(w.bytes()));

  const fs::path target = checkpoint_path(dir, acc.s);
  AtomicWrite(target, w.bytes(), std::ios::binary);
  return target;
}

namespace {

LengthAccumulator ParseCheckpoint(const fs::path& path, std::string_view body, int s,
                                  std::uint64_t fp) {
  Reader r(body);
  if (r.Take(4) != std::string_view(kMagic.data(), kMagic.size())) {
    throw CheckpointError(path.string() + ": not a checkpoint file");
  }
  const std::uint8_t version = r.U8();
  if (version != kCheckpointVersion) {
    throw CheckpointError(path.string() + ": unsupported version " + std::to_string(version));
  }
  r.Take(3);
  if (r.U64() != fp) {
    throw CheckpointError(path.string() +
                          ": dataset fingerprint mismatch (the dataset changed since this "
                          "checkpoint was written)");
  }
  LengthAccumulator acc;
  acc.m = static_cast<int>(r.U32());
  acc.s = static_cast<int>(r.U32());
  acc.n = r.U64();
  acc.combos_done = r.U64();
  acc.elapsed_seconds = r.F64();
  if (acc.s != s || acc.m < 1 || acc.m > kMaxObjectives || acc.s > acc.m) {
    throw CheckpointError(path.string() + ": header does not describe length " + std::to_string(s));
  }
  if (acc.combos_done > binomial(acc.m, acc.s)) {
    throw CheckpointError(path.string() + ": combination count out of range");
  }
  const std::size_t expected = 8 * (acc.n + acc.n * static_cast<std::size_t>(acc.m));
  if (r.remaining() != expected) throw CheckpointError(path.string() + ": payload size mismatch");
  acc.nr_row.resize(acc.n);
  for (double& v : acc.nr_row) v = r.F64();
  acc.oc.resize(acc.n * static_cast<std::size_t>(acc.m));
  for (double& v : acc.oc) v = r.F64();
  return acc;
}

}  // namespace

std::optional<LengthAccumulator> load_checkpoint(const fs::path& dir, int s, std::uint64_t fp) {
  const fs::path path = checkpoint_path(dir, s);
  if (!fs::exists(path)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8) throw CheckpointError(path.string() + ": checkpoint truncated");

  const std::string_view body(bytes.data(), bytes.size() - 8);
  Reader tail(std::string_view(bytes).substr(bytes.size() - 8));
  if (tail.U64() != HashBytes(body)) {
    throw CheckpointError(path.string() + ": checksum mismatch (corrupt checkpoint)");
  }
  try {
    return ParseCheckpoint(path, body, s, fp);
  } catch (const std::out_of_range&) {
    throw CheckpointError(path.string() + ": checkpoint truncated");
  }
}

std::vector<TimingRow> timing_report(const fs::path& dir) {
  std::vector<TimingRow> rows;
  std::ifstream in(dir / "timings.csv");
  if (!in) return rows;
  csv::Reader reader(in);
  auto header = reader.Next();
  while (auto f = reader.Next()) {
    if (f->size() != 3) throw CheckpointError("timings.csv: malformed row");
    try {
      rows.push_back({std::stoi((*f)[0]), std::stoull((*f)[1]), std::stod((*f)[2])});
    } catch (const std::exception&) {
      throw CheckpointError("timings.csv: malformed row");
    }
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.s < b.s; });
  return rows;
}

void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows) {
  csv::WriteRow(out, {"s", "combinations", "elapsed_seconds"});
  for (const auto& r : rows) {
    csv::WriteRow(out, {std::to_string(r.s), std::to_string(r.combinations),
                        csv::FormatDouble(r.elapsed_seconds)});
  }
}

void record_timing(const fs::path& dir, const TimingRow& row) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto rows = timing_report(dir);
  std::erase_if(rows, [&](const TimingRow& r) { return r.s == row.s; });
  rows.push_back(row);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.s < b.s; });
  std::ostringstream ss;
  write_timing_csv(ss, rows);
  AtomicWrite(dir / "timings.csv", ss.str(), std::ios::out);
}

}  // namespace siterank
