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

#include "siterank/ranking.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "siterank/checkpoint.hpp"
#include "siterank/combinatorics.hpp"
#include "siterank/errors.hpp"
#include "siterank/pareto.hpp"

namespace siterank {

namespace {

struct Partial {
  std::vector<double> nr;
  std::vector<double> oc;
};

// Sums ranks [begin, end) (0-based, exclusive) into a zeroed partial.
void AccumulateBlock(FrontFinder& finder, int m, int s, std::uint64_t begin, std::uint64_t end,
                     Partial& out) {
  std::fill(out.nr.begin(), out.nr.end(), 0.0);
  std::fill(out.oc.begin(), out.oc.end(), 0.0);
  const auto width = static_cast<std::size_t>(m);
  for_each_combination(m, s, begin + 1, end, [&](const Combination& c) {
    const auto& front = finder.Front(c);
    const double share = 1.0 / static_cast<double>(front.size());
    for (std::size_t i : front) {
      out.nr[i] += share;
      double* row = out.oc.data() + i * width;
      for (int j : c.indices()) row[j - 1] += 1.0;
    }
  });
}

void Merge(LengthAccumulator& acc, const Partial& p) {
  for (std::size_t i = 0; i < acc.nr_row.size(); ++i) acc.nr_row[i] += p.nr[i];
  for (std::size_t i = 0; i < acc.oc.size(); ++i) acc.oc[i] += p.oc[i];
}

void ValidateResume(const LengthAccumulator& r, const ScaledMatrix& matrix, int s) {
  if (r.s != s) {
    throw CheckpointError("resume length mismatch: accumulator is for s = " +
                          std::to_string(r.s) + ", requested s = " + std::to_string(s));
  }
  if (r.m != static_cast<int>(matrix.cols) || r.n != matrix.rows ||
      r.nr_row.size() != matrix.rows || r.oc.size() != matrix.rows * matrix.cols) {
    throw CheckpointError("resume accumulator dimensions do not match the matrix");
  }
  if (r.combos_done > binomial(r.m, r.s)) {
    throw CheckpointError("resume accumulator is past the end of length " + std::to_string(s));
  }
  // Each combination hands out total NR mass exactly 1.
  double mass = 0.0;
  for (double v : r.nr_row) {
    if (!(v >= 0.0)) throw CheckpointError("resume checksum mismatch: negative NR entry");
    mass += v;
  }
  const auto done = static_cast<double>(r.combos_done);
  if (std::abs(mass - done) > 1e-9 * std::max(1.0, done)) {
    throw CheckpointError("resume checksum mismatch: NR mass " + std::to_string(mass) +
                          " != combinations done " + std::to_string(r.combos_done));
  }
}

void RequireComplete(std::span<const LengthAccumulator> accs) {
  if (accs.empty()) throw std::invalid_argument("no accumulators");
  const int m = accs.front().m;
  if (static_cast<int>(accs.size()) != m) {
    throw std::invalid_argument("expected one accumulator per length 1.." + std::to_string(m));
  }
  for (std::size_t k = 0; k < accs.size(); ++k) {
    const auto& a = accs[k];
    if (a.s != static_cast<int>(k) + 1 || a.m != m || a.n != accs.front().n) {
      throw std::invalid_argument("accumulators must be ordered by length and share a shape");
    }
    if (!a.complete()) {
      throw std::invalid_argument("accumulator for s = " + std::to_string(a.s) + " is incomplete");
    }
  }
}

// Divides each row by its sum; zero rows stay zero.
void RowNormalize(std::vector<double>& values, std::size_t n, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double* row = values.data() + i * m;
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) sum += row[j];
    if (sum == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) row[j] /= sum;
  }
}

}  // namespace

CombinationObservation observe_combination(const ScaledMatrix& matrix, const Combination& columns) {
  if (columns.m() != static_cast<int>(matrix.cols)) {
    throw std::invalid_argument("index set is for a different number of objectives");
  }
  CombinationObservation obs;
  obs.mask = non_dominated_mask(matrix, columns);
  obs.contribution.assign(matrix.rows * matrix.cols, 0.0);
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    if (!obs.mask[i]) continue;
    double* row = obs.contribution.data() + i * matrix.cols;
    for (int j : columns.indices()) row[j - 1] = 1.0;
  }
  return obs;
}

LengthAccumulator LengthAccumulator::Empty(std::size_t n, int m, int s) {
  LengthAccumulator a;
  a.s = s;
  a.m = m;
  a.n = n;
  a.nr_row.assign(n, 0.0);
  a.oc.assign(n * static_cast<std::size_t>(m), 0.0);
  return a;
}

std::uint64_t LengthAccumulator::total_combinations() const { return binomial(m, s); }

LengthAccumulator accumulate_length(const ScaledMatrix& matrix, int s,
                                    const std::optional<LengthAccumulator>& resume,
                                    const AccumulateOptions& options) {
  const int m = static_cast<int>(matrix.cols);
  if (matrix.rows == 0) throw std::invalid_argument("matrix has no rows");
  if (s < 1 || s > m) {
    throw std::out_of_range("combination length " + std::to_string(s) + " outside 1.." +
                            std::to_string(m));
  }
  LengthAccumulator acc;
  if (resume) {
    ValidateResume(*resume, matrix, s);
    acc = *resume;
  } else {
    acc = LengthAccumulator::Empty(matrix.rows, m, s);
  }
  const std::uint64_t total = binomial(m, s);
  if (acc.combos_done == total) return acc;

  const auto start = std::chrono::steady_clock::now();
  const double elapsed_before = acc.elapsed_seconds;
  auto stamp = [&] {
    const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
    acc.elapsed_seconds = elapsed_before + d.count();
  };

  const int workers = std::max(1, options.workers);
  const std::uint64_t stride =
      std::max<std::uint64_t>(1, (options.checkpoint_stride + kBlockSize - 1) / kBlockSize) *
      kBlockSize;
  const std::size_t wave_blocks = static_cast<std::size_t>(workers) * 2;

  std::vector<FrontFinder> finders;
  finders.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) finders.emplace_back(matrix);
  std::vector<Partial> partials(wave_blocks);
  for (auto& p : partials) {
    p.nr.resize(matrix.rows);
    p.oc.resize(matrix.rows * matrix.cols);
  }

  std::uint64_t processed = 0;
  while (acc.combos_done < total && processed < options.max_combinations) {
    // Block boundaries are absolute multiples of kBlockSize, so a resumed run
    // sees the same blocks as an uninterrupted one.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> blocks;
    std::uint64_t cursor = acc.combos_done;
    std::uint64_t budget = processed;
    while (blocks.size() < wave_blocks && cursor < total && budget < options.max_combinations) {
      const std::uint64_t end = std::min(total, (cursor / kBlockSize + 1) * kBlockSize);
      blocks.emplace_back(cursor, end);
      budget += end - cursor;
      cursor = end;
      if (cursor % stride == 0) break;
    }

    if (workers == 1 || blocks.size() == 1) {
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        AccumulateBlock(finders[0], m, s, blocks[b].first, blocks[b].second, partials[b]);
      }
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
      const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(workers), blocks.size());
      for (std::size_t w = 0; w < used; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t b = w; b < blocks.size(); b += used) {
              AccumulateBlock(finders[w], m, s, blocks[b].first, blocks[b].second, partials[b]);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (std::size_t w = 0; w < used; ++w) {
        if (!errors[w]) continue;
        std::string what = "unknown error";
        try {
          std::rethrow_exception(errors[w]);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        throw Error("worker failed on s = " + std::to_string(s) + ", k in [" +
                    std::to_string(blocks.front().first + 1) + ", " +
                    std::to_string(blocks.back().second) + "]: " + what);
      }
    }

    for (std::size_t b = 0; b < blocks.size(); ++b) {
      Merge(acc, partials[b]);
      acc.combos_done = blocks[b].second;
      processed += blocks[b].second - blocks[b].first;
    }
    if (options.on_checkpoint && acc.combos_done < total && acc.combos_done % stride == 0) {
      stamp();
      options.on_checkpoint(acc);
    }
  }
  stamp();
  if (options.on_checkpoint && acc.combos_done == total) options.on_checkpoint(acc);
  return acc;
}

SitingScores siting_metric(std::span<const LengthAccumulator> accumulators,
                           std::vector<std::string> site_ids) {
  RequireComplete(accumulators);
  const std::size_t n = accumulators.front().n;
  if (site_ids.size() != n) throw std::invalid_argument("site id count does not match");
  SitingScores out;
  out.site_ids = std::move(site_ids);
  out.sr.assign(n, 0.0);
  for (const auto& a : accumulators) {
    for (std::size_t i = 0; i < n; ++i) out.sr[i] += a.nr_row[i];
  }
  const auto [lo, hi] = std::minmax_element(out.sr.begin(), out.sr.end());
  out.metric.assign(n, 0.0);
  if (!(*hi > *lo)) {
    out.degenerate = true;
    return out;
  }
  const double min = *lo;
  const double range = *hi - *lo;
  for (std::size_t i = 0; i < n; ++i) out.metric[i] = (out.sr[i] - min) / range;
  return out;
}

ContributionResult contributions(std::span<const LengthAccumulator> accumulators) {
  RequireComplete(accumulators);
  ContributionResult out;
  out.n = accumulators.front().n;
  out.m = static_cast<std::size_t>(accumulators.front().m);
  out.s_matrix.assign(out.n * out.m, 0.0);
  for (const auto& a : accumulators) {
    std::vector<double> nc = a.oc;
    RowNormalize(nc, out.n, out.m);
    for (std::size_t k = 0; k < nc.size(); ++k) out.s_matrix[k] += nc[k];
    out.nc_by_length.push_back(std::move(nc));
  }
  out.sc = out.s_matrix;
  RowNormalize(out.sc, out.n, out.m);
  return out;
}

std::vector<double> variance_by_length(std::span<const LengthAccumulator> accumulators) {
  std::vector<double> out;
  out.reserve(accumulators.size());
  for (const auto& a : accumulators) {
    if (a.nr_row.empty()) {
      out.push_back(0.0);
      continue;
    }
    const auto n = static_cast<double>(a.nr_row.size());
    double mean = 0.0;
    for (double v : a.nr_row) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : a.nr_row) ss += (v - mean) * (v - mean);
    out.push_back(ss / n);
  }
  return out;
}

std::vector<int> RankResult::missing_lengths() const {
  std::vector<int> missing;
  for (int s = 1; s <= m; ++s) {
    const auto& l = lengths[static_cast<std::size_t>(s - 1)];
    if (!l || !l->complete()) missing.push_back(s);
  }
  return missing;
}

void finalize(RankResult& result) {
  result.complete = result.m > 0 && result.missing_lengths().empty();
  if (!result.complete) return;
  std::vector<LengthAccumulator> accs;
  accs.reserve(static_cast<std::size_t>(result.m));
  for (const auto& l : result.lengths) accs.push_back(*l);
  result.scores = siting_metric(accs, result.site_ids);
  if (result.scores.degenerate) {
    result.warnings.push_back("summed observation ratio is constant; siting metric set to 0");
  }
  result.contributions = contributions(accs);
  result.variance = variance_by_length(accs);
}

RankResult run_sweep(const ScaledMatrix& matrix, const SweepOptions& options,
                     const AliasMap& aliases) {
  const int m = static_cast<int>(matrix.cols);
  const int first = options.first_length;
  const int last = options.last_length == 0 ? m : options.last_length;
  if (first < 1 || last > m || first > last) {
    throw std::out_of_range("length range " + std::to_string(first) + "-" + std::to_string(last) +
                            " outside 1.." + std::to_string(m));
  }
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };

  RankResult result;
  result.site_ids = matrix.site_ids;
  result.m = m;
  result.aliases = aliases;
  result.lengths.resize(static_cast<std::size_t>(m));
  for (auto col : matrix.constant_columns) {
    result.warnings.push_back("objective '" + matrix.spec[col].name +
                              "' is constant; scaled to 0.5");
  }

  const std::uint64_t fp = fingerprint(matrix);
  const auto& dir = options.checkpoint_dir;

  for (int s = 1; s <= m; ++s) {
    std::optional<LengthAccumulator> prior;
    if (dir) prior = load_checkpoint(*dir, s, fp);
    const bool requested = s >= first && s <= last;
    if (!requested) {
      if (prior && prior->complete()) result.lengths[static_cast<std::size_t>(s - 1)] = std::move(prior);
      continue;
    }
    if (prior && prior->complete()) {
      log("s = " + std::to_string(s) + ": complete in checkpoint, skipped");
      result.lengths[static_cast<std::size_t>(s - 1)] = std::move(prior);
      continue;
    }
    if (prior) {
      log("s = " + std::to_string(s) + ": resuming at k = " + std::to_string(prior->combos_done + 1));
    }
    AccumulateOptions acc_opts;
    acc_opts.workers = options.workers;
    acc_opts.checkpoint_stride = options.checkpoint_stride;
    acc_opts.max_combinations = options.max_combinations_per_length;
    if (dir) {
      acc_opts.on_checkpoint = [&](const LengthAccumulator& a) { save_checkpoint(a, fp, *dir); };
    }
    LengthAccumulator acc = accumulate_length(matrix, s, prior, acc_opts);
    if (acc.complete()) {
      if (dir) record_timing(*dir, {s, acc.combos_done, acc.elapsed_seconds});
      log("s = " + std::to_string(s) + ": " + std::to_string(acc.combos_done) +
          " combinations in " + std::to_string(acc.elapsed_seconds) + " s");
    } else {
      log("s = " + std::to_string(s) + ": stopped at k = " + std::to_string(acc.combos_done));
    }
    result.lengths[static_cast<std::size_t>(s - 1)] = std::move(acc);
  }
  finalize(result);
  return result;
}

}  // namespace siterank
