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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include "commands.hpp"
#include "siterank/checkpoint.hpp"
#include "siterank/combinatorics.hpp"
#include "siterank/csv.hpp"
#include "siterank/lookup.hpp"
#include "siterank/metrics.hpp"
#include "siterank/pareto.hpp"
#include "siterank/predictor.hpp"
#include "siterank/ranking.hpp"
#include "support.hpp"

namespace siterank {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void Check(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail = what;
    pass = false;
  }
};

// ---- 1: per-length combination counts ---------------------------------------

Outcome CombinationCounts() {
  Outcome o;
  const auto start = Clock::now();
  // Per-length counts for 22 objectives as printed in the publication.
  const std::uint64_t published[] = {22,     231,    1540,   7315,   26334,  74613,
                                     170544, 319770, 497420, 646646, 705905, 646646,
                                     497420, 319770, 170544, 74613,  26334,  7315,
                                     1540,   231,    22,     1};
  std::uint64_t total = 0;
  std::vector<std::string> mismatches;
  for (int s = 1; s <= 22; ++s) {
    const auto c = binomial(22, s);
    total += c;
    if (c != published[s - 1]) {
      mismatches.push_back("s=" + std::to_string(s) + " computed " + std::to_string(c) +
                           " published " + std::to_string(published[s - 1]));
    }
  }
  for (const auto& m : mismatches) o.Check(false, m);
  o.Check(total == 4194303u, "total " + std::to_string(total) + " != 4194303");
  const double t = Seconds(start);
  o.Check(t < 1.0, "took " + std::to_string(t) + " s");
  std::ostringstream d;
  d << "total " << total << ", " << mismatches.size() << " of 22 lengths differ from the printed list";
  if (!mismatches.empty()) d << " (" << mismatches.front() << ")";
  o.detail = d.str();
  return o;
}

// ---- 2: worked example ------------------------------------------------------

Outcome WorkedExample() {
  Outcome o;
  // The published 4 x 3 slice placed at columns 2, 3 and 5 of a five-column
  // matrix; columns 1 and 4 are filler the index set never reads.
  const double slice[4][3] = {{0.2023, 0.6605, 0.6158},
                              {0.0729, 0.2907, 0.5883},
                              {0.3935, 0.5107, 0.9067},
                              {0.4777, 0.7118, 0.6409}};
  ScaledMatrix x;
  x.rows = 4;
  x.cols = 5;
  x.spec = testing::SyntheticSpec(std::vector<bool>(5, false));
  for (int i = 0; i < 4; ++i) {
    x.site_ids.push_back("r" + std::to_string(i + 1));
    x.values.insert(x.values.end(), {0.5, slice[i][0], slice[i][1], 0.5, slice[i][2]});
  }
  const Combination cols({2, 3, 5}, 5);
  const auto obs = observe_combination(x, cols);
  o.Check(obs.mask == ParetoMask(std::vector<std::uint8_t>{0, 0, 1, 1}), "mask is not [0,0,1,1]");
  o.Check(non_dominated_mask_reference(x, cols) == obs.mask, "reference front disagrees");
  const std::vector<double> expected{0, 0, 0, 0, 0,  //
                                     0, 0, 0, 0, 0,  //
                                     0, 1, 1, 0, 1,  //
                                     0, 1, 1, 0, 1};
  o.Check(obs.contribution == expected, "contribution ones are not at columns 2,3,5 of rows 3,4");
  if (o.pass) o.detail = "mask [0,0,1,1]; ones at (3,{2,3,5}) and (4,{2,3,5})";
  return o;
}

// ---- 3: dense oracle --------------------------------------------------------

Outcome OracleEquivalence() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(20260301);
  double worst = 0.0;
  int mixed = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng() % 12;
    const std::size_t m = 1 + rng() % 6;
    const auto x = testing::RandomMatrix(n, m, rng, 0.4, static_cast<int>(rng() % 4));
    bool has_binary = false, has_continuous = false;
    for (std::size_t j = 0; j < m; ++j) {
      (x.spec[j].kind == ObjectiveKind::kBinary ? has_binary : has_continuous) = true;
    }
    mixed += has_binary && has_continuous;
    SweepOptions opts;
    opts.workers = 1 + static_cast<int>(t % 3);
    const auto r = run_sweep(x, opts);
    const double d = testing::OracleDeviation(r, testing::DenseOracle(x));
    worst = std::max(worst, d);
    o.Check(d <= 1e-12, "instance " + std::to_string(t) + " deviates by " + std::to_string(d));
  }
  const double secs = Seconds(start);
  o.Check(secs < 120.0, "took " + std::to_string(secs) + " s");
  if (o.pass) {
    std::ostringstream d;
    d << "500 instances (" << mixed << " mixed), max deviation " << worst << ", " << secs << " s";
    o.detail = d.str();
  }
  return o;
}

// ---- 4: normalization invariants --------------------------------------------

Outcome NormalizationInvariants() {
  Outcome o;
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng() % 40;
    const int m = 1 + static_cast<int>(rng() % 7);
    const auto x = testing::RandomMatrix(n, static_cast<std::size_t>(m), rng, 0.3,
                                         static_cast<int>(rng() % 5));
    const auto r = run_sweep(x, SweepOptions{});
    const std::string tag = "instance " + std::to_string(t) + ": ";
    for (int s = 1; s <= m; ++s) {
      const auto& nr = r.lengths[static_cast<std::size_t>(s - 1)]->nr_row;
      const double mass = std::accumulate(nr.begin(), nr.end(), 0.0);
      o.Check(std::abs(mass - static_cast<double>(binomial(m, s))) <= 1e-9,
              tag + "NR mass off at s=" + std::to_string(s));
    }
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j) row += r.contributions.sc_at(i, j);
      o.Check(row == 0.0 || std::abs(row - 1.0) <= 1e-12, tag + "SC row sum " + std::to_string(row));
    }
    std::vector<int> all(static_cast<std::size_t>(m));
    std::iota(all.begin(), all.end(), 1);
    const auto front = non_dominated_mask(x, Combination(all, m));
    const auto& last = r.lengths.back()->nr_row;
    for (std::size_t i = 0; i < n; ++i) {
      const double want = front[i] ? 1.0 / static_cast<double>(front.count()) : 0.0;
      o.Check(last[i] == want, tag + "NR at s=m is not 1/|front|");
    }
  }
  if (o.pass) o.detail = "100 instances";
  return o;
}

// ---- 5: determinism and resume ----------------------------------------------

Outcome DeterminismAndResume() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(55);
  const auto x = testing::RandomMatrix(150, 12, rng, 0.3, 0);
  constexpr std::uint64_t kStride = 64;

  SweepOptions base;
  base.checkpoint_stride = kStride;
  base.workers = 1;
  const auto reference = run_sweep(x, base);
  for (int w : {2, 8}) {
    auto opts = base;
    opts.workers = w;
    o.Check(testing::BitwiseEqual(reference, run_sweep(x, opts)),
            std::to_string(w) + " workers differ from 1 worker");
  }

  // Stop after every stride boundary of the longest length, then resume from
  // the files on disk with a different worker count.
  int resumes = 0;
  for (std::uint64_t budget = kStride; budget < binomial(12, 6); budget += kStride) {
    testing::TempDir dir;
    auto opts = base;
    opts.checkpoint_dir = dir.path();
    opts.workers = 2;
    opts.max_combinations_per_length = budget;
    const auto cut = run_sweep(x, opts);
    o.Check(!cut.complete, "budget " + std::to_string(budget) + " did not interrupt");
    opts.workers = 8;
    opts.max_combinations_per_length = std::numeric_limits<std::uint64_t>::max();
    o.Check(testing::BitwiseEqual(reference, run_sweep(x, opts)),
            "resume after " + std::to_string(budget) + " combinations differs");
    ++resumes;
  }

  // Every block boundary of every length, through a checkpoint file.
  const auto fp = fingerprint(x);
  for (int s = 1; s <= 12; ++s) {
    const auto& full = *reference.lengths[static_cast<std::size_t>(s - 1)];
    for (std::uint64_t stop = kStride; stop < binomial(12, s); stop += kStride) {
      testing::TempDir dir;
      AccumulateOptions first;
      first.max_combinations = stop;
      first.workers = 8;
      save_checkpoint(accumulate_length(x, s, std::nullopt, first), fp, dir.path());
      AccumulateOptions rest;
      rest.workers = 2;
      const auto resumed = accumulate_length(x, s, load_checkpoint(dir.path(), s, fp), rest);
      o.Check(testing::BitwiseEqual(resumed.nr_row, full.nr_row) &&
                  testing::BitwiseEqual(resumed.oc, full.oc),
              "s=" + std::to_string(s) + " resumed at " + std::to_string(stop) + " differs");
      ++resumes;
    }
  }
  const double secs = Seconds(start);
  o.Check(secs < 60.0, "took " + std::to_string(secs) + " s");
  if (o.pass) {
    std::ostringstream d;
    d << "workers {1,2,8} identical, " << resumes << " interrupted runs identical, " << secs << " s";
    o.detail = d.str();
  }
  return o;
}

// ---- 6: desk-scale performance ----------------------------------------------

double Pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Outcome DeskPerformance() {
  Outcome o;
  std::mt19937_64 rng(2000);
  const auto x = testing::RandomMatrix(2000, 12, rng, 0.3, 0);
  SweepOptions opts;
  opts.workers = 8;
  const auto start = Clock::now();
  const auto r = run_sweep(x, opts);
  const double secs = Seconds(start);
  o.Check(r.complete, "sweep incomplete");
  o.Check(secs < 600.0, "took " + std::to_string(secs) + " s");

  std::vector<double> elapsed, counts;
  for (const auto& l : r.lengths) {
    elapsed.push_back(l->elapsed_seconds);
    counts.push_back(static_cast<double>(l->total_combinations()));
  }
  // Counts rise strictly over s = 1..m/2; time must follow. Past the middle
  // the count falls while fronts keep growing, so only the rising half is
  // gated. The correlation over all lengths is reported, not asserted.
  for (int s = 2; s <= 6; ++s) {
    o.Check(elapsed[static_cast<std::size_t>(s - 1)] > elapsed[static_cast<std::size_t>(s - 2)],
            "time did not grow from s=" + std::to_string(s - 1) + " to s=" + std::to_string(s));
  }
  const double corr = Pearson(elapsed, counts);
  std::ostringstream d;
  d << "n=2000 m=12 in " << secs << " s on 8 workers (" << std::thread::hardware_concurrency()
    << " cpus); s=1..6 times";
  for (int s = 1; s <= 6; ++s) d << ' ' << elapsed[static_cast<std::size_t>(s - 1)];
  d << "; r(time, count) over all s = " << corr;
  if (o.pass) o.detail = d.str();
  return o;
}

// ---- 7: lookup exactness ----------------------------------------------------

Outcome LookupExactness() {
  Outcome o;
  std::mt19937_64 rng(7);
  const auto table = testing::SyntheticSites(800, 12, rng);
  const auto lut = LookupTable::Build(table);
  std::vector<double> truth, pred;
  bool identical = true;
  for (const auto& s : table.sites) {
    const std::vector<double> x{s.longitude, s.latitude, static_cast<double>(s.county_fips),
                                static_cast<double>(s.state_fips)};
    const auto y = lut.Predict(x);
    identical = identical && y == s.raw_objectives;
    truth.insert(truth.end(), s.raw_objectives.begin(), s.raw_objectives.end());
    pred.insert(pred.end(), y.begin(), y.end());
  }
  const auto m = evaluate(truth, pred);
  o.Check(identical, "a stored row was not returned unchanged");
  o.Check(m.mse == 0.0 && m.rmse == 0.0 && m.mae == 0.0, "nonzero error");
  o.Check(m.r2 == 1.0, "R2 " + std::to_string(m.r2));
  if (o.pass) o.detail = "800 sites x 22 objectives: MSE 0, RMSE 0, MAE 0, R2 1";
  return o;
}

// ---- 8: gradients -----------------------------------------------------------

class ScaledGradient : public Trainable {
 public:
  explicit ScaledGradient(SingleStageModel inner) : inner_(std::move(inner)) {}
  std::size_t parameter_count() const override { return inner_.parameter_count(); }
  std::vector<double> Parameters() const override { return inner_.Parameters(); }
  void SetParameters(std::span<const double> p) override { inner_.SetParameters(p); }
  std::size_t part_count() const override { return inner_.part_count(); }
  double Loss(const TrainingExample& ex, std::span<double> grad,
              std::span<double> parts) const override {
    std::vector<double> g(grad.size(), 0.0);
    const double loss = inner_.Loss(ex, g, parts);
    // Broken backward pass: every other parameter's gradient is doubled.
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += (k % 2 == 0 ? 2.0 : 1.0) * g[k];
    return loss;
  }

 private:
  SingleStageModel inner_;
};

Head MixedHead() {
  Head h;
  h.units = {OutputUnit::kLinear, OutputUnit::kSigmoid, OutputUnit::kSoftmax, OutputUnit::kSoftmax,
             OutputUnit::kSoftmax};
  h.weights = {1.0, 0.5, 0.25, 0.25, 0.25};
  h.groups = {0, 1, 2, 2, 2};
  return h;
}

Outcome Gradients() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  auto example = [&] {
    TrainingExample ex;
    for (int i = 0; i < 4; ++i) ex.x.push_back(g(rng));
    ex.target = {g(rng), 1.0, 0.2, 0.5, 0.3};
    return ex;
  };
  double worst = 0.0;
  for (std::size_t layers = 1; layers <= 5; ++layers) {
    for (auto act : {Activation::kLinear, Activation::kRelu, Activation::kLeakyRelu,
                     Activation::kTanh, Activation::kSigmoid}) {
      std::vector<std::size_t> dims{4};
      for (std::size_t l = 1; l < layers; ++l) dims.push_back(8);
      dims.push_back(5);
      SingleStageModel model(Network(dims, act, Activation::kLinear, rng()), MixedHead());
      for (int t = 0; t < 3; ++t) {
        const double e = gradient_check(model, example()).max_relative_error;
        worst = std::max(worst, e);
        o.Check(e < 1e-4, std::to_string(layers) + " layers " + ToString(act) + ": " +
                              std::to_string(e));
      }
    }
  }
  ScaledGradient broken(SingleStageModel(Network({4, 8, 8, 5}, Activation::kTanh,
                                                 Activation::kLinear, 1),
                                         MixedHead()));
  const double control = gradient_check(broken, example()).max_relative_error;
  o.Check(control > 1e-2, "corrupted gradient passed with error " + std::to_string(control));
  const double secs = Seconds(start);
  o.Check(secs < 30.0, "took " + std::to_string(secs) + " s");
  if (o.pass) {
    std::ostringstream d;
    d << "worst relative error " << worst << " over 1..5 layers x 5 activations; control "
      << control;
    o.detail = d.str();
  }
  return o;
}

// ---- 9: metrics arithmetic --------------------------------------------------

Outcome MetricsArithmetic() {
  Outcome o;
  const std::vector<double> y{0, 1}, p{1, 0};
  const auto m = evaluate(y, p);
  o.Check(m.r2 == -3.0, "R2 " + std::to_string(m.r2));
  o.Check(m.mse == 1.0 && m.rmse == 1.0 && m.mae == 1.0, "MSE/RMSE/MAE are not 1");
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 10.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(2 + rng() % 50), b(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      a[k] = g(rng);
      b[k] = g(rng);
    }
    const auto e = evaluate(a, b);
    const double rel = std::abs(e.rmse * e.rmse - e.mse) / e.mse;
    worst = std::max(worst, rel);
  }
  // A correctly rounded sqrt squared is within two ulps of its argument.
  o.Check(worst <= 4 * std::numeric_limits<double>::epsilon(),
          "RMSE^2 vs MSE relative gap " + std::to_string(worst));
  if (o.pass) {
    std::ostringstream d;
    d << "R2 = -3 for y=[0,1], yhat=[1,0]; max |RMSE^2 - MSE| / MSE = " << worst;
    o.detail = d.str();
  }
  return o;
}

// ---- 10: top-site replay ----------------------------------------------------

Outcome TopSiteReplay() {
  Outcome o;
  std::ostringstream out, err;
  const int code = cli::run_cli({"siterank", "report", "top", "--n", "6", "--scores",
                                 testing::DataPath("published_top_sites.csv"), "--format", "csv"},
                                out, err);
  o.Check(code == 0, "report top exited " + std::to_string(code) + ": " + err.str());
  std::istringstream in(out.str());
  csv::Reader reader(in);
  const auto header = reader.Next();
  std::vector<std::pair<std::string, std::string>> got;
  while (auto row = reader.Next()) got.emplace_back((*row)[1], row->back());
  // Published ordering and scores of the six best sites.
  const std::vector<std::pair<std::string, std::string>> want{
      {"C2914", "1.0000"},        {"C2712", "0.7991"},        {"C2367", "0.7025"},
      {"C8042", "0.6650"},        {"110038759572", "0.6169"}, {"110015334440", "0.6018"}};
  o.Check(header && header->front() == "rank" && header->back() == "metric", "unexpected header");
  o.Check(got == want, "ordering or metric values differ");
  if (o.pass) o.detail = "C2914 1.0000, C2712 0.7991, ... , 110015334440 0.6018";
  return o;
}

}  // namespace
}  // namespace siterank

int main() {
  using namespace siterank;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"combination counts", CombinationCounts},
      {"worked example", WorkedExample},
      {"oracle equivalence", OracleEquivalence},
      {"normalization invariants", NormalizationInvariants},
      {"determinism and resume", DeterminismAndResume},
      {"desk-scale performance", DeskPerformance},
      {"lookup exactness", LookupExactness},
      {"gradient correctness", Gradients},
      {"metrics arithmetic", MetricsArithmetic},
      {"top-site replay", TopSiteReplay},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome outcome;
    try {
      outcome = criteria[k].run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    failed += !outcome.pass;
    std::printf("%s %2zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", k + 1, criteria[k].name,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
              criteria.size());
  return failed == 0 ? 0 : 1;
}
