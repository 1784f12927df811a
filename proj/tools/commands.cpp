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

#include "commands.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <json.hpp>

#include "siterank/checkpoint.hpp"
#include "siterank/csv.hpp"
#include "siterank/dataset.hpp"
#include "siterank/errors.hpp"
#include "siterank/export.hpp"
#include "siterank/predictor.hpp"
#include "siterank/ranking.hpp"

namespace siterank::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string Timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string Hex(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::uint64_t HashFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Records what a command produced. Written last, so its presence means the
// command finished.
struct Manifest {
  Manifest(std::string cmd, std::string cfg) : command(std::move(cmd)), config(std::move(cfg)) {}

  std::string command;
  std::string config;
  std::string fingerprint;
  std::uint64_t seed = 0;
  std::string started_at = Timestamp();
  std::vector<std::string> outputs;

  void Write(const fs::path& dir) const {
    json j = {{"command", command},     {"config", config},
              {"fingerprint", fingerprint}, {"seed", seed},
              {"started_at", started_at}, {"finished_at", Timestamp()},
              {"outputs", outputs}};
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  }
};

void WriteFile(const fs::path& path, const std::function<void(std::ostream&)>& body,
               Manifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
  manifest.outputs.push_back(path.filename().string());
}

std::ifstream OpenInput(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  return in;
}

// Rows of a CSV file keyed by header name.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::ptrdiff_t Column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  }
  std::size_t Require(const std::string& name, const fs::path& source) const {
    const auto c = Column(name);
    if (c < 0) throw Error(source.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(c);
  }
};

Table ReadTable(const fs::path& path) {
  auto in = OpenInput(path);
  csv::Reader reader(in);
  Table t;
  auto header = reader.Next();
  if (!header) throw Error(path.string() + ": empty file");
  t.header = *header;
  while (auto row = reader.Next()) {
    if (row->size() != t.header.size()) {
      throw ParseError(reader.line() - 1, "", path.string() + ": wrong number of fields");
    }
    t.rows.push_back(std::move(*row));
  }
  return t;
}

double ToDouble(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error("not a number for " + what + ": '" + text + "'");
  return v;
}

// "3", "1-6" or "all".
std::pair<int, int> ParseLengths(const std::string& text) {
  if (text.empty() || text == "all") return {1, 0};
  int a = 0, b = 0;
  char dash = 0;
  std::istringstream in(text);
  if (text.find('-') == std::string::npos) {
    in >> a;
    b = a;
  } else {
    in >> a >> dash >> b;
  }
  if (!in || !in.eof() || a < 1 || b < a) {
    throw UsageError("--lengths expects N, A-B with 1 <= A <= B, or all; got '" + text + "'");
  }
  return {a, b};
}

// "7x600", "600,600,950" or "" for no hidden layers.
std::vector<std::size_t> ParseLayers(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.empty() || text == "none") return out;
  try {
    if (auto x = text.find('x'); x != std::string::npos) {
      const auto count = std::stoul(text.substr(0, x));
      const auto width = std::stoul(text.substr(x + 1));
      if (width == 0) throw std::invalid_argument("zero width");
      out.assign(count, width);
      return out;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto w = std::stoul(item);
      if (w == 0) throw std::invalid_argument("zero width");
      out.push_back(w);
    }
  } catch (const std::exception&) {
    throw UsageError("layer list must look like 7x600 or 600,600,950; got '" + text + "'");
  }
  return out;
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string input;
  std::string spec;
  std::string out;
  double precision = 0.01;
  bool validate_bounds = false;
};

ObjectiveSpec LoadSpecOrDefault(const std::string& path) {
  return path.empty() ? DefaultObjectiveSpec() : ObjectiveSpec::Load(path);
}

int Ingest(const IngestArgs& a, std::uint64_t seed, std::ostream& out) {
  Manifest manifest("ingest", a.spec);
  manifest.seed = seed;
  const auto spec = LoadSpecOrDefault(a.spec);
  const auto table = load_sites(a.input, spec, ParseOptions{a.validate_bounds});
  const auto dedup = truncate_dedup(table, a.precision);
  const auto matrix = orient_and_scale(dedup.table);
  manifest.fingerprint = Hex(fingerprint(matrix));

  const fs::path dir(a.out);
  fs::create_directories(dir);
  WriteFile(dir / "spec.json", [&](std::ostream& o) { o << spec.ToJson() << '\n'; }, manifest);
  WriteFile(dir / "sites.csv", [&](std::ostream& o) { write_sites(o, table); }, manifest);
  WriteFile(dir / "scaled.csv", [&](std::ostream& o) { write_scaled(o, matrix); }, manifest);
  WriteFile(dir / "aliases.csv", [&](std::ostream& o) { write_aliases(o, dedup.aliases); }, manifest);
  manifest.Write(dir);

  std::size_t removed = 0;
  for (const auto& [kept, ids] : dedup.aliases) removed += ids.size();
  out << fmt::format("ingested {} sites: {} kept, {} merged as duplicates, {} objectives\n",
                     table.size(), matrix.rows, removed, matrix.cols);
  for (std::size_t j : matrix.constant_columns) {
    out << fmt::format("note: objective '{}' is constant and was scaled to 0.5\n", spec[j].name);
  }
  return kExitOk;
}

// ---- rank -----------------------------------------------------------------

struct IngestOutputs {
  ObjectiveSpec spec;
  SiteTable sites;
  ScaledMatrix matrix;
  AliasMap aliases;
};

IngestOutputs LoadIngest(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("not an ingest directory: " + dir.string());
  IngestOutputs d;
  d.spec = ObjectiveSpec::Load(dir / "spec.json");
  d.sites = load_sites(dir / "sites.csv", d.spec);
  {
    auto in = OpenInput(dir / "scaled.csv");
    d.matrix = read_scaled(in, d.spec);
  }
  {
    auto in = OpenInput(dir / "aliases.csv");
    d.aliases = read_aliases(in);
  }
  return d;
}

struct RankArgs {
  std::string data;
  std::string out;
  std::string lengths = "all";
  int workers = 1;
  std::string checkpoint_dir;
  std::uint64_t stride = 100000;
  std::uint64_t max_combinations = 0;
};

int Rank(const RankArgs& a, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  Manifest manifest("rank", a.data);
  manifest.seed = seed;
  const auto data = LoadIngest(a.data);
  manifest.fingerprint = Hex(fingerprint(data.matrix));
  const fs::path dir(a.out);
  fs::create_directories(dir);

  SweepOptions opts;
  std::tie(opts.first_length, opts.last_length) = ParseLengths(a.lengths);
  const int m = static_cast<int>(data.matrix.cols);
  if (opts.last_length > m) {
    throw UsageError(fmt::format("--lengths exceeds the {} objectives", m));
  }
  if (a.workers < 1) throw UsageError("--workers must be at least 1");
  opts.workers = a.workers;
  opts.checkpoint_dir = a.checkpoint_dir.empty() ? dir / "checkpoints" : fs::path(a.checkpoint_dir);
  opts.checkpoint_stride = a.stride;
  if (a.max_combinations > 0) opts.max_combinations_per_length = a.max_combinations;
  opts.log = [&](const std::string& msg) { err << msg << '\n'; };

  const auto result = run_sweep(data.matrix, opts, data.aliases);

  WriteFile(dir / "nr_by_length.csv", [&](std::ostream& o) { write_nr_series_csv(o, result); },
            manifest);
  WriteFile(dir / "timings.csv",
            [&](std::ostream& o) { write_timing_csv(o, timing_report(*opts.checkpoint_dir)); },
            manifest);
  if (result.complete) {
    const SiteTable* sites = &data.sites;
    WriteFile(dir / "scores.csv", [&](std::ostream& o) { write_scores_csv(o, result, sites); },
              manifest);
    WriteFile(dir / "rank.csv", [&](std::ostream& o) { write_rank_csv(o, result, sites); },
              manifest);
    WriteFile(dir / "contributions.csv",
              [&](std::ostream& o) { write_contributions_csv(o, result); }, manifest);
    WriteFile(dir / "variance.csv", [&](std::ostream& o) { write_variance_csv(o, result); },
              manifest);
    WriteFile(dir / "rank.json", [&](std::ostream& o) { write_rank_json(o, result, sites); },
              manifest);
  }
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  manifest.Write(dir);

  if (result.complete) {
    out << fmt::format("ranked {} sites over {} objectives\n", result.site_ids.size(), m);
  } else {
    std::vector<std::string> missing;
    for (int s : result.missing_lengths()) missing.push_back(std::to_string(s));
    out << fmt::format("partial run; lengths still missing: {}\n", fmt::join(missing, ","));
  }
  return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string rank;
  std::string out;
  std::string mode = "concnn";
  std::string config;
  bool grid = false;
  std::string stage1_layers;
  std::string stage2_layers;
  std::string activation;
  double learning_rate = 0.0;
  double decay = 0.0;
  std::size_t decay_every = 0;
  std::size_t epochs = 0;
  std::size_t batch_size = 0;
  std::size_t patience = 0;
  double test_fraction = 0.0;
  double validation_fraction = 0.0;
  std::vector<double> loss_weights;
};

// Applies keys present in `j` on top of `c`.
void ApplyConfigJson(const json& j, TrainConfig& c) {
  auto layers = [](const json& v) {
    if (v.is_string()) return ParseLayers(v.get<std::string>());
    return v.get<std::vector<std::size_t>>();
  };
  try {
    if (j.contains("stage1_layers")) c.stage1_layers = layers(j["stage1_layers"]);
    if (j.contains("stage2_layers")) c.stage2_layers = layers(j["stage2_layers"]);
    if (j.contains("activation")) c.hidden = ParseActivation(j["activation"].get<std::string>());
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("decay")) c.decay = j["decay"].get<double>();
    if (j.contains("decay_every")) c.decay_every = j["decay_every"].get<std::size_t>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("patience")) c.patience = j["patience"].get<std::size_t>();
    if (j.contains("min_delta")) c.min_delta = j["min_delta"].get<double>();
    if (j.contains("test_fraction")) c.test_fraction = j["test_fraction"].get<double>();
    if (j.contains("validation_fraction")) {
      c.validation_fraction = j["validation_fraction"].get<double>();
    }
    if (j.contains("loss_weights")) {
      const auto w = j["loss_weights"].get<std::vector<double>>();
      if (w.size() != 3) throw ConfigError("loss_weights needs three values");
      c.weight_l = w[0];
      c.weight_b = w[1];
      c.weight_2 = w[2];
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
}

json ConfigToJson(const TrainConfig& c) {
  return {{"stage1_layers", c.stage1_layers},
          {"stage2_layers", c.stage2_layers},
          {"activation", ToString(c.hidden)},
          {"learning_rate", c.learning_rate},
          {"decay", c.decay},
          {"decay_every", c.decay_every},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"patience", c.patience},
          {"min_delta", c.min_delta},
          {"test_fraction", c.test_fraction},
          {"validation_fraction", c.validation_fraction},
          {"loss_weights", {c.weight_l, c.weight_b, c.weight_2}},
          {"seed", c.seed}};
}

json MetricsToJson(const EvalMetrics& e) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"mse", num(e.mse)}, {"rmse", num(e.rmse)}, {"mae", num(e.mae)},
          {"r2", e.r2_defined ? num(e.r2) : json(nullptr)}};
}

// The coarse search space behind the published configurations. Enumerated
// only; running it is left to the caller.
int PrintGrid(PredictorMode mode, std::ostream& out) {
  const std::vector<std::size_t> widths{25, 100, 250, 600, 950};
  const std::vector<double> rates{1e-5, 1e-4, 2e-4, 1e-3};
  json grid = json::array();
  const std::size_t max_stage1 = mode == PredictorMode::kConcNN ? 8 : 0;
  const std::size_t max_stage2 = mode == PredictorMode::kConcNN ? 8 : 10;
  for (std::size_t l1 = mode == PredictorMode::kConcNN ? 1 : 0; l1 <= max_stage1; ++l1) {
    for (std::size_t l2 = 1; l2 <= max_stage2; ++l2) {
      for (std::size_t w : widths) {
        for (double lr : rates) {
          grid.push_back({{"stage1_layers", std::vector<std::size_t>(l1, w)},
                          {"stage2_layers", std::vector<std::size_t>(l2, w)},
                          {"learning_rate", lr}});
        }
      }
    }
  }
  out << grid.dump() << '\n';
  return kExitOk;
}

std::vector<PredictorSample> LoadSamples(const IngestOutputs& data, const fs::path& rank_dir) {
  const fs::path path = rank_dir / "rank.csv";
  if (!fs::exists(path)) throw UsageError(path.string() + " not found; run a complete rank first");
  const Table t = ReadTable(path);
  const std::size_t m = data.spec.size();
  const std::size_t id_col = t.Require("site_id", path);
  const std::size_t metric_col = t.Require("metric", path);
  std::vector<std::size_t> sc_cols;
  for (std::size_t j = 1; j <= m; ++j) sc_cols.push_back(t.Require("sc_" + std::to_string(j), path));

  std::map<std::string, std::vector<double>> y2;
  for (const auto& row : t.rows) {
    std::vector<double> v{ToDouble(row[metric_col], "metric")};
    for (std::size_t c : sc_cols) v.push_back(ToDouble(row[c], "contribution"));
    y2.emplace(row[id_col], std::move(v));
  }
  std::vector<PredictorSample> samples;
  for (const auto& site : data.sites.sites) {
    auto it = y2.find(site.registry_id);
    if (it == y2.end()) throw Error("site " + site.registry_id + " is missing from " + path.string());
    PredictorSample s;
    s.site_id = site.registry_id;
    s.x = {site.longitude, site.latitude, static_cast<double>(site.county_fips),
           static_cast<double>(site.state_fips)};
    s.y1 = site.raw_objectives;
    s.y2 = it->second;
    samples.push_back(std::move(s));
  }
  return samples;
}

int Train(const TrainArgs& a, const CLI::App& sub, std::uint64_t seed, std::ostream& out,
          std::ostream& err) {
  const PredictorMode mode = ParsePredictorMode(a.mode);
  if (a.grid) return PrintGrid(mode, out);
  if (a.data.empty() || a.rank.empty() || a.out.empty()) {
    throw UsageError("train needs --data, --rank and --out (or --grid)");
  }

  TrainConfig c = mode == PredictorMode::kConcNN ? TrainConfig::ConcNNDefaults()
                                                 : TrainConfig::LutNNDefaults();
  if (!a.config.empty()) {
    auto in = OpenInput(a.config);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError(a.config + ": " + e.what());
    }
    ApplyConfigJson(j, c);
  }
  auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
  if (given("--stage1-layers")) c.stage1_layers = ParseLayers(a.stage1_layers);
  if (given("--stage2-layers")) c.stage2_layers = ParseLayers(a.stage2_layers);
  if (given("--activation")) c.hidden = ParseActivation(a.activation);
  if (given("--lr")) c.learning_rate = a.learning_rate;
  if (given("--decay")) c.decay = a.decay;
  if (given("--decay-every")) c.decay_every = a.decay_every;
  if (given("--epochs")) c.epochs = a.epochs;
  if (given("--batch-size")) c.batch_size = a.batch_size;
  if (given("--patience")) c.patience = a.patience;
  if (given("--test-fraction")) c.test_fraction = a.test_fraction;
  if (given("--validation-fraction")) c.validation_fraction = a.validation_fraction;
  if (given("--loss-weights")) {
    c.weight_l = a.loss_weights[0];
    c.weight_b = a.loss_weights[1];
    c.weight_2 = a.loss_weights[2];
  }
  c.seed = seed;

  Manifest manifest("train", a.config);
  manifest.seed = seed;
  const auto data = LoadIngest(a.data);
  manifest.fingerprint = Hex(fingerprint(data.matrix) ^ HashFile(fs::path(a.rank) / "rank.csv"));
  const auto samples = LoadSamples(data, a.rank);

  const std::size_t every = std::max<std::size_t>(1, c.epochs / 10);
  auto trained = train_predictor(samples, data.spec, mode, c, [&](std::size_t epoch, double loss) {
    if (epoch % every == 0 || epoch == 1) err << fmt::format("epoch {}: loss {:.6g}\n", epoch, loss);
  });

  const fs::path dir(a.out);
  trained.model.Save(dir);
  manifest.outputs.push_back("model.bin");
  if (mode == PredictorMode::kLutNN) manifest.outputs.push_back("lookup.bin");

  const auto& rep = trained.report;
  WriteFile(dir / "curves.csv", [&](std::ostream& o) {
    csv::WriteRow(o, {"epoch", "train_loss", "validation_loss", "learning_rate", "loss_yl",
                      "loss_yb", "loss_y2"});
    for (std::size_t e = 0; e < rep.curves.train_loss.size(); ++e) {
      std::vector<std::string> row{std::to_string(e + 1), csv::FormatDouble(rep.curves.train_loss[e]),
                                   e < rep.curves.validation_loss.size()
                                       ? csv::FormatDouble(rep.curves.validation_loss[e])
                                       : "",
                                   csv::FormatDouble(rep.curves.learning_rate[e])};
      for (double p : rep.curves.train_parts[e]) row.push_back(csv::FormatDouble(p));
      csv::WriteRow(o, row);
    }
  }, manifest);
  json metrics = {
      {"mode", ToString(mode)},
      {"train_size", rep.train_size},
      {"validation_size", rep.validation_size},
      {"test_size", rep.test_size},
      {"epochs_run", rep.curves.train_loss.size()},
      {"best_epoch", rep.curves.best_epoch},
      {"stopped_early", rep.curves.stopped_early},
      {"y1", {{"train", MetricsToJson(rep.y1.train)}, {"test", MetricsToJson(rep.y1.test)}}},
      {"y2", {{"train", MetricsToJson(rep.y2.train)}, {"test", MetricsToJson(rep.y2.test)}}},
      {"metric",
       {{"train", MetricsToJson(rep.metric.train)}, {"test", MetricsToJson(rep.metric.test)}}},
  };
  if (rep.y2_test_true_objectives) {
    metrics["y2_test_true_objectives"] = MetricsToJson(*rep.y2_test_true_objectives);
    metrics["test_unseen_state"] = rep.test_unseen_state;
  }
  if (rep.test_unseen_state > 0) {
    err << fmt::format("warning: {} test sites lie in states without training sites and were "
                       "left out of the test metrics\n",
                       rep.test_unseen_state);
  }
  WriteFile(dir / "metrics.json", [&](std::ostream& o) { o << metrics.dump(2) << '\n'; }, manifest);
  WriteFile(dir / "config.json", [&](std::ostream& o) { o << ConfigToJson(c).dump(2) << '\n'; },
            manifest);
  manifest.Write(dir);

  out << fmt::format("trained {} on {} sites ({} validation, {} test) for {} epochs\n",
                     ToString(mode), rep.train_size, rep.validation_size, rep.test_size,
                     rep.curves.train_loss.size());
  out << fmt::format("Y2 R2 train {:.5f} test {:.5f}\n", rep.y2.train.r2, rep.y2.test.r2);
  return kExitOk;
}

// ---- predict --------------------------------------------------------------

struct PredictArgs {
  std::string model;
  double lon = 0.0;
  double lat = 0.0;
  std::int64_t county = 0;
  std::int64_t state = 0;
};

int Predict(const PredictArgs& a, std::ostream& out) {
  const auto model = PredictorModel::Load(a.model);
  const std::vector<double> x{a.lon, a.lat, static_cast<double>(a.county),
                              static_cast<double>(a.state)};
  const auto p = model.Predict(x);
  json objectives = json::object(), importances = json::object();
  for (std::size_t j = 0; j < model.spec().size(); ++j) {
    objectives[model.spec()[j].name] = p.objectives[j];
    importances[model.spec()[j].name] = p.importances[j];
  }
  json j = {{"mode", ToString(model.mode())},
            {"input",
             {{"longitude", a.lon}, {"latitude", a.lat}, {"county_fips", a.county},
              {"state_fips", a.state}}},
            {"objectives", objectives},
            {"metric", p.metric},
            {"importances", importances}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
  std::string rank;
  std::string scores;
  std::size_t n = 20;
  std::string format = "table";
  std::string out;
};

struct ScoredRow {
  std::vector<std::string> fields;
  double metric = 0.0;
};

// Reads a scores file and returns rows sorted by metric descending.
std::pair<Table, std::vector<ScoredRow>> LoadScores(const fs::path& path) {
  Table t = ReadTable(path);
  const std::size_t metric_col = t.Require("metric", path);
  t.Require("site_id", path);
  std::vector<ScoredRow> rows;
  for (auto& r : t.rows) rows.push_back({r, ToDouble(r[metric_col], "metric")});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ScoredRow& a, const ScoredRow& b) { return a.metric > b.metric; });
  return {std::move(t), std::move(rows)};
}

fs::path ScoresPath(const ReportArgs& a) {
  if (!a.scores.empty()) return a.scores;
  if (!a.rank.empty()) return fs::path(a.rank) / "scores.csv";
  throw UsageError("report needs --rank or --scores");
}

int ReportTop(const ReportArgs& a, std::ostream& out) {
  const auto path = ScoresPath(a);
  const auto [table, rows] = LoadScores(path);
  // Optional columns pass through when the scores file carries them.
  const std::vector<std::string> wanted{"site_id", "state", "county", "state_fips", "county_fips",
                                        "longitude", "latitude"};
  std::vector<std::pair<std::string, std::size_t>> cols;
  for (const auto& name : wanted) {
    if (const auto c = table.Column(name); c >= 0) cols.emplace_back(name, static_cast<std::size_t>(c));
  }
  const std::size_t n = std::min(a.n, rows.size());

  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> header{"rank"};
  for (const auto& [name, c] : cols) header.push_back(name);
  header.push_back("metric");
  lines.push_back(header);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> line{std::to_string(i + 1)};
    for (const auto& [name, c] : cols) line.push_back(rows[i].fields[c]);
    line.push_back(fmt::format("{:.4f}", rows[i].metric));
    lines.push_back(std::move(line));
  }

  if (a.format == "csv") {
    for (const auto& line : lines) csv::WriteRow(out, line);
    return kExitOk;
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : lines) {
    for (std::size_t k = 0; k < line.size(); ++k) width[k] = std::max(width[k], line[k].size());
  }
  for (const auto& line : lines) {
    std::string text;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (k > 0) text += "  ";
      text += fmt::format("{:<{}}", line[k], width[k]);
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out << text << '\n';
  }
  return kExitOk;
}

int ReportCurves(const ReportArgs& a, std::ostream& out) {
  if (a.rank.empty()) throw UsageError("report curves needs --rank");
  const fs::path dir(a.rank);
  const auto [scores, rows] = LoadScores(ScoresPath(a));
  const std::size_t id_col = scores.Require("site_id", dir / "scores.csv");
  const std::size_t n = std::min(a.n, rows.size());
  std::map<std::string, std::size_t> top;
  for (std::size_t i = 0; i < n; ++i) top.emplace(rows[i].fields[id_col], i + 1);

  const auto series_path = dir / "nr_by_length.csv";
  const Table series = ReadTable(series_path);
  const std::size_t sid = series.Require("site_id", series_path);
  const std::size_t scol = series.Require("s", series_path);
  const std::size_t nrcol = series.Require("nr", series_path);

  struct Point {
    std::size_t rank;
    int s;
    std::string site, nr;
  };
  std::vector<Point> points;
  for (const auto& r : series.rows) {
    auto it = top.find(r[sid]);
    if (it == top.end()) continue;
    points.push_back({it->second, std::stoi(r[scol]), r[sid], r[nrcol]});
  }
  std::sort(points.begin(), points.end(), [](const Point& x, const Point& y) {
    return x.rank != y.rank ? x.rank < y.rank : x.s < y.s;
  });

  auto emit = [&](std::ostream& o) {
    csv::WriteRow(o, {"rank", "site_id", "s", "nr"});
    for (const auto& p : points) csv::WriteRow(o, {std::to_string(p.rank), p.site, std::to_string(p.s), p.nr});
  };
  if (a.out.empty()) {
    emit(out);
  } else {
    std::ofstream f(a.out, std::ios::trunc);
    if (!f) throw Error("cannot write " + a.out);
    emit(f);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exhaustive multi-objective site ranking and surrogate prediction", "siterank"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "siterank 0.1.0");
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for every random choice (split, initialization)");

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Validate, deduplicate and scale a site table");
  ingest->add_option("--input,input", ia.input, "Site CSV")->required()->check(CLI::ExistingFile);
  ingest->add_option("--spec", ia.spec, "Objective spec JSON (default: built-in 22 objectives)")
      ->check(CLI::ExistingFile);
  ingest->add_option("--out", ia.out, "Output directory")->required();
  ingest->add_option("--precision", ia.precision, "Coordinate truncation grid in degrees")
      ->check(CLI::PositiveNumber);
  ingest->add_flag("--validate-bounds", ia.validate_bounds,
                   "Reject coordinates outside the contiguous US");

  RankArgs ra;
  auto* rank = app.add_subcommand("rank", "Run the combinatorial Pareto sweep");
  rank->add_option("--data", ra.data, "Ingest output directory")->required()->check(CLI::ExistingDirectory);
  rank->add_option("--out", ra.out, "Output directory")->required();
  rank->add_option("--lengths", ra.lengths, "Combination lengths: N, A-B or all");
  rank->add_option("--workers", ra.workers, "Worker threads");
  rank->add_option("--checkpoint-dir", ra.checkpoint_dir, "Checkpoint directory (default <out>/checkpoints)")
      ->envname("SITERANK_CHECKPOINT_DIR");
  rank->add_option("--checkpoint-stride", ra.stride, "Combinations between checkpoints")
      ->check(CLI::PositiveNumber);
  rank->add_option("--max-combinations", ra.max_combinations,
                   "Stop each length after about this many combinations (resumable)");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a ConcNN or LUT-NN predictor");
  train->add_option("--data", ta.data, "Ingest output directory")->check(CLI::ExistingDirectory);
  train->add_option("--rank", ta.rank, "Rank output directory")->check(CLI::ExistingDirectory);
  train->add_option("--out", ta.out, "Model output directory");
  train->add_option("--mode", ta.mode, "concnn or lutnn")->check(CLI::IsMember({"concnn", "lutnn"}));
  train->add_option("--config", ta.config, "Training config JSON")->check(CLI::ExistingFile);
  train->add_flag("--grid", ta.grid, "Print the hyperparameter grid and exit");
  train->add_option("--stage1-layers", ta.stage1_layers, "Stage 1 hidden layers, e.g. 7x600");
  train->add_option("--stage2-layers", ta.stage2_layers, "Score network hidden layers, e.g. 5x950");
  train->add_option("--activation", ta.activation, "Hidden activation");
  train->add_option("--lr", ta.learning_rate, "Initial learning rate")->check(CLI::PositiveNumber);
  train->add_option("--decay", ta.decay, "Learning rate decay factor")->check(CLI::PositiveNumber);
  train->add_option("--decay-every", ta.decay_every, "Epochs between decays")->check(CLI::PositiveNumber);
  train->add_option("--epochs", ta.epochs, "Maximum epochs");
  train->add_option("--batch-size", ta.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  train->add_option("--patience", ta.patience, "Early stopping patience (0 disables)");
  train->add_option("--test-fraction", ta.test_fraction, "Held-out test share")->check(CLI::Range(0.0, 0.95));
  train->add_option("--validation-fraction", ta.validation_fraction, "Validation share of training data")
      ->check(CLI::Range(0.0, 0.95));
  train->add_option("--loss-weights", ta.loss_weights, "Weights for Y_L Y_B Y2")->expected(3);

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Predict objectives, metric and importances");
  predict->add_option("--model", pa.model, "Model directory")->required()->check(CLI::ExistingDirectory);
  predict->add_option("--lon", pa.lon, "Longitude")->required();
  predict->add_option("--lat", pa.lat, "Latitude")->required();
  predict->add_option("--county-fips", pa.county, "County FIPS")->required();
  predict->add_option("--state-fips", pa.state, "State FIPS")->required();

  ReportArgs rpa;
  auto* report = app.add_subcommand("report", "Emit listings and plot-ready data");
  report->require_subcommand(1);
  auto* top = report->add_subcommand("top", "Top sites by siting metric");
  top->add_option("--rank", rpa.rank, "Rank output directory");
  top->add_option("--scores", rpa.scores, "Scores CSV (overrides --rank)")->check(CLI::ExistingFile);
  top->add_option("--n", rpa.n, "Number of sites");
  top->add_option("--format", rpa.format, "table or csv")->check(CLI::IsMember({"table", "csv"}));
  auto* curves = report->add_subcommand("curves", "NR by combination length for the top sites");
  curves->add_option("--rank", rpa.rank, "Rank output directory")->required();
  curves->add_option("--n", rpa.n, "Number of sites");
  curves->add_option("--out", rpa.out, "Output CSV (default stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) return Ingest(ia, seed, out);
    if (*rank) return Rank(ra, seed, out, err);
    if (*train) return Train(ta, *train, seed, out, err);
    if (*predict) return Predict(pa, out);
    if (*top) return ReportTop(rpa, out);
    if (*curves) return ReportCurves(rpa, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace siterank::cli
