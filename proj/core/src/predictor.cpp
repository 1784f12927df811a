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

#include "siterank/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "binary_io.hpp"

namespace siterank {

namespace {

constexpr std::string_view kModelMagic = "SRNN";
constexpr std::uint32_t kModelVersion = 1;

std::size_t GroupCount(const Head& head) {
  int g = 0;
  for (int v : head.groups) g = std::max(g, v);
  return head.groups.empty() ? 1 : static_cast<std::size_t>(g) + 1;
}

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

EvalMetrics SafeEvaluate(std::span<const double> y, std::span<const double> p) {
  if (y.size() >= 2) return evaluate(y, p);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return EvalMetrics{nan, nan, nan, nan, false};
}

}  // namespace

Standardizer Standardizer::Fit(std::span<const double> rows, std::size_t width,
                               const std::vector<bool>& passthrough) {
  if (width == 0 || rows.size() % width != 0) throw std::invalid_argument("bad row block");
  const std::size_t n = rows.size() / width;
  if (n == 0) throw std::invalid_argument("cannot standardize zero rows");
  Standardizer st;
  st.mean.assign(width, 0.0);
  st.scale.assign(width, 1.0);
  for (std::size_t j = 0; j < width; ++j) {
    if (!passthrough.empty() && passthrough[j]) continue;
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += rows[i * width + j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = rows[i * width + j] - mu;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    st.mean[j] = mu;
    st.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return st;
}

std::vector<double> Standardizer::Apply(std::span<const double> row) const {
  if (row.size() != width()) throw std::invalid_argument("standardizer width mismatch");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
  return out;
}

std::vector<double> Standardizer::Invert(std::span<const double> row) const {
  if (row.size() != width()) throw std::invalid_argument("standardizer width mismatch");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j] * scale[j] + mean[j];
  return out;
}

SingleStageModel::SingleStageModel(Network net, Head head)
    : net_(std::move(net)), head_(std::move(head)) {
  if (net_.output_size() != head_.size()) throw std::invalid_argument("head does not fit network");
}

std::size_t SingleStageModel::part_count() const { return GroupCount(head_); }

double SingleStageModel::Loss(const TrainingExample& ex, std::span<double> grad,
                              std::span<double> parts) const {
  Tape tape;
  const auto z = net_.Forward(ex.x, tape);
  if (grad.empty()) return head_.Loss(z, ex.target, {}, parts);
  std::vector<double> gz(z.size(), 0.0);
  const double loss = head_.Loss(z, ex.target, gz, parts);
  net_.Backward(tape, gz, grad);
  return loss;
}

std::vector<double> SingleStageModel::Predict(std::span<const double> x) const {
  return head_.Transform(net_.Forward(x));
}

ConcModel::ConcModel(Network stage1, Head head1, Network stage2, Head head2)
    : stage1_(std::move(stage1)),
      head1_(std::move(head1)),
      stage2_(std::move(stage2)),
      head2_(std::move(head2)) {
  if (stage1_.output_size() != head1_.size() || stage2_.output_size() != head2_.size()) {
    throw std::invalid_argument("head does not fit network");
  }
  if (stage2_.input_size() != stage1_.input_size() + head1_.size()) {
    throw std::invalid_argument("stage 2 input must be stage 1 input plus stage 1 output");
  }
}

std::size_t ConcModel::parameter_count() const {
  return stage1_.parameter_count() + stage2_.parameter_count();
}

std::vector<double> ConcModel::Parameters() const {
  auto p = stage1_.Parameters();
  const auto q = stage2_.Parameters();
  p.insert(p.end(), q.begin(), q.end());
  return p;
}

void ConcModel::SetParameters(std::span<const double> params) {
  if (params.size() != parameter_count()) throw std::invalid_argument("parameter count mismatch");
  const std::size_t k = stage1_.parameter_count();
  stage1_.SetParameters(params.subspan(0, k));
  stage2_.SetParameters(params.subspan(k));
}

std::size_t ConcModel::part_count() const {
  return std::max(GroupCount(head1_), GroupCount(head2_));
}

double ConcModel::Loss(const TrainingExample& ex, std::span<double> grad,
                       std::span<double> parts) const {
  const std::size_t n1 = head1_.size();
  if (ex.target.size() != n1 + head2_.size()) throw std::invalid_argument("target size mismatch");
  const std::span<const double> t1(ex.target.data(), n1);
  const std::span<const double> t2(ex.target.data() + n1, head2_.size());

  Tape tape1, tape2;
  const auto z1 = stage1_.Forward(ex.x, tape1);
  const auto y1 = head1_.Transform(z1);
  std::vector<double> in2(ex.x.begin(), ex.x.end());
  in2.insert(in2.end(), y1.begin(), y1.end());
  const auto z2 = stage2_.Forward(in2, tape2);

  if (grad.empty()) return head1_.Loss(z1, t1, {}, parts) + head2_.Loss(z2, t2, {}, parts);

  const std::size_t k = stage1_.parameter_count();
  std::vector<double> gz1(n1, 0.0), gz2(z2.size(), 0.0);
  double loss = head1_.Loss(z1, t1, gz1, parts);
  loss += head2_.Loss(z2, t2, gz2, parts);
  const auto gin2 = stage2_.Backward(tape2, gz2, grad.subspan(k));
  const std::span<const double> gy1(gin2.data() + ex.x.size(), n1);
  head1_.BackpropTransform(z1, gy1, gz1);
  stage1_.Backward(tape1, gz1, grad.subspan(0, k));
  return loss;
}

std::pair<std::vector<double>, std::vector<double>> ConcModel::Predict(
    std::span<const double> x) const {
  auto y1 = head1_.Transform(stage1_.Forward(x));
  std::vector<double> in2(x.begin(), x.end());
  in2.insert(in2.end(), y1.begin(), y1.end());
  auto y2 = head2_.Transform(stage2_.Forward(in2));
  return {std::move(y1), std::move(y2)};
}

GradientCheckResult gradient_check(Trainable& model, const TrainingExample& example,
                                   double epsilon) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) {
    throw std::invalid_argument("epsilon must lie in [1e-6, 1e-3]");
  }
  const auto base = model.Parameters();
  std::vector<double> analytic(base.size(), 0.0);
  model.Loss(example, analytic, {});

  GradientCheckResult result;
  auto p = base;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = base[k] + epsilon;
    model.SetParameters(p);
    const double up = model.Loss(example, {}, {});
    p[k] = base[k] - epsilon;
    model.SetParameters(p);
    const double down = model.Loss(example, {}, {});
    p[k] = base[k];
    const double numeric = (up - down) / (2.0 * epsilon);
    const double a = analytic[k];
    const double rel =
        std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    if (rel > result.max_relative_error || k == 0) {
      result = {rel, k, a, numeric};
    }
  }
  model.SetParameters(base);
  return result;
}

TrainConfig TrainConfig::ConcNNDefaults() {
  TrainConfig c;
  c.stage1_layers.assign(7, 600);
  c.stage2_layers.assign(5, 950);
  c.learning_rate = 1e-3;
  c.epochs = 2000;
  c.batch_size = 256;
  return c;
}

TrainConfig TrainConfig::LutNNDefaults() {
  TrainConfig c;
  c.stage2_layers.assign(5, 950);
  c.learning_rate = 2e-4;
  c.decay = 0.92;
  c.decay_every = 1;
  c.patience = 25;
  c.epochs = 1000;
  c.batch_size = 16;
  return c;
}

double mean_loss(const Trainable& model, const std::vector<TrainingExample>& examples,
                 std::span<double> parts) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : examples) total += model.Loss(ex, {}, parts);
  const double n = static_cast<double>(examples.size());
  for (double& v : parts) v /= n;
  return total / n;
}

TrainingCurves fit(Trainable& model, const std::vector<TrainingExample>& train,
                   const std::vector<TrainingExample>& validation, const TrainConfig& config,
                   const std::function<void(std::size_t, double)>& on_epoch) {
  if (train.empty()) throw std::invalid_argument("no training examples");
  if (config.batch_size == 0 || config.decay_every == 0) {
    throw std::invalid_argument("batch size and decay interval must be positive");
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;

  auto params = model.Parameters();
  const std::size_t np = params.size();
  std::vector<double> m1(np, 0.0), m2(np, 0.0), grad(np);
  std::vector<double> parts(model.part_count());
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed ^ 0x5eedf17ULL);

  TrainingCurves curves;
  double lr = config.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_params = params;
  std::size_t since_best = 0;
  std::uint64_t step = 0;
  const bool early_stop = config.patience > 0 && !validation.empty();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::fill(parts.begin(), parts.end(), 0.0);
    double epoch_loss = 0.0;
    try {
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t q = start; q < end; ++q) {
          epoch_loss += model.Loss(train[order[q]], grad, parts);
        }
        const double inv = 1.0 / static_cast<double>(end - start);
        ++step;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
        for (std::size_t k = 0; k < np; ++k) {
          const double g = grad[k] * inv;
          m1[k] = kBeta1 * m1[k] + (1.0 - kBeta1) * g;
          m2[k] = kBeta2 * m2[k] + (1.0 - kBeta2) * g * g;
          params[k] -= lr * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + kAdamEps);
        }
        if (!AllFinite(params)) throw DivergenceError(epoch, "non-finite parameters");
        model.SetParameters(params);
      }
    } catch (const NonFiniteError& e) {
      throw DivergenceError(epoch, e.what());
    }
    const double n = static_cast<double>(train.size());
    epoch_loss /= n;
    for (double& v : parts) v /= n;
    if (!std::isfinite(epoch_loss)) throw DivergenceError(epoch, "training loss is not finite");

    curves.train_loss.push_back(epoch_loss);
    curves.train_parts.push_back(parts);
    curves.learning_rate.push_back(lr);

    double monitored = epoch_loss;
    if (!validation.empty()) {
      double val;
      try {
        val = mean_loss(model, validation);
      } catch (const NonFiniteError& e) {
        throw DivergenceError(epoch, e.what());
      }
      if (!std::isfinite(val)) throw DivergenceError(epoch, "validation loss is not finite");
      curves.validation_loss.push_back(val);
      monitored = val;
    }
    if (monitored < best - config.min_delta) {
      best = monitored;
      best_params = params;
      curves.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (on_epoch) on_epoch(epoch, epoch_loss);
    if (early_stop && since_best >= config.patience) {
      curves.stopped_early = true;
      break;
    }
    if (epoch % config.decay_every == 0) lr *= config.decay;
  }
  if (early_stop) model.SetParameters(best_params);
  return curves;
}

std::vector<PredictorSample> make_samples(const SiteTable& table, const RankResult& result) {
  if (!result.complete) throw std::invalid_argument("ranking result is incomplete");
  const std::size_t m = table.spec.size();
  if (static_cast<std::size_t>(result.m) != m) {
    throw std::invalid_argument("ranking and site table disagree on objective count");
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < result.site_ids.size(); ++i) index.emplace(result.site_ids[i], i);
  for (const auto& [kept, removed] : result.aliases) {
    auto it = index.find(kept);
    if (it == index.end()) continue;
    const std::size_t i = it->second;
    for (const auto& r : removed) index.emplace(r, i);
  }
  std::vector<PredictorSample> out;
  out.reserve(table.sites.size());
  for (const auto& site : table.sites) {
    auto it = index.find(site.registry_id);
    if (it == index.end()) throw Error("site " + site.registry_id + " has no ranking");
    const std::size_t i = it->second;
    PredictorSample s;
    s.site_id = site.registry_id;
    s.x = {site.longitude, site.latitude, static_cast<double>(site.county_fips),
           static_cast<double>(site.state_fips)};
    s.y1 = site.raw_objectives;
    s.y2.push_back(result.scores.metric[i]);
    for (std::size_t j = 0; j < m; ++j) s.y2.push_back(result.contributions.sc_at(i, j));
    out.push_back(std::move(s));
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (test_fraction > 0.0 && n >= 2) n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  std::vector<std::size_t> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

std::string ToString(PredictorMode mode) {
  return mode == PredictorMode::kConcNN ? "concnn" : "lutnn";
}

PredictorMode ParsePredictorMode(const std::string& name) {
  if (name == "concnn") return PredictorMode::kConcNN;
  if (name == "lutnn") return PredictorMode::kLutNN;
  throw ConfigError("unknown predictor mode '" + name + "' (expected concnn or lutnn)");
}

namespace {

std::vector<double> RoundBinaries(std::vector<double> y, const ObjectiveSpec& spec) {
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (spec[j].kind == ObjectiveKind::kBinary) y[j] = y[j] >= 0.5 ? 1.0 : 0.0;
  }
  return y;
}

Prediction SplitY2(std::vector<double> objectives, const std::vector<double>& y2) {
  Prediction p;
  p.objectives = std::move(objectives);
  p.metric = y2.front();
  p.importances.assign(y2.begin() + 1, y2.end());
  return p;
}

}  // namespace

Prediction PredictorModel::Predict(std::span<const double> x) const {
  if (x.size() != 4) throw std::invalid_argument("predictor input is (lon, lat, county, state)");
  if (mode_ == PredictorMode::kLutNN) {
    if (!lookup_) throw Error("model has no lookup table");
    const auto objectives = lookup_->Predict(x);
    return PredictFromObjectives(x, objectives);
  }
  const auto xs = x_std_.Apply(x);
  auto [y1, y2] = conc_.Predict(xs);
  return SplitY2(RoundBinaries(y1_std_.Invert(y1), spec_), y2);
}

Prediction PredictorModel::PredictFromObjectives(std::span<const double> x,
                                                 std::span<const double> objectives) const {
  if (mode_ != PredictorMode::kLutNN) throw Error("only LUT-NN models take objectives as input");
  auto in = x_std_.Apply(x);
  const auto y1 = y1_std_.Apply(objectives);
  in.insert(in.end(), y1.begin(), y1.end());
  return SplitY2(std::vector<double>(objectives.begin(), objectives.end()), head_.Predict(in));
}

namespace {

void WriteNetwork(binary::Writer& w, const Network& net) {
  w.U32(static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& L : net.layers()) {
    w.U64(L.in);
    w.U64(L.out);
    w.U8(static_cast<std::uint8_t>(L.activation));
    w.F64s(L.weights);
    w.F64s(L.bias);
  }
}

Network ReadNetwork(binary::Reader& r) {
  std::vector<Layer> layers(r.U32());
  for (auto& L : layers) {
    L.in = r.U64();
    L.out = r.U64();
    const auto a = r.U8();
    if (a > static_cast<std::uint8_t>(Activation::kSigmoid)) throw Error("unknown activation code");
    L.activation = static_cast<Activation>(a);
    L.weights = r.F64s();
    L.bias = r.F64s();
    if (!AllFinite(L.weights) || !AllFinite(L.bias)) throw Error("non-finite model parameters");
  }
  return Network(std::move(layers));
}

void WriteHead(binary::Writer& w, const Head& head) {
  w.U64(head.size());
  for (std::size_t k = 0; k < head.size(); ++k) {
    w.U8(static_cast<std::uint8_t>(head.units[k]));
    w.F64(head.weights[k]);
    w.I64(head.groups.empty() ? 0 : head.groups[k]);
  }
}

Head ReadHead(binary::Reader& r) {
  Head head;
  const std::uint64_t n = r.U64();
  if (n > r.remaining()) throw std::out_of_range("head truncated");
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto u = r.U8();
    if (u > static_cast<std::uint8_t>(OutputUnit::kSoftmax)) throw Error("unknown output unit code");
    head.units.push_back(static_cast<OutputUnit>(u));
    head.weights.push_back(r.F64());
    head.groups.push_back(static_cast<int>(r.I64()));
  }
  return head;
}

void WriteStandardizer(binary::Writer& w, const Standardizer& s) {
  w.F64s(s.mean);
  w.F64s(s.scale);
}

Standardizer ReadStandardizer(binary::Reader& r) {
  Standardizer s;
  s.mean = r.F64s();
  s.scale = r.F64s();
  if (s.mean.size() != s.scale.size()) throw Error("inconsistent standardizer");
  return s;
}

}  // namespace

void PredictorModel::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  binary::Writer w;
  w.Raw(kModelMagic);
  w.U32(kModelVersion);
  w.U8(mode_ == PredictorMode::kConcNN ? 0 : 1);
  w.U64(seed_);
  w.Str(spec_.ToJson());
  WriteStandardizer(w, x_std_);
  WriteStandardizer(w, y1_std_);
  if (mode_ == PredictorMode::kConcNN) {
    WriteNetwork(w, conc_.stage1());
    WriteHead(w, conc_.head1());
    WriteNetwork(w, conc_.stage2());
    WriteHead(w, conc_.head2());
  } else {
    WriteNetwork(w, head_.network());
    WriteHead(w, head_.head());
  }
  w.U64(binary::HashBytes(w.bytes()));
  const auto path = dir / "model.bin";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error("cannot write model " + path.string());
  out.close();
  if (lookup_) lookup_->Save(dir / "lookup.bin");
}

PredictorModel PredictorModel::Load(const std::filesystem::path& dir) {
  const auto path = dir / "model.bin";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw Error(path.string() + ": model file truncated");
  const std::string_view body(bytes.data(), bytes.size() - 8);
  binary::Reader tail(std::string_view(bytes).substr(bytes.size() - 8));
  if (tail.U64() != binary::HashBytes(body)) throw Error(path.string() + ": checksum mismatch");
  PredictorModel model;
  try {
    binary::Reader r(body);
    if (r.Take(4) != kModelMagic) throw Error(path.string() + ": not a model file");
    if (r.U32() != kModelVersion) throw Error(path.string() + ": unsupported model version");
    model.mode_ = r.U8() == 0 ? PredictorMode::kConcNN : PredictorMode::kLutNN;
    model.seed_ = r.U64();
    model.spec_ = ObjectiveSpec::FromJson(r.Str());
    model.x_std_ = ReadStandardizer(r);
    model.y1_std_ = ReadStandardizer(r);
    if (model.mode_ == PredictorMode::kConcNN) {
      auto s1 = ReadNetwork(r);
      auto h1 = ReadHead(r);
      auto s2 = ReadNetwork(r);
      auto h2 = ReadHead(r);
      model.conc_ = ConcModel(std::move(s1), std::move(h1), std::move(s2), std::move(h2));
    } else {
      auto net = ReadNetwork(r);
      auto head = ReadHead(r);
      model.head_ = SingleStageModel(std::move(net), std::move(head));
    }
  } catch (const std::out_of_range&) {
    throw Error(path.string() + ": model file truncated");
  } catch (const std::invalid_argument& e) {
    throw Error(path.string() + ": " + e.what());
  }
  if (model.mode_ == PredictorMode::kLutNN) model.lookup_ = LookupTable::Load(dir / "lookup.bin");
  return model;
}

struct PredictorBuilder {
  static Head ObjectiveHead(const ObjectiveSpec& spec, const TrainConfig& c) {
    const auto n_bin = spec.IndicesOfKind(ObjectiveKind::kBinary).size();
    const auto n_cont = spec.size() - n_bin;
    Head h;
    for (const auto& o : spec.objectives()) {
      const bool bin = o.kind == ObjectiveKind::kBinary;
      h.units.push_back(bin ? OutputUnit::kSigmoid : OutputUnit::kLinear);
      h.weights.push_back(bin ? c.weight_b / static_cast<double>(n_bin)
                              : c.weight_l / static_cast<double>(n_cont));
      h.groups.push_back(bin ? 1 : 0);
    }
    return h;
  }

  static Head ScoreHead(std::size_t m, const TrainConfig& c) {
    Head h;
    const double w = c.weight_2 / static_cast<double>(m + 1);
    h.units.push_back(OutputUnit::kLinear);
    h.units.insert(h.units.end(), m, OutputUnit::kSoftmax);
    h.weights.assign(m + 1, w);
    h.groups.assign(m + 1, 2);
    return h;
  }

  static std::vector<std::size_t> Dims(std::size_t in, const std::vector<std::size_t>& hidden,
                                       std::size_t out) {
    std::vector<std::size_t> d{in};
    d.insert(d.end(), hidden.begin(), hidden.end());
    d.push_back(out);
    return d;
  }

  static std::vector<double> Flatten(const std::vector<PredictorSample>& samples,
                                     const std::vector<std::size_t>& idx, bool x) {
    std::vector<double> out;
    for (std::size_t i : idx) {
      if (x) {
        out.insert(out.end(), samples[i].x.begin(), samples[i].x.end());
      } else {
        out.insert(out.end(), samples[i].y1.begin(), samples[i].y1.end());
      }
    }
    return out;
  }

  static LookupTable BuildLookup(const std::vector<PredictorSample>& samples,
                                 const std::vector<std::size_t>& idx, const ObjectiveSpec& spec) {
    SiteTable table{spec, {}};
    for (std::size_t i : idx) {
      const auto& s = samples[i];
      SiteRecord r;
      r.registry_id = s.site_id;
      r.longitude = s.x[0];
      r.latitude = s.x[1];
      r.county_fips = std::llround(s.x[2]);
      r.state_fips = std::llround(s.x[3]);
      r.raw_objectives = s.y1;
      table.sites.push_back(std::move(r));
    }
    return LookupTable::Build(table);
  }
};

TrainedPredictor train_predictor(const std::vector<PredictorSample>& samples,
                                 const ObjectiveSpec& spec, PredictorMode mode,
                                 const TrainConfig& config,
                                 const std::function<void(std::size_t, double)>& on_epoch) {
  using B = PredictorBuilder;
  const std::size_t m = spec.size();
  if (samples.size() < 2) throw std::invalid_argument("training needs at least two samples");
  for (const auto& s : samples) {
    if (s.y1.size() != m || s.y2.size() != m + 1) {
      throw std::invalid_argument("sample " + s.site_id + " does not match the objective spec");
    }
  }

  auto [train_all, test] = split_indices(samples.size(), config.test_fraction, config.seed);
  std::vector<std::size_t> fit_idx = train_all, val_idx;
  if (config.validation_fraction > 0.0 && train_all.size() >= 2) {
    auto [a, b] = split_indices(train_all.size(), config.validation_fraction, config.seed + 1);
    fit_idx.clear();
    for (std::size_t q : a) fit_idx.push_back(train_all[q]);
    for (std::size_t q : b) val_idx.push_back(train_all[q]);
  }

  TrainedPredictor out;
  PredictorModel& model = out.model;
  model.mode_ = mode;
  model.spec_ = spec;
  model.seed_ = config.seed;
  model.x_std_ = Standardizer::Fit(B::Flatten(samples, train_all, true), 4);
  std::vector<bool> binary(m);
  for (std::size_t j = 0; j < m; ++j) binary[j] = spec[j].kind == ObjectiveKind::kBinary;
  model.y1_std_ = Standardizer::Fit(B::Flatten(samples, train_all, false), m, binary);

  auto example = [&](std::size_t i) {
    const auto& s = samples[i];
    TrainingExample ex;
    ex.x = model.x_std_.Apply(s.x);
    const auto y1 = model.y1_std_.Apply(s.y1);
    if (mode == PredictorMode::kConcNN) {
      ex.target = y1;
    } else {
      ex.x.insert(ex.x.end(), y1.begin(), y1.end());
    }
    ex.target.insert(ex.target.end(), s.y2.begin(), s.y2.end());
    return ex;
  };
  std::vector<TrainingExample> fit_set, val_set;
  for (std::size_t i : fit_idx) fit_set.push_back(example(i));
  for (std::size_t i : val_idx) val_set.push_back(example(i));

  Trainable* trainable = nullptr;
  if (mode == PredictorMode::kConcNN) {
    Network s1(B::Dims(4, config.stage1_layers, m), config.hidden, Activation::kLinear, config.seed);
    Network s2(B::Dims(4 + m, config.stage2_layers, m + 1), config.hidden, Activation::kLinear,
               config.seed + 1);
    model.conc_ = ConcModel(std::move(s1), B::ObjectiveHead(spec, config), std::move(s2),
                            B::ScoreHead(m, config));
    trainable = &model.conc_;
  } else {
    Network net(B::Dims(4 + m, config.stage2_layers, m + 1), config.hidden, Activation::kLinear,
                config.seed + 1);
    model.head_ = SingleStageModel(std::move(net), B::ScoreHead(m, config));
    trainable = &model.head_;
  }
  out.report.curves = fit(*trainable, fit_set, val_set, config, on_epoch);
  out.report.mode = mode;
  out.report.train_size = fit_idx.size();
  out.report.validation_size = val_idx.size();
  out.report.test_size = test.size();

  if (mode == PredictorMode::kLutNN) {
    model.lookup_ = B::BuildLookup(samples, train_all, spec);
  }

  struct Flat {
    std::vector<double> y1, y1_hat, y2, y2_hat, metric, metric_hat, y2_hat_true;
  };
  auto collect = [&](const std::vector<std::size_t>& idx) {
    Flat f;
    for (std::size_t i : idx) {
      const auto& s = samples[i];
      if (model.lookup_ && !model.lookup_->has_state(std::llround(s.x[3]))) {
        ++out.report.test_unseen_state;
        continue;
      }
      const auto p = model.Predict(s.x);
      f.y1.insert(f.y1.end(), s.y1.begin(), s.y1.end());
      f.y1_hat.insert(f.y1_hat.end(), p.objectives.begin(), p.objectives.end());
      f.y2.insert(f.y2.end(), s.y2.begin(), s.y2.end());
      f.y2_hat.push_back(p.metric);
      f.y2_hat.insert(f.y2_hat.end(), p.importances.begin(), p.importances.end());
      f.metric.push_back(s.y2[0]);
      f.metric_hat.push_back(p.metric);
      if (mode == PredictorMode::kLutNN) {
        const auto q = model.PredictFromObjectives(s.x, s.y1);
        f.y2_hat_true.push_back(q.metric);
        f.y2_hat_true.insert(f.y2_hat_true.end(), q.importances.begin(), q.importances.end());
      }
    }
    return f;
  };
  const Flat tr = collect(train_all);
  const Flat te = collect(test);
  auto& rep = out.report;
  rep.y1 = {SafeEvaluate(tr.y1, tr.y1_hat), SafeEvaluate(te.y1, te.y1_hat)};
  rep.y2 = {SafeEvaluate(tr.y2, tr.y2_hat), SafeEvaluate(te.y2, te.y2_hat)};
  rep.metric = {SafeEvaluate(tr.metric, tr.metric_hat), SafeEvaluate(te.metric, te.metric_hat)};
  if (mode == PredictorMode::kLutNN) {
    rep.y2_test_true_objectives = SafeEvaluate(te.y2, te.y2_hat_true);
    std::vector<std::size_t> all(samples.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    model.lookup_ = B::BuildLookup(samples, all, spec);
  }
  return out;
}

}  // namespace siterank
