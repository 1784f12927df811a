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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "siterank/dataset.hpp"
#include "siterank/errors.hpp"
#include "siterank/lookup.hpp"
#include "siterank/metrics.hpp"
#include "siterank/network.hpp"
#include "siterank/ranking.hpp"

namespace siterank {

// Loss went non-finite during training.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : Error("training diverged at epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

// Per-column affine standardization. Columns with zero spread, and columns
// marked as passthrough, keep scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer Fit(std::span<const double> rows, std::size_t width,
                          const std::vector<bool>& passthrough = {});
  std::size_t width() const { return mean.size(); }
  std::vector<double> Apply(std::span<const double> row) const;
  std::vector<double> Invert(std::span<const double> row) const;
};

// Inputs and targets in model space.
struct TrainingExample {
  std::vector<double> x;
  std::vector<double> target;
};

// Anything with a flat parameter vector and a differentiable per-example loss.
class Trainable {
 public:
  virtual ~Trainable() = default;
  virtual std::size_t parameter_count() const = 0;
  virtual std::vector<double> Parameters() const = 0;
  virtual void SetParameters(std::span<const double> params) = 0;
  // Number of loss buckets reported through `parts`.
  virtual std::size_t part_count() const = 0;
  // Loss for one example. Adds dLoss/dparam into `grad` when it is non-empty
  // and per-bucket losses into `parts` when it is non-empty.
  virtual double Loss(const TrainingExample& example, std::span<double> grad,
                      std::span<double> parts) const = 0;
};

// One network followed by an output head.
class SingleStageModel : public Trainable {
 public:
  SingleStageModel() = default;
  SingleStageModel(Network net, Head head);

  std::size_t parameter_count() const override { return net_.parameter_count(); }
  std::vector<double> Parameters() const override { return net_.Parameters(); }
  void SetParameters(std::span<const double> params) override { net_.SetParameters(params); }
  std::size_t part_count() const override;
  double Loss(const TrainingExample& example, std::span<double> grad,
              std::span<double> parts) const override;

  std::vector<double> Predict(std::span<const double> x) const;
  const Network& network() const { return net_; }
  const Head& head() const { return head_; }

 private:
  Network net_;
  Head head_;
};

// Two chained networks. Stage 1 maps x to y1; stage 2 sees x concatenated
// with stage 1's transformed output and predicts y2. Targets are y1 followed
// by y2, and the stage-2 loss backpropagates into stage 1.
class ConcModel : public Trainable {
 public:
  ConcModel() = default;
  ConcModel(Network stage1, Head head1, Network stage2, Head head2);

  std::size_t parameter_count() const override;
  std::vector<double> Parameters() const override;
  void SetParameters(std::span<const double> params) override;
  std::size_t part_count() const override;
  double Loss(const TrainingExample& example, std::span<double> grad,
              std::span<double> parts) const override;

  // Returns (y1, y2) after the head transforms.
  std::pair<std::vector<double>, std::vector<double>> Predict(std::span<const double> x) const;

  const Network& stage1() const { return stage1_; }
  const Network& stage2() const { return stage2_; }
  const Head& head1() const { return head1_; }
  const Head& head2() const { return head2_; }

 private:
  Network stage1_;
  Head head1_;
  Network stage2_;
  Head head2_;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_parameter = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares the analytic gradient with centered differences for every
// parameter. Relative error is |a - n| / max(|a|, |n|, 1e-6). Parameters are
// restored before returning. epsilon must lie in [1e-6, 1e-3].
GradientCheckResult gradient_check(Trainable& model, const TrainingExample& example,
                                   double epsilon = 1e-5);

struct TrainConfig {
  std::vector<std::size_t> stage1_layers;  // hidden widths, ConcNN only
  std::vector<std::size_t> stage2_layers;  // hidden widths of the score head
  Activation hidden = Activation::kLeakyRelu;
  double learning_rate = 1e-3;
  double decay = 1.0;             // learning rate multiplier
  std::size_t decay_every = 1;    // epochs between decays
  std::size_t epochs = 2000;
  std::size_t batch_size = 256;
  std::size_t patience = 0;       // 0 disables early stopping
  double min_delta = 0.0;
  double test_fraction = 0.2;
  double validation_fraction = 0.1;  // carved from the training part
  double weight_l = 1.0;
  double weight_b = 1.0;
  double weight_2 = 1.0;
  std::uint64_t seed = 0;

  static TrainConfig ConcNNDefaults();
  static TrainConfig LutNNDefaults();
};

struct TrainingCurves {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;  // empty without a validation set
  std::vector<double> learning_rate;
  std::vector<std::vector<double>> train_parts;  // per epoch, per bucket
  std::size_t best_epoch = 0;                    // 1-based
  bool stopped_early = false;
};

// Mini-batch Adam on the mean example loss. The learning rate is multiplied
// by config.decay every config.decay_every epochs. With a validation set and
// patience > 0, training halts after `patience` epochs without improvement
// and the best parameters are restored. Throws DivergenceError when a loss
// becomes non-finite.
TrainingCurves fit(Trainable& model, const std::vector<TrainingExample>& train,
                   const std::vector<TrainingExample>& validation, const TrainConfig& config,
                   const std::function<void(std::size_t, double)>& on_epoch = {});

double mean_loss(const Trainable& model, const std::vector<TrainingExample>& examples,
                 std::span<double> parts = {});

// One site: location inputs, raw objectives, and (metric, importances...).
struct PredictorSample {
  std::string site_id;
  std::array<double, 4> x{};  // longitude, latitude, county_fips, state_fips
  std::vector<double> y1;
  std::vector<double> y2;
};

// Joins raw site records with a complete ranking. Sites removed by dedup take
// their representative's scores.
std::vector<PredictorSample> make_samples(const SiteTable& table, const RankResult& result);

// Deterministic train/test partition of 0..n-1 from the seed. Both parts are
// nonempty when n >= 2.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double test_fraction, std::uint64_t seed);

enum class PredictorMode { kConcNN, kLutNN };

std::string ToString(PredictorMode mode);
PredictorMode ParsePredictorMode(const std::string& name);

struct Prediction {
  std::vector<double> objectives;  // raw units, binaries rounded
  double metric = 0.0;
  std::vector<double> importances;  // nonnegative, sums to 1
};

struct TrainedPredictor;

class PredictorModel {
 public:
  PredictorModel() = default;

  PredictorMode mode() const { return mode_; }
  const ObjectiveSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  const Standardizer& x_standardizer() const { return x_std_; }
  const Standardizer& y1_standardizer() const { return y1_std_; }
  const std::optional<LookupTable>& lookup() const { return lookup_; }

  Prediction Predict(std::span<const double> x) const;
  // Stage-2 prediction from a given raw objective vector (LUT-NN only).
  Prediction PredictFromObjectives(std::span<const double> x,
                                   std::span<const double> objectives) const;

  // Writes model.bin, plus lookup.bin in LUT-NN mode.
  void Save(const std::filesystem::path& dir) const;
  static PredictorModel Load(const std::filesystem::path& dir);

 private:
  friend struct PredictorBuilder;
  friend TrainedPredictor train_predictor(const std::vector<PredictorSample>&,
                                          const ObjectiveSpec&, PredictorMode,
                                          const TrainConfig&,
                                          const std::function<void(std::size_t, double)>&);

  PredictorMode mode_ = PredictorMode::kConcNN;
  ObjectiveSpec spec_;
  std::uint64_t seed_ = 0;
  Standardizer x_std_;
  Standardizer y1_std_;
  ConcModel conc_;
  SingleStageModel head_;
  std::optional<LookupTable> lookup_;
};

struct SplitMetrics {
  EvalMetrics train;
  EvalMetrics test;
};

struct TrainReport {
  PredictorMode mode = PredictorMode::kConcNN;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  std::size_t test_size = 0;
  TrainingCurves curves;
  SplitMetrics y1;  // raw units, flattened over all objectives
  SplitMetrics y2;  // flattened over metric and importances
  SplitMetrics metric;  // siting metric alone
  // LUT-NN only: Y2 on the test split when stage 2 sees the true objectives
  // instead of interpolated ones.
  std::optional<EvalMetrics> y2_test_true_objectives;
  // LUT-NN only: test sites in states without a training site. The lookup
  // cannot answer them, so they are left out of the test metrics.
  std::size_t test_unseen_state = 0;
};

struct TrainedPredictor {
  PredictorModel model;
  TrainReport report;
};

// Splits, standardizes, trains and evaluates. In LUT-NN mode the lookup used
// for test metrics holds only the training sites; the returned model's lookup
// holds every sample.
TrainedPredictor train_predictor(const std::vector<PredictorSample>& samples,
                                 const ObjectiveSpec& spec, PredictorMode mode,
                                 const TrainConfig& config,
                                 const std::function<void(std::size_t, double)>& on_epoch = {});

}  // namespace siterank
