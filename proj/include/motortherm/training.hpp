// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "motortherm/dataset.hpp"
#include "motortherm/errors.hpp"
#include "motortherm/network.hpp"

namespace motortherm {

struct LossAndGradient {
  double loss = 0.0;
  Matrix gradient;  // dLoss/dPredictions
};

/// Mean of squared element errors; gradient 2 (pred - target) / N.
LossAndGradient mse_loss(const Matrix& predictions, const Matrix& targets);

struct AdamHyperParams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators mirror the parameter shapes.
struct AdamState {
  NetworkParams first_moment;
  NetworkParams second_moment;
  std::uint64_t step = 0;
  AdamHyperParams hyper;

  static AdamState fresh(const NetworkParams& params, const AdamHyperParams& hyper = {});
};

/// One bias-corrected Adam update of `params` in place. Throws TrainingError
/// naming the tensor when a gradient entry is non-finite; nothing is modified
/// in that case.
void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state);

struct TrainingConfig {
  NetworkConfig network;
  std::size_t epochs = 300;
  AdamHyperParams adam;
  double dropout = 0.1;
  std::uint64_t seed = 0;
  bool normalize = true;
  /// 0 trains on whole trajectories; otherwise windows of this many rows.
  std::size_t window = 0;
  std::size_t stride = 1;
  /// 0 backpropagates through the whole sequence.
  std::size_t bptt_truncation = 0;
  /// Rescale the gradient when its global L2 norm exceeds this; 0 disables.
  double clip_norm = 0.0;
  /// Stop when the best loss of the last `patience` epochs improves on the
  /// earlier best by less than `min_improvement`. 0 disables early stopping.
  std::size_t patience = 20;
  double min_improvement = 1e-7;
  /// Invoke `on_report` every this many epochs (and on the last one).
  std::size_t report_every = 10;
  std::function<void(std::size_t epoch, double loss)> on_report;

  /// Throws ConfigError on epochs == 0, dropout outside [0, 1), lr <= 0, ...
  void validate() const;
};

struct LossHistory {
  /// Mean per-sequence training loss of each epoch, in the units the network
  /// was trained on (normalized targets when normalization is on).
  std::vector<double> loss;
  /// The same loss expressed in z-scored target units for every run, so runs
  /// with and without normalization can be compared on one scale.
  std::vector<double> scaled_loss;
  std::vector<double> seconds;

  std::size_t epochs() const { return loss.size(); }
};

struct TrainingResult {
  NetworkParams params;
  LossHistory history;
  Normalization normalization;
  bool stopped_early = false;
};

/// Raised when an epoch produces a non-finite loss or gradient. Carries the
/// parameters from the last epoch that finished with a finite loss.
class DivergenceError : public TrainingError {
 public:
  DivergenceError(const std::string& what, NetworkParams last_finite, LossHistory history)
      : TrainingError(what), last_finite_(std::move(last_finite)), history_(std::move(history)) {}

  const NetworkParams& last_finite_params() const { return last_finite_; }
  const LossHistory& history() const { return history_; }

 private:
  NetworkParams last_finite_;
  LossHistory history_;
};

/// Fits a network to `seen` (raw units). Normalization statistics come from
/// `seen` alone. Each epoch visits every sequence once in a seeded shuffled
/// order, one Adam step per sequence. Deterministic in (dataset, config).
TrainingResult train(const SequenceDataset& seen, const TrainingConfig& config);

/// L2 norm over every entry of every tensor.
double global_norm(const NetworkParams& params);

struct GradCheckOptions {
  std::size_t input_size = 7;
  std::size_t hidden_size = 8;
  std::vector<std::size_t> dense_widths{8, 6, 4, 3, 2, 7};
  std::size_t sequence_length = 5;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double tolerance = 1e-4;
  double step = 1e-5;
  /// Test hook applied to the analytic gradient before comparison.
  std::function<void(NetworkParams&)> corrupt;
};

struct GradCheckReport {
  std::vector<double> max_relative_error;  // one per seed
  double worst = 0.0;
  std::string worst_tensor;
  std::size_t checked = 0;
  bool passed = false;
};

/// Compares backward() against central finite differences of
/// L = sum(W .* predictions) for random networks, inputs and weights W.
/// Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport gradient_check_suite(const GradCheckOptions& options = {});

}  // namespace motortherm
