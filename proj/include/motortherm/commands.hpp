// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "motortherm/evaluation.hpp"
#include "motortherm/gauss2.hpp"
#include "motortherm/model_io.hpp"
#include "motortherm/training.hpp"

namespace motortherm {

namespace fs = std::filesystem;

struct SimulateOptions {
  fs::path out_dir = "data";
  std::size_t count = 18;
  /// The last `unseen` trajectories are listed as held out in the manifest.
  std::size_t unseen = 2;
  std::uint64_t seed = 42;
  double duration = 900.0;
  double dt = 1.0;
  std::string profile = "composite";
  double temperature_noise = 0.0;
};

struct SimulateResult {
  std::vector<fs::path> files;
  fs::path manifest;
  std::vector<std::string> unseen_ids;
};

/// Writes `count` dataset CSVs named traj_NN.csv and manifest.json.
SimulateResult cmd_simulate(const SimulateOptions& options, std::ostream& log);

struct TrainOptions {
  std::vector<fs::path> data;
  /// Trajectory ids (file stems) withheld from training. When empty and a
  /// data directory holds a manifest, its unseen list is used.
  std::vector<std::string> unseen;
  std::string features = "torque";
  std::size_t hidden = 32;
  std::vector<std::size_t> dense{32, 24, 16, 12, 8, 7};
  std::vector<std::string> activations;  // empty: tanh, elu, sigmoid, ... identity
  double learning_rate = 1e-3;
  std::size_t epochs = 300;
  double dropout = 0.1;
  std::uint64_t seed = 0;
  bool normalize = true;
  std::size_t window = 0;
  std::size_t stride = 1;
  std::size_t bptt = 0;
  double clip_norm = 0.0;
  std::size_t patience = 20;
  std::size_t report_every = 10;
  fs::path out = "model.json";
  /// Defaults: <out stem>_loss.csv and <out stem>_stats.json next to the model.
  fs::path loss_out;
  fs::path stats_out;
};

struct TrainRunResult {
  TrainingResult training;
  ModelBundle model;
  fs::path model_path, loss_path, stats_path;
  std::vector<std::string> seen_ids, unseen_ids;
};

TrainRunResult cmd_train(const TrainOptions& options, std::ostream& log);

/// "epoch,loss" rows, epochs counted from 1.
std::string loss_history_csv(const LossHistory& history);

struct PredictOptions {
  fs::path model;
  std::vector<fs::path> data;
  fs::path out_prefix = "pred";
  /// Overrides the model's feature selection; must produce the model's input width.
  std::string features;
};

/// Per input file: <prefix>_<id>.csv plus one overlay plot per joint.
std::vector<fs::path> cmd_predict(const PredictOptions& options, std::ostream& log);

struct EvaluateOptions {
  fs::path model;
  std::vector<fs::path> data;
  std::string partition = "unseen";
  fs::path out_prefix = "eval";
  bool artifacts = true;
};

/// Writes <prefix>_report.json, <prefix>_table.csv and per-run artifacts.
EvaluationReport cmd_evaluate(const EvaluateOptions& options, std::ostream& log);

struct FitGauss2Options {
  fs::path input;
  fs::path out_prefix = "gauss2";
  /// "a1,b1,c1,a2,b2,c2"; empty for automatic initialization.
  std::string init;
};

/// Reads an (x, temperature) CSV; writes <prefix>.json and <prefix>.svg.
Gauss2FitReport cmd_fit_gauss2(const FitGauss2Options& options, std::ostream& log);

std::vector<Gauss2Sample> read_xy_csv(const fs::path& path);
std::string fit_report_json(const Gauss2FitReport& report);

struct VerifyOptions {
  std::uint64_t seed = 0;
};

struct VerifySummary {
  std::vector<std::pair<std::string, bool>> checks;
  bool ok() const;
};

/// Gradient check, normalization round-trip and plant-vs-closed-form suites.
VerifySummary cmd_verify(const VerifyOptions& options, std::ostream& log);

/// Expands directories to their *.csv files (sorted); files pass through.
std::vector<fs::path> expand_data_paths(const std::vector<fs::path>& inputs);

/// Full command line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace motortherm
