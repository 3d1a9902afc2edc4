// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "motortherm/dataset.hpp"
#include "motortherm/metrics.hpp"
#include "motortherm/network.hpp"

namespace motortherm {

struct JointMetrics {
  std::size_t joint = 0;  // 1-based motor number
  double rmse = 0.0;           // degC
  double max_abs_error = 0.0;  // degC
  std::size_t samples = 0;
};

struct SequenceMetrics {
  std::string id;
  std::vector<JointMetrics> joints;
};

struct EvaluationReport {
  Partition tag = Partition::Unseen;
  std::string model_id;
  std::string stats_id;
  /// Aggregated over every sequence of the partition, one entry per joint.
  std::vector<JointMetrics> joints;
  std::vector<SequenceMetrics> sequences;

  /// Throws std::logic_error if any rmse exceeds its max_abs_error.
  void check_invariants() const;
};

/// Column-wise metrics of two equally shaped matrices.
std::vector<JointMetrics> joint_metrics(const Matrix& predictions, const Matrix& truth);

/// Dropout-free predictions reconstructed to degC for every sequence.
std::vector<Matrix> predict_temperatures(const NetworkParams& params, const Normalization& norm,
                                         const SequenceDataset& dataset);

/// Metrics of externally produced degC predictions against `dataset` targets.
EvaluationReport evaluate_predictions(const std::vector<Matrix>& predictions, const SequenceDataset& dataset);

/// Forward without dropout, denormalize, then per-joint metrics in degC.
EvaluationReport evaluate_model(const NetworkParams& params, const Normalization& norm,
                                const SequenceDataset& dataset, std::string model_id = {},
                                std::string stats_id = {});

std::string report_to_json(const EvaluationReport& report);
/// One row per motor: per-run rmse and maxae columns, then the aggregate.
std::string report_table_csv(const EvaluationReport& report);

struct PredictionTraces {
  Vector time;
  Matrix truth;
  Matrix predictions;
};

/// Writes `<prefix>.csv` (t, truth_1..n, pred_1..n) and one SVG overlay per
/// joint, `<prefix>_joint<j>.svg`. Empty traces give a header-only CSV and no
/// plots. Returns the written paths, CSV first.
std::vector<std::filesystem::path> emit_prediction_artifacts(const Matrix& predictions, const Matrix& truth,
                                                             double dt, const std::filesystem::path& prefix);

PredictionTraces read_prediction_csv(const std::filesystem::path& path);

}  // namespace motortherm
