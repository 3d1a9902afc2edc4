// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motortherm/linalg.hpp"
#include "motortherm/thermal_plant.hpp"

namespace motortherm {

using JointVector = std::array<double, kJointCount>;

/// One telemetry sample of the whole arm.
struct JointStateRecord {
  double timestamp = 0.0;  // s
  JointVector position{};  // rad
  JointVector velocity{};  // rad/s
  JointVector torque{};    // N m
  JointVector current{};   // A
  JointVector temperature{};  // degC

  bool operator==(const JointStateRecord&) const = default;
};

/// CSV header: t, pos_1..7, vel_1..7, tau_1..7, cur_1..7, temp_1..7.
std::string record_csv_header();
inline constexpr std::size_t kRecordColumns = 1 + 5 * kJointCount;

/// Parses a dataset CSV. Throws ParseError (with line number) on malformed
/// rows and DataError when timestamps are not strictly increasing.
std::vector<JointStateRecord> read_records(const std::filesystem::path& path);

/// Writes values in shortest round-trip form so read_records inverts it exactly.
void write_records(std::span<const JointStateRecord> records, const std::filesystem::path& path);

/// Which channel groups feed the network. Torque only by default.
struct FeatureSelection {
  bool position = false;
  bool velocity = false;
  bool torque = true;
  bool current = false;

  std::size_t group_count() const;
  std::size_t width() const { return group_count() * kJointCount; }
  /// Throws ConfigError if no group is selected.
  void validate() const;

  /// Comma-separated group names in column order, e.g. "position,torque".
  std::string to_string() const;
  static FeatureSelection parse(std::string_view spec);
  static FeatureSelection all() { return {true, true, true, true}; }

  bool operator==(const FeatureSelection&) const = default;
};

/// Columns ordered position, velocity, torque, current; joints ascending in
/// each group.
Matrix select_features(std::span<const JointStateRecord> records, const FeatureSelection& selection);

/// Temperature columns (time x joints).
Matrix temperature_matrix(std::span<const JointStateRecord> records);

inline constexpr double kStdFloor = 1e-8;

/// Per-channel z-score statistics (population standard deviation).
struct NormStats {
  Vector mean;
  Vector std;

  std::size_t channels() const { return static_cast<std::size_t>(mean.size()); }
  static NormStats identity(std::size_t channels);
};

NormStats compute_norm_stats(const Matrix& matrix);
/// Stacks the rows of every matrix before computing statistics.
NormStats compute_norm_stats(std::span<const Matrix> matrices);

Matrix normalize(const Matrix& matrix, const NormStats& stats);
/// x = x_norm * sigma + mu.
Matrix denormalize(const Matrix& matrix, const NormStats& stats);

/// Statistics stored alongside a trained model. When disabled, both stat
/// sets are identities and (de)normalization is a no-op.
struct Normalization {
  bool enabled = true;
  NormStats input;
  NormStats target;
};

enum class Partition { Seen, Unseen };
std::string_view to_string(Partition tag);
Partition parse_partition(std::string_view name);

/// Aligned input/target sequences, one pair per trajectory (or window).
struct SequenceDataset {
  std::vector<Matrix> inputs;
  std::vector<Matrix> targets;
  std::vector<std::string> ids;
  Partition tag = Partition::Seen;
  double dt = 1.0;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
  std::size_t feature_width() const;
  /// Throws DataError on misaligned or ragged members.
  void validate() const;
};

/// One recorded run after feature selection.
struct Trajectory {
  std::string id;
  Matrix inputs;
  Matrix targets;
  double dt = 1.0;
};

Trajectory make_trajectory(std::string id, std::span<const JointStateRecord> records,
                           const FeatureSelection& selection);

/// Overlapping windows of `window_len` rows taken every `stride` rows. Window
/// ids are "<id>#<start row>".
SequenceDataset window_sequences(const Matrix& inputs, const Matrix& targets,
                                 std::size_t window_len, std::size_t stride,
                                 const std::string& id = "seq");

/// Windows every member of `dataset`; tag and dt carry over.
SequenceDataset window_dataset(const SequenceDataset& dataset, std::size_t window_len,
                               std::size_t stride);

struct SeenUnseenSplit {
  SequenceDataset seen;
  SequenceDataset unseen;
  std::optional<std::string> warning;
};

/// Partitions whole trajectories by id. Throws ConfigError for unknown ids.
SeenUnseenSplit split_seen_unseen(std::span<const Trajectory> trajectories,
                                  const std::set<std::string>& unseen_ids);

}  // namespace motortherm
