// SPDX-License-Identifier: Apache-2.0
#include "motortherm/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "motortherm/errors.hpp"
#include "text_util.hpp"

namespace motortherm {
namespace {

constexpr std::array<std::string_view, 5> kGroupPrefixes = {"pos", "vel", "tau", "cur", "temp"};

void check_equal_widths(const Matrix& matrix, const NormStats& stats) {
  if (static_cast<std::size_t>(matrix.cols()) != stats.channels() ||
      stats.std.size() != stats.mean.size()) {
    throw ConfigError("normalization width mismatch: matrix has " +
                      std::to_string(matrix.cols()) + " columns, stats have " +
                      std::to_string(stats.channels()));
  }
}

}  // namespace

std::string record_csv_header() {
  std::string header = "t";
  for (auto prefix : kGroupPrefixes) {
    for (std::size_t j = 1; j <= kJointCount; ++j) {
      header += ',';
      header += prefix;
      header += '_';
      header += std::to_string(j);
    }
  }
  return header;
}

std::vector<JointStateRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing CSV header", 1);
  if (detail::trim(line) != record_csv_header()) {
    throw ParseError("unexpected CSV header in " + path.string(), 1);
  }

  std::vector<JointStateRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = detail::split(trimmed, ',');
    if (fields.size() != kRecordColumns) {
      throw ParseError("expected " + std::to_string(kRecordColumns) + " columns, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    std::array<double, kRecordColumns> values{};
    for (std::size_t i = 0; i < kRecordColumns; ++i) {
      const auto v = detail::parse_double(fields[i]);
      if (!v) throw ParseError("malformed number '" + std::string(fields[i]) + "'", line_no);
      if (!std::isfinite(*v)) throw ParseError("non-finite value in column " + std::to_string(i + 1), line_no);
      values[i] = *v;
    }
    JointStateRecord r;
    r.timestamp = values[0];
    for (std::size_t j = 0; j < kJointCount; ++j) {
      r.position[j] = values[1 + j];
      r.velocity[j] = values[1 + kJointCount + j];
      r.torque[j] = values[1 + 2 * kJointCount + j];
      r.current[j] = values[1 + 3 * kJointCount + j];
      r.temperature[j] = values[1 + 4 * kJointCount + j];
    }
    if (!records.empty() && !(r.timestamp > records.back().timestamp)) {
      throw DataError("timestamps not strictly increasing at line " + std::to_string(line_no) +
                      " of " + path.string());
    }
    records.push_back(r);
  }
  return records;
}

void write_records(std::span<const JointStateRecord> records, const std::filesystem::path& path) {
  std::string text = record_csv_header();
  text += '\n';
  for (const auto& r : records) {
    detail::append_double(text, r.timestamp);
    for (const auto* group : {&r.position, &r.velocity, &r.torque, &r.current, &r.temperature}) {
      for (double v : *group) {
        text += ',';
        detail::append_double(text, v);
      }
    }
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write dataset file " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::size_t FeatureSelection::group_count() const {
  return static_cast<std::size_t>(position) + velocity + torque + current;
}

void FeatureSelection::validate() const {
  if (group_count() == 0) throw ConfigError("feature selection is empty");
}

std::string FeatureSelection::to_string() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(position, "position");
  add(velocity, "velocity");
  add(torque, "torque");
  add(current, "current");
  return out;
}

FeatureSelection FeatureSelection::parse(std::string_view spec) {
  FeatureSelection sel{false, false, false, false};
  for (auto part : detail::split(spec, ',')) {
    part = detail::trim(part);
    if (part.empty()) continue;
    if (part == "position" || part == "pos") {
      sel.position = true;
    } else if (part == "velocity" || part == "vel") {
      sel.velocity = true;
    } else if (part == "torque" || part == "tau") {
      sel.torque = true;
    } else if (part == "current" || part == "cur") {
      sel.current = true;
    } else if (part == "all") {
      sel = all();
    } else {
      throw ConfigError("unknown feature group '" + std::string(part) + "'");
    }
  }
  sel.validate();
  return sel;
}

Matrix select_features(std::span<const JointStateRecord> records, const FeatureSelection& selection) {
  selection.validate();
  Matrix out(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(selection.width()));
  for (std::size_t row = 0; row < records.size(); ++row) {
    const auto& r = records[row];
    Eigen::Index col = 0;
    auto put = [&](bool on, const JointVector& values) {
      if (!on) return;
      for (double v : values) out(static_cast<Eigen::Index>(row), col++) = v;
    };
    put(selection.position, r.position);
    put(selection.velocity, r.velocity);
    put(selection.torque, r.torque);
    put(selection.current, r.current);
  }
  return out;
}

Matrix temperature_matrix(std::span<const JointStateRecord> records) {
  Matrix out(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(kJointCount));
  for (std::size_t row = 0; row < records.size(); ++row) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = records[row].temperature[j];
    }
  }
  return out;
}

NormStats NormStats::identity(std::size_t channels) {
  const auto n = static_cast<Eigen::Index>(channels);
  return {Vector::Zero(n), Vector::Ones(n)};
}

NormStats compute_norm_stats(const Matrix& matrix) {
  const Matrix* single = &matrix;
  return compute_norm_stats(std::span<const Matrix>(single, 1));
}

NormStats compute_norm_stats(std::span<const Matrix> matrices) {
  if (matrices.empty()) throw ConfigError("cannot compute statistics of an empty matrix");
  const Eigen::Index cols = matrices.front().cols();
  Eigen::Index rows = 0;
  for (const auto& m : matrices) {
    if (m.cols() != cols) throw ConfigError("matrices differ in column count");
    rows += m.rows();
  }
  if (rows == 0 || cols == 0) throw ConfigError("cannot compute statistics of an empty matrix");

  NormStats stats;
  stats.mean = Vector::Zero(cols);
  for (const auto& m : matrices) stats.mean += m.colwise().sum().transpose();
  stats.mean /= static_cast<double>(rows);

  stats.std = Vector::Zero(cols);
  for (const auto& m : matrices) {
    stats.std += (m.rowwise() - stats.mean.transpose()).array().square().colwise().sum().matrix().transpose();
  }
  stats.std = (stats.std / static_cast<double>(rows)).cwiseSqrt();
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (!(stats.std(c) >= kStdFloor)) stats.std(c) = kStdFloor;
  }
  return stats;
}

Matrix normalize(const Matrix& matrix, const NormStats& stats) {
  check_equal_widths(matrix, stats);
  Matrix out = matrix;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    out.col(c) = (out.col(c).array() - stats.mean(c)) / stats.std(c);
  }
  return out;
}

Matrix denormalize(const Matrix& matrix, const NormStats& stats) {
  check_equal_widths(matrix, stats);
  Matrix out = matrix;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    out.col(c) = out.col(c).array() * stats.std(c) + stats.mean(c);
  }
  return out;
}

std::string_view to_string(Partition tag) {
  return tag == Partition::Seen ? "seen" : "unseen";
}

Partition parse_partition(std::string_view name) {
  if (name == "seen") return Partition::Seen;
  if (name == "unseen") return Partition::Unseen;
  throw ConfigError("partition must be 'seen' or 'unseen', got '" + std::string(name) + "'");
}

std::size_t SequenceDataset::feature_width() const {
  return inputs.empty() ? 0 : static_cast<std::size_t>(inputs.front().cols());
}

void SequenceDataset::validate() const {
  if (inputs.size() != targets.size() || inputs.size() != ids.size()) {
    throw DataError("dataset members are misaligned");
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].rows() != targets[i].rows()) {
      throw DataError("sequence '" + ids[i] + "' has " + std::to_string(inputs[i].rows()) +
                      " input rows but " + std::to_string(targets[i].rows()) + " target rows");
    }
    if (inputs[i].rows() == 0) throw DataError("sequence '" + ids[i] + "' is empty");
    if (inputs[i].cols() != inputs.front().cols() || targets[i].cols() != targets.front().cols()) {
      throw DataError("sequence '" + ids[i] + "' differs in width from the first sequence");
    }
  }
}

Trajectory make_trajectory(std::string id, std::span<const JointStateRecord> records,
                           const FeatureSelection& selection) {
  Trajectory t;
  t.id = std::move(id);
  t.inputs = select_features(records, selection);
  t.targets = temperature_matrix(records);
  if (records.size() >= 2) t.dt = records[1].timestamp - records[0].timestamp;
  return t;
}

SequenceDataset window_sequences(const Matrix& inputs, const Matrix& targets,
                                 std::size_t window_len, std::size_t stride,
                                 const std::string& id) {
  if (window_len < 1 || stride < 1) throw ConfigError("window length and stride must be >= 1");
  if (inputs.rows() != targets.rows()) throw ConfigError("inputs and targets differ in length");
  const auto len = static_cast<std::size_t>(inputs.rows());
  if (window_len > len) {
    throw ConfigError("window length " + std::to_string(window_len) +
                      " exceeds sequence length " + std::to_string(len));
  }
  SequenceDataset out;
  for (std::size_t start = 0; start + window_len <= len; start += stride) {
    const auto s = static_cast<Eigen::Index>(start);
    const auto w = static_cast<Eigen::Index>(window_len);
    out.inputs.emplace_back(inputs.middleRows(s, w));
    out.targets.emplace_back(targets.middleRows(s, w));
    out.ids.push_back(id + "#" + std::to_string(start));
  }
  return out;
}

SequenceDataset window_dataset(const SequenceDataset& dataset, std::size_t window_len,
                               std::size_t stride) {
  SequenceDataset out;
  out.tag = dataset.tag;
  out.dt = dataset.dt;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    auto part = window_sequences(dataset.inputs[i], dataset.targets[i], window_len, stride, dataset.ids[i]);
    for (std::size_t w = 0; w < part.size(); ++w) {
      out.inputs.push_back(std::move(part.inputs[w]));
      out.targets.push_back(std::move(part.targets[w]));
      out.ids.push_back(std::move(part.ids[w]));
    }
  }
  return out;
}

SeenUnseenSplit split_seen_unseen(std::span<const Trajectory> trajectories,
                                  const std::set<std::string>& unseen_ids) {
  std::set<std::string> known;
  for (const auto& t : trajectories) {
    if (!known.insert(t.id).second) throw ConfigError("duplicate trajectory id '" + t.id + "'");
  }
  for (const auto& id : unseen_ids) {
    if (!known.contains(id)) throw ConfigError("unknown trajectory id '" + id + "'");
  }

  SeenUnseenSplit split;
  split.seen.tag = Partition::Seen;
  split.unseen.tag = Partition::Unseen;
  for (const auto& t : trajectories) {
    auto& part = unseen_ids.contains(t.id) ? split.unseen : split.seen;
    part.inputs.push_back(t.inputs);
    part.targets.push_back(t.targets);
    part.ids.push_back(t.id);
    part.dt = t.dt;
  }
  if (split.seen.empty() && !trajectories.empty()) {
    split.warning = "every trajectory is marked unseen; the seen partition is empty";
  }
  return split;
}

}  // namespace motortherm
