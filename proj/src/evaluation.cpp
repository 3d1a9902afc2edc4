// SPDX-License-Identifier: Apache-2.0
#include "motortherm/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "motortherm/errors.hpp"
#include "motortherm/svg_plot.hpp"
#include "text_util.hpp"

namespace motortherm {
namespace {

std::vector<double> column(const Matrix& m, Eigen::Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

Matrix stack_rows(const std::vector<Matrix>& parts) {
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Matrix out(rows, parts.empty() ? 0 : parts.front().cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p;
    at += p.rows();
  }
  return out;
}

nlohmann::json metrics_json(const std::vector<JointMetrics>& joints) {
  auto arr = nlohmann::json::array();
  for (const auto& m : joints) {
    arr.push_back({{"motor", m.joint}, {"rmse", m.rmse}, {"max_abs_error", m.max_abs_error}, {"samples", m.samples}});
  }
  return arr;
}

}  // namespace

void EvaluationReport::check_invariants() const {
  auto check = [](const JointMetrics& m, const std::string& where) {
    // sqrt(mean) may round one ulp above an all-equal error.
    if (!(m.rmse >= 0.0) || m.rmse > m.max_abs_error * (1.0 + 4e-16) + 1e-300) {
      throw std::logic_error("metric invariant violated for motor " + std::to_string(m.joint) + where +
                             ": rmse " + detail::format_double(m.rmse) + " > maxae " +
                             detail::format_double(m.max_abs_error));
    }
  };
  for (const auto& m : joints) check(m, "");
  for (const auto& s : sequences) {
    for (const auto& m : s.joints) check(m, " in sequence '" + s.id + "'");
  }
}

std::vector<JointMetrics> joint_metrics(const Matrix& predictions, const Matrix& truth) {
  if (predictions.rows() != truth.rows() || predictions.cols() != truth.cols()) {
    throw ConfigError("prediction and truth shapes differ");
  }
  std::vector<JointMetrics> out;
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    const auto p = column(predictions, c);
    const auto t = column(truth, c);
    out.push_back({static_cast<std::size_t>(c) + 1, rmse(p, t), max_abs_error(p, t), t.size()});
  }
  return out;
}

std::vector<Matrix> predict_temperatures(const NetworkParams& params, const Normalization& norm,
                                         const SequenceDataset& dataset) {
  dataset.validate();
  if (dataset.feature_width() != params.lstm.input_size()) {
    throw ConfigError("input width mismatch: model expects " + std::to_string(params.lstm.input_size()) +
                      " features, dataset has " + std::to_string(dataset.feature_width()));
  }
  std::vector<Matrix> out;
  out.reserve(dataset.size());
  for (const auto& input : dataset.inputs) {
    out.push_back(denormalize(predict(params, normalize(input, norm.input)), norm.target));
  }
  return out;
}

EvaluationReport evaluate_predictions(const std::vector<Matrix>& predictions, const SequenceDataset& dataset) {
  if (predictions.size() != dataset.size()) throw ConfigError("one prediction per sequence is required");
  if (dataset.empty()) throw ConfigError("cannot evaluate an empty dataset");
  EvaluationReport report;
  report.tag = dataset.tag;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    report.sequences.push_back({dataset.ids[i], joint_metrics(predictions[i], dataset.targets[i])});
  }
  report.joints = joint_metrics(stack_rows(predictions), stack_rows(dataset.targets));
  report.check_invariants();
  return report;
}

EvaluationReport evaluate_model(const NetworkParams& params, const Normalization& norm,
                                const SequenceDataset& dataset, std::string model_id, std::string stats_id) {
  auto report = evaluate_predictions(predict_temperatures(params, norm, dataset), dataset);
  report.model_id = std::move(model_id);
  report.stats_id = std::move(stats_id);
  return report;
}

std::string report_to_json(const EvaluationReport& report) {
  nlohmann::json j;
  j["format"] = "motortherm-evaluation/1";
  j["partition"] = std::string(to_string(report.tag));
  j["model_id"] = report.model_id;
  j["stats_id"] = report.stats_id;
  j["units"] = "degC";
  j["joints"] = metrics_json(report.joints);
  auto seqs = nlohmann::json::array();
  for (const auto& s : report.sequences) seqs.push_back({{"id", s.id}, {"joints", metrics_json(s.joints)}});
  j["sequences"] = seqs;
  return j.dump(2) + "\n";
}

std::string report_table_csv(const EvaluationReport& report) {
  std::string out = "motor";
  for (const auto& s : report.sequences) out += ",rmse_" + s.id;
  for (const auto& s : report.sequences) out += ",maxae_" + s.id;
  out += ",rmse_all,maxae_all\n";
  for (std::size_t j = 0; j < report.joints.size(); ++j) {
    out += std::to_string(report.joints[j].joint);
    for (const auto& s : report.sequences) {
      out += ',';
      detail::append_double(out, s.joints[j].rmse);
    }
    for (const auto& s : report.sequences) {
      out += ',';
      detail::append_double(out, s.joints[j].max_abs_error);
    }
    out += ',';
    detail::append_double(out, report.joints[j].rmse);
    out += ',';
    detail::append_double(out, report.joints[j].max_abs_error);
    out += '\n';
  }
  return out;
}

std::vector<std::filesystem::path> emit_prediction_artifacts(const Matrix& predictions, const Matrix& truth,
                                                             double dt, const std::filesystem::path& prefix) {
  if (predictions.rows() != truth.rows() || predictions.cols() != truth.cols()) {
    throw ConfigError("prediction and truth traces are not aligned");
  }
  const Eigen::Index joints = truth.size() == 0 ? static_cast<Eigen::Index>(kJointCount) : truth.cols();

  std::string csv = "t";
  for (Eigen::Index j = 1; j <= joints; ++j) csv += ",truth_" + std::to_string(j);
  for (Eigen::Index j = 1; j <= joints; ++j) csv += ",pred_" + std::to_string(j);
  csv += '\n';
  for (Eigen::Index r = 0; r < truth.rows(); ++r) {
    detail::append_double(csv, static_cast<double>(r) * dt);
    for (Eigen::Index j = 0; j < joints; ++j) {
      csv += ',';
      detail::append_double(csv, truth(r, j));
    }
    for (Eigen::Index j = 0; j < joints; ++j) {
      csv += ',';
      detail::append_double(csv, predictions(r, j));
    }
    csv += '\n';
  }

  std::vector<std::filesystem::path> written;
  auto csv_path = prefix;
  csv_path += ".csv";
  write_text(csv_path, csv);
  written.push_back(csv_path);
  if (truth.rows() == 0) return written;

  std::vector<double> time(static_cast<std::size_t>(truth.rows()));
  for (std::size_t k = 0; k < time.size(); ++k) time[k] = static_cast<double>(k) * dt;
  for (Eigen::Index j = 0; j < joints; ++j) {
    LinePlot plot;
    plot.title = "Motor " + std::to_string(j + 1) + " temperature";
    plot.x_label = "time [s]";
    plot.y_label = "temperature [degC]";
    plot.x = time;
    plot.series.push_back({"ground truth", "#1f77b4", column(truth, j), false});
    plot.series.push_back({"prediction", "#d62728", column(predictions, j), true});
    auto svg_path = prefix;
    svg_path += "_joint" + std::to_string(j + 1) + ".svg";
    write_svg(plot, svg_path);
    written.push_back(svg_path);
  }
  return written;
}

PredictionTraces read_prediction_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const auto header = detail::split(detail::trim(line), ',');
  if (header.size() < 3 || (header.size() - 1) % 2 != 0 || header[0] != "t") {
    throw ParseError("unexpected prediction CSV header", 1);
  }
  const std::size_t joints = (header.size() - 1) / 2;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = detail::split(trimmed, ',');
    if (fields.size() != header.size()) throw ParseError("wrong column count", line_no);
    std::vector<double> row;
    for (auto f : fields) {
      const auto v = detail::parse_double(f);
      if (!v) throw ParseError("malformed number '" + std::string(f) + "'", line_no);
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  PredictionTraces traces;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto jn = static_cast<Eigen::Index>(joints);
  traces.time.resize(n);
  traces.truth.resize(n, jn);
  traces.predictions.resize(n, jn);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    traces.time(r) = row[0];
    for (Eigen::Index j = 0; j < jn; ++j) {
      traces.truth(r, j) = row[1 + static_cast<std::size_t>(j)];
      traces.predictions(r, j) = row[1 + joints + static_cast<std::size_t>(j)];
    }
  }
  return traces;
}

}  // namespace motortherm
