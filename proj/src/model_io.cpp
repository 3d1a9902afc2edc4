// SPDX-License-Identifier: Apache-2.0
#include "motortherm/model_io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "motortherm/errors.hpp"

namespace motortherm {
namespace {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

json stats_json(const NormStats& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"std", std::vector<double>(s.std.data(), s.std.data() + s.std.size())}};
}

NormStats stats_from_json(const json& j) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto std = j.at("std").get<std::vector<double>>();
  if (mean.size() != std.size()) throw DataError("mean and std arrays differ in length");
  NormStats s;
  s.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  s.std = Eigen::Map<const Vector>(std.data(), static_cast<Eigen::Index>(std.size()));
  for (double v : std) {
    if (!(v >= kStdFloor)) throw DataError("standard deviation below the floor in statistics file");
  }
  return s;
}

json normalization_json(const Normalization& norm, const FeatureSelection& features) {
  return {{"enabled", norm.enabled},
          {"features", features.to_string()},
          {"per_channel", true},
          {"input", stats_json(norm.input)},
          {"target", stats_json(norm.target)}};
}

Normalization normalization_from_json(const json& j) {
  Normalization n;
  n.enabled = j.at("enabled").get<bool>();
  n.input = stats_from_json(j.at("input"));
  n.target = stats_from_json(j.at("target"));
  return n;
}

json tensor_json(const std::string& name, const double* data, Eigen::Index rows, Eigen::Index cols) {
  return {{"name", name},
          {"shape", {rows, cols}},
          {"values", std::vector<double>(data, data + rows * cols)}};
}

void read_tensor(const json& j, const std::string& name, Matrix& out) {
  if (j.at("name").get<std::string>() != name) {
    throw DataError("expected tensor '" + name + "', found '" + j.at("name").get<std::string>() + "'");
  }
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto values = j.at("values").get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] * shape[1] != static_cast<Eigen::Index>(values.size())) {
    throw DataError("tensor '" + name + "' has inconsistent shape");
  }
  out = Eigen::Map<const Matrix>(values.data(), shape[0], shape[1]);
}

void read_tensor(const json& j, const std::string& name, Vector& out) {
  Matrix m;
  read_tensor(j, name, m);
  if (m.cols() != 1) throw DataError("tensor '" + name + "' must be a column");
  out = m.col(0);
}

}  // namespace

std::string serialize_model(const ModelBundle& model) {
  const auto& p = model.params;
  json config;
  config["input_size"] = p.lstm.input_size();
  config["hidden_size"] = p.lstm.hidden_size();
  std::vector<std::size_t> widths;
  std::vector<std::string> acts;
  for (const auto& d : p.dense) {
    widths.push_back(d.out());
    acts.emplace_back(to_string(d.activation));
  }
  config["dense_widths"] = widths;
  config["activations"] = acts;
  config["dropout"] = model.dropout;
  config["features"] = model.features.to_string();
  config["gate_order"] = {"input", "forget", "cell", "output"};

  json weights = json::array();
  const auto& l = p.lstm;
  weights.push_back(tensor_json("lstm.input_weights", l.input_weights.data(), l.input_weights.rows(), l.input_weights.cols()));
  weights.push_back(tensor_json("lstm.recurrent_weights", l.recurrent_weights.data(), l.recurrent_weights.rows(),
                                l.recurrent_weights.cols()));
  weights.push_back(tensor_json("lstm.bias", l.bias.data(), l.bias.size(), 1));
  for (std::size_t i = 0; i < p.dense.size(); ++i) {
    const auto& d = p.dense[i];
    const std::string prefix = "dense" + std::to_string(i);
    weights.push_back(tensor_json(prefix + ".weights", d.weights.data(), d.weights.rows(), d.weights.cols()));
    weights.push_back(tensor_json(prefix + ".bias", d.bias.data(), d.bias.size(), 1));
  }

  json root;
  root["format"] = kModelFormat;
  root["config"] = config;
  root["normalization"] = normalization_json(model.normalization, model.features);
  root["normalization"]["stats_id"] = content_id(serialize_norm_stats(model.normalization, model.features));
  root["weights"] = weights;
  return root.dump(1) + "\n";
}

ModelBundle parse_model(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (root.at("format").get<std::string>() != kModelFormat) {
      throw DataError("unsupported model format '" + root.at("format").get<std::string>() + "'");
    }
    const auto& config = root.at("config");
    NetworkConfig nc;
    nc.input_size = config.at("input_size").get<std::size_t>();
    nc.hidden_size = config.at("hidden_size").get<std::size_t>();
    nc.dense_widths = config.at("dense_widths").get<std::vector<std::size_t>>();
    nc.activations.clear();
    for (const auto& a : config.at("activations")) nc.activations.push_back(parse_activation(a.get<std::string>()));
    nc.validate();

    ModelBundle model;
    model.dropout = config.at("dropout").get<double>();
    model.features = FeatureSelection::parse(config.at("features").get<std::string>());
    model.normalization = normalization_from_json(root.at("normalization"));
    if (const auto& nj = root.at("normalization"); nj.contains("stats_id") &&
        nj.at("stats_id").get<std::string>() != content_id(serialize_norm_stats(model.normalization, model.features))) {
      throw DataError("normalization statistics do not match their recorded stats_id");
    }

    const auto& weights = root.at("weights");
    if (weights.size() != 3 + 2 * nc.dense_widths.size()) throw DataError("unexpected tensor count in model file");
    auto& p = model.params;
    read_tensor(weights[0], "lstm.input_weights", p.lstm.input_weights);
    read_tensor(weights[1], "lstm.recurrent_weights", p.lstm.recurrent_weights);
    read_tensor(weights[2], "lstm.bias", p.lstm.bias);
    for (std::size_t i = 0; i < nc.dense_widths.size(); ++i) {
      DenseLayerParams d;
      const std::string prefix = "dense" + std::to_string(i);
      read_tensor(weights[3 + 2 * i], prefix + ".weights", d.weights);
      read_tensor(weights[4 + 2 * i], prefix + ".bias", d.bias);
      d.activation = nc.activations[i];
      p.dense.push_back(std::move(d));
    }
    if (!(p.config() == nc)) throw DataError("tensor shapes disagree with the model config");
    if (model.normalization.input.channels() != nc.input_size ||
        model.normalization.target.channels() != nc.output_size()) {
      throw DataError("normalization statistics do not match the model widths");
    }
    if (model.features.width() != nc.input_size) {
      throw DataError("feature selection '" + model.features.to_string() + "' gives " +
                      std::to_string(model.features.width()) + " inputs, model expects " +
                      std::to_string(nc.input_size));
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ModelBundle& model, const std::filesystem::path& path) {
  write_text(path, serialize_model(model));
}

ModelBundle load_model(const std::filesystem::path& path) { return parse_model(read_text(path)); }

std::string serialize_norm_stats(const Normalization& norm, const FeatureSelection& features) {
  json root = normalization_json(norm, features);
  root["format"] = kNormStatsFormat;
  return root.dump(1) + "\n";
}

void save_norm_stats(const Normalization& norm, const FeatureSelection& features,
                     const std::filesystem::path& path) {
  write_text(path, serialize_norm_stats(norm, features));
}

Normalization load_norm_stats(const std::filesystem::path& path, FeatureSelection* features) {
  try {
    const json root = json::parse(read_text(path));
    if (root.at("format").get<std::string>() != kNormStatsFormat) throw DataError("unsupported statistics format");
    if (features) *features = FeatureSelection::parse(root.at("features").get<std::string>());
    return normalization_from_json(root);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed statistics file: ") + e.what());
  }
}

std::string content_id(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

}  // namespace motortherm
