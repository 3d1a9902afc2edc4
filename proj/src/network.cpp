// SPDX-License-Identifier: Apache-2.0
#include "motortherm/network.hpp"

#include <cmath>
#include <string>

#include "motortherm/errors.hpp"

namespace motortherm {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <class Derived>
void apply_activation(Activation kind, Eigen::MatrixBase<Derived>& m) {
  m.derived() = m.unaryExpr([kind](double x) { return activate(kind, x); });
}

void fill_glorot(Eigen::Ref<Matrix> m, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
  }
}

// Activated gates and new state from the stacked pre-activation z.
void lstm_from_preactivation(const Vector& z, const Vector& c_prev, Eigen::Index h, Vector& gates,
                             Vector& cell, Vector& cell_tanh, Vector& hidden) {
  gates.resize(4 * h);
  for (Eigen::Index k = 0; k < 4 * h; ++k) {
    gates(k) = (k >= 2 * h && k < 3 * h) ? std::tanh(z(k)) : sigmoid(z(k));
  }
  const auto i = gates.segment(0, h);
  const auto f = gates.segment(h, h);
  const auto g = gates.segment(2 * h, h);
  const auto o = gates.segment(3 * h, h);
  cell = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  cell_tanh = cell.array().tanh();
  hidden = o.cwiseProduct(cell_tanh);
}

void check_shapes(const NetworkParams& p) {
  const auto h = p.lstm.recurrent_weights.cols();
  if (h == 0 || p.lstm.recurrent_weights.rows() != 4 * h || p.lstm.input_weights.rows() != 4 * h ||
      p.lstm.bias.size() != 4 * h) {
    throw ConfigError("LSTM weight shapes are inconsistent");
  }
  if (p.dense.empty()) throw ConfigError("network has no dense layers");
  auto width = static_cast<std::size_t>(h);
  for (std::size_t i = 0; i < p.dense.size(); ++i) {
    const auto& d = p.dense[i];
    if (d.in() != width || static_cast<std::size_t>(d.bias.size()) != d.out()) {
      throw ConfigError("dense layer " + std::to_string(i) + " has inconsistent shape");
    }
    width = d.out();
  }
}

}  // namespace

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::Tanh: return "tanh";
    case Activation::Elu: return "elu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "elu") return Activation::Elu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity" || name == "linear") return Activation::Identity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

double activate(Activation kind, double x) {
  switch (kind) {
    case Activation::Tanh: return std::tanh(x);
    case Activation::Elu: return x > 0.0 ? x : std::expm1(x);
    case Activation::Sigmoid: return sigmoid(x);
    case Activation::Identity: return x;
  }
  return x;
}

double activation_grad(Activation kind, double x) {
  switch (kind) {
    case Activation::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::Elu: return x > 0.0 ? 1.0 : std::exp(x);
    case Activation::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

void NetworkConfig::validate() const {
  if (input_size == 0) throw ConfigError("input size must be > 0");
  if (hidden_size == 0) throw ConfigError("LSTM hidden size must be > 0");
  if (dense_widths.empty()) throw ConfigError("at least one dense layer is required");
  if (activations.size() != dense_widths.size()) {
    throw ConfigError("expected " + std::to_string(dense_widths.size()) + " activations, got " +
                      std::to_string(activations.size()));
  }
  for (std::size_t i = 0; i < dense_widths.size(); ++i) {
    if (dense_widths[i] == 0) throw ConfigError("dense layer " + std::to_string(i) + " has zero width");
  }
  for (std::size_t i = 1; i + 1 < dense_widths.size(); ++i) {
    if (dense_widths[i] > dense_widths[i - 1]) {
      throw ConfigError("hidden dense widths must not increase toward the output");
    }
  }
  if (activations.back() != Activation::Identity) {
    throw ConfigError("the output layer must use the identity activation");
  }
}

std::vector<Activation> default_activations(std::size_t layers) {
  static constexpr Activation kCycle[] = {Activation::Tanh, Activation::Elu, Activation::Sigmoid};
  std::vector<Activation> out;
  for (std::size_t i = 0; i + 1 < layers; ++i) out.push_back(kCycle[i % 3]);
  if (layers > 0) out.push_back(Activation::Identity);
  return out;
}

NetworkConfig NetworkParams::config() const {
  NetworkConfig c;
  c.input_size = lstm.input_size();
  c.hidden_size = lstm.hidden_size();
  c.dense_widths.clear();
  c.activations.clear();
  for (const auto& d : dense) {
    c.dense_widths.push_back(d.out());
    c.activations.push_back(d.activation);
  }
  return c;
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor(*this, [&](const std::string&, std::span<const double> s) { n += s.size(); });
  return n;
}

NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  const auto d = static_cast<Eigen::Index>(config.input_size);
  const auto h = static_cast<Eigen::Index>(config.hidden_size);

  NetworkParams p;
  p.lstm.input_weights.resize(4 * h, d);
  p.lstm.recurrent_weights.resize(4 * h, h);
  p.lstm.bias = Vector::Zero(4 * h);
  for (int g = 0; g < 4; ++g) {
    fill_glorot(p.lstm.gate_input_weights(static_cast<Gate>(g)), config.input_size, config.hidden_size, rng);
  }
  for (int g = 0; g < 4; ++g) {
    fill_glorot(p.lstm.gate_recurrent_weights(static_cast<Gate>(g)), config.hidden_size,
                config.hidden_size, rng);
  }
  p.lstm.gate_bias(Gate::Forget).setOnes();

  std::size_t in = config.hidden_size;
  for (std::size_t i = 0; i < config.dense_widths.size(); ++i) {
    const std::size_t out = config.dense_widths[i];
    DenseLayerParams layer;
    layer.weights.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    fill_glorot(layer.weights, in, out, rng);
    layer.bias = Vector::Zero(static_cast<Eigen::Index>(out));
    layer.activation = config.activations[i];
    p.dense.push_back(std::move(layer));
    in = out;
  }
  return p;
}

NetworkParams zeros_like(const NetworkParams& params) {
  NetworkParams z = params;
  for_each_tensor(z, [](const std::string&, std::span<double> s) { std::fill(s.begin(), s.end(), 0.0); });
  return z;
}

LstmStep lstm_cell_step(const LstmParams& params, const Vector& x, const Vector& h_prev,
                        const Vector& c_prev) {
  const auto h = static_cast<Eigen::Index>(params.hidden_size());
  if (params.input_weights.rows() != 4 * h || params.recurrent_weights.rows() != 4 * h ||
      params.bias.size() != 4 * h) {
    throw ConfigError("LSTM weight shapes are inconsistent");
  }
  if (x.size() != params.input_weights.cols() || h_prev.size() != h || c_prev.size() != h) {
    throw ConfigError("LSTM step expects input " + std::to_string(params.input_size()) +
                      " and state " + std::to_string(h) + ", got input " + std::to_string(x.size()) +
                      ", hidden " + std::to_string(h_prev.size()) + ", cell " +
                      std::to_string(c_prev.size()));
  }
  const Vector z = params.input_weights * x + params.recurrent_weights * h_prev + params.bias;
  LstmStep step;
  Vector cell_tanh;
  lstm_from_preactivation(z, c_prev, h, step.gates, step.cell, cell_tanh, step.hidden);
  return step;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double probability, std::mt19937_64& rng) {
  if (!(probability >= 0.0 && probability < 1.0)) throw ConfigError("dropout probability must be in [0, 1)");
  std::bernoulli_distribution keep(1.0 - probability);
  const double scale = 1.0 / (1.0 - probability);
  Matrix mask(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) mask(r, c) = keep(rng) ? scale : 0.0;
  }
  return mask;
}

ForwardResult forward(const NetworkParams& params, const Matrix& sequence, Dropout dropout) {
  check_shapes(params);
  if (static_cast<std::size_t>(sequence.cols()) != params.lstm.input_size()) {
    throw ConfigError("input width mismatch: network expects " +
                      std::to_string(params.lstm.input_size()) + " features, sequence has " +
                      std::to_string(sequence.cols()));
  }
  if (dropout.active() && dropout.rng == nullptr) throw ConfigError("dropout requires a random generator");
  if (!(dropout.probability >= 0.0 && dropout.probability < 1.0)) {
    throw ConfigError("dropout probability must be in [0, 1)");
  }

  const Eigen::Index steps = sequence.rows();
  const auto h = static_cast<Eigen::Index>(params.lstm.hidden_size());

  ForwardResult result;
  auto& cache = result.cache;
  cache.inputs = sequence;
  cache.gates.resize(steps, 4 * h);
  cache.cell.resize(steps, h);
  cache.cell_tanh.resize(steps, h);
  cache.hidden.resize(steps, h);

  Matrix input_part = sequence * params.lstm.input_weights.transpose();
  input_part.rowwise() += params.lstm.bias.transpose();

  Vector h_prev = Vector::Zero(h);
  Vector c_prev = Vector::Zero(h);
  Vector z, gates, cell, cell_tanh, hidden;
  for (Eigen::Index t = 0; t < steps; ++t) {
    z.noalias() = params.lstm.recurrent_weights * h_prev;
    z += input_part.row(t).transpose();
    lstm_from_preactivation(z, c_prev, h, gates, cell, cell_tanh, hidden);
    cache.gates.row(t) = gates.transpose();
    cache.cell.row(t) = cell.transpose();
    cache.cell_tanh.row(t) = cell_tanh.transpose();
    cache.hidden.row(t) = hidden.transpose();
    h_prev.swap(hidden);
    c_prev.swap(cell);
  }

  Matrix activations = cache.hidden;
  const std::size_t layers = params.dense.size();
  cache.layer_inputs.resize(layers);
  cache.pre_activations.resize(layers);
  cache.masks.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& layer = params.dense[l];
    const bool hidden_layer = l + 1 < layers;
    if (dropout.active() && hidden_layer) {
      cache.masks[l] = dropout_mask(activations.rows(), activations.cols(), dropout.probability, *dropout.rng);
      activations = activations.cwiseProduct(cache.masks[l]);
    }
    Matrix pre = activations * layer.weights.transpose();
    pre.rowwise() += layer.bias.transpose();
    cache.layer_inputs[l] = std::move(activations);
    activations = pre;
    apply_activation(layer.activation, activations);
    cache.pre_activations[l] = std::move(pre);
  }
  result.predictions = std::move(activations);
  return result;
}

Matrix predict(const NetworkParams& params, const Matrix& sequence) {
  return forward(params, sequence).predictions;
}

NetworkParams backward(const NetworkParams& params, const ForwardCache& cache,
                       const Matrix& grad_predictions, std::size_t truncation) {
  check_shapes(params);
  const Eigen::Index steps = cache.inputs.rows();
  const auto h = static_cast<Eigen::Index>(params.lstm.hidden_size());
  const std::size_t layers = params.dense.size();
  if (cache.inputs.cols() != params.lstm.input_weights.cols() || cache.gates.rows() != steps ||
      cache.gates.cols() != 4 * h || cache.hidden.rows() != steps ||
      cache.layer_inputs.size() != layers || cache.pre_activations.size() != layers ||
      cache.masks.size() != layers) {
    throw ConfigError("forward cache does not match the network parameters");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (static_cast<std::size_t>(cache.pre_activations[l].cols()) != params.dense[l].out() ||
        cache.pre_activations[l].rows() != steps) {
      throw ConfigError("forward cache does not match the network parameters");
    }
  }
  if (grad_predictions.rows() != steps ||
      static_cast<std::size_t>(grad_predictions.cols()) != params.output_size()) {
    throw ConfigError("prediction gradient has shape " + std::to_string(grad_predictions.rows()) + "x" +
                      std::to_string(grad_predictions.cols()) + ", expected " + std::to_string(steps) +
                      "x" + std::to_string(params.output_size()));
  }

  NetworkParams grads = zeros_like(params);

  Matrix upstream = grad_predictions;
  for (std::size_t l = layers; l-- > 0;) {
    const auto& layer = params.dense[l];
    const Matrix& pre = cache.pre_activations[l];
    Matrix d_pre = upstream.cwiseProduct(
        pre.unaryExpr([kind = layer.activation](double x) { return activation_grad(kind, x); }));
    grads.dense[l].weights.noalias() = d_pre.transpose() * cache.layer_inputs[l];
    grads.dense[l].bias = d_pre.colwise().sum().transpose();
    upstream = d_pre * layer.weights;
    if (cache.masks[l].size() != 0) upstream = upstream.cwiseProduct(cache.masks[l]);
  }

  // upstream now holds dLoss/dh_t from the dense stack, one row per step.
  Matrix d_z(steps, 4 * h);
  Vector dh_next = Vector::Zero(h);
  Vector dc_next = Vector::Zero(h);
  Vector dz(4 * h);
  for (Eigen::Index t = steps; t-- > 0;) {
    const auto gates = cache.gates.row(t);
    const auto i = gates.segment(0, h).transpose();
    const auto f = gates.segment(h, h).transpose();
    const auto g = gates.segment(2 * h, h).transpose();
    const auto o = gates.segment(3 * h, h).transpose();
    const auto tc = cache.cell_tanh.row(t).transpose();

    const Vector dh = upstream.row(t).transpose() + dh_next;
    const Vector dc = dh.cwiseProduct(o).cwiseProduct((1.0 - tc.array().square()).matrix()) + dc_next;

    dz.segment(0, h) = dc.cwiseProduct(g).cwiseProduct(i.cwiseProduct((1.0 - i.array()).matrix()));
    if (t > 0) {
      dz.segment(h, h) = dc.cwiseProduct(cache.cell.row(t - 1).transpose())
                             .cwiseProduct(f.cwiseProduct((1.0 - f.array()).matrix()));
    } else {
      dz.segment(h, h).setZero();
    }
    dz.segment(2 * h, h) = dc.cwiseProduct(i).cwiseProduct((1.0 - g.array().square()).matrix());
    dz.segment(3 * h, h) = dh.cwiseProduct(tc).cwiseProduct(o.cwiseProduct((1.0 - o.array()).matrix()));
    d_z.row(t) = dz.transpose();

    dh_next.noalias() = params.lstm.recurrent_weights.transpose() * dz;
    dc_next = dc.cwiseProduct(f);
    if (truncation > 0 && static_cast<std::size_t>(t) % truncation == 0) {
      dh_next.setZero();
      dc_next.setZero();
    }
  }

  grads.lstm.input_weights.noalias() = d_z.transpose() * cache.inputs;
  if (steps > 1) {
    grads.lstm.recurrent_weights.noalias() =
        d_z.bottomRows(steps - 1).transpose() * cache.hidden.topRows(steps - 1);
  }
  grads.lstm.bias = d_z.colwise().sum().transpose();
  return grads;
}

}  // namespace motortherm
