// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motortherm/linalg.hpp"

namespace motortherm {

enum class Activation { Tanh, Elu, Sigmoid, Identity };

std::string_view to_string(Activation kind);
Activation parse_activation(std::string_view name);

/// elu uses alpha = 1.
double activate(Activation kind, double x);
/// Exact derivative of activate() with respect to x.
double activation_grad(Activation kind, double x);

/// Gate blocks are stacked in this order in every LSTM weight array.
enum class Gate : int { Input = 0, Forget = 1, Cell = 2, Output = 3 };

struct LstmParams {
  Matrix input_weights;      // 4H x D
  Matrix recurrent_weights;  // 4H x H
  Vector bias;               // 4H

  std::size_t hidden_size() const { return static_cast<std::size_t>(recurrent_weights.cols()); }
  std::size_t input_size() const { return static_cast<std::size_t>(input_weights.cols()); }

  auto gate_input_weights(Gate g) { return input_weights.middleRows(block(g), hidden()); }
  auto gate_recurrent_weights(Gate g) { return recurrent_weights.middleRows(block(g), hidden()); }
  auto gate_bias(Gate g) { return bias.segment(block(g), hidden()); }
  auto gate_bias(Gate g) const { return bias.segment(block(g), hidden()); }

 private:
  Eigen::Index hidden() const { return recurrent_weights.cols(); }
  Eigen::Index block(Gate g) const { return static_cast<int>(g) * hidden(); }
};

struct DenseLayerParams {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::Identity;

  std::size_t in() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t out() const { return static_cast<std::size_t>(weights.rows()); }
};

/// Layer sizes of the LSTM + dense stack. The last dense layer is the
/// identity-activated output; the hidden dense widths never increase.
struct NetworkConfig {
  std::size_t input_size = 7;
  std::size_t hidden_size = 32;
  std::vector<std::size_t> dense_widths{32, 24, 16, 12, 8, 7};
  std::vector<Activation> activations{Activation::Tanh, Activation::Elu, Activation::Sigmoid,
                                      Activation::Tanh, Activation::Elu, Activation::Identity};

  /// Throws ConfigError on zero widths, increasing hidden widths, a
  /// non-identity output, or an activation list of the wrong length.
  void validate() const;
  std::size_t output_size() const { return dense_widths.empty() ? 0 : dense_widths.back(); }

  bool operator==(const NetworkConfig&) const = default;
};

/// Default activation cycle for `layers` dense layers: tanh, elu, sigmoid, ...
/// with identity on the last.
std::vector<Activation> default_activations(std::size_t layers);

struct NetworkParams {
  LstmParams lstm;
  std::vector<DenseLayerParams> dense;

  NetworkConfig config() const;
  std::size_t output_size() const { return dense.empty() ? 0 : dense.back().out(); }
  std::size_t parameter_count() const;
};

/// Glorot-uniform weights, zero biases, forget-gate bias 1.
NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed);

/// Same shapes and activations as `params`, every entry zero.
NetworkParams zeros_like(const NetworkParams& params);

/// Calls f(name, span) for every parameter tensor in a fixed order.
template <class F>
void for_each_tensor(NetworkParams& p, F&& f) {
  f(std::string("lstm.input_weights"), std::span<double>(p.lstm.input_weights.data(), p.lstm.input_weights.size()));
  f(std::string("lstm.recurrent_weights"), std::span<double>(p.lstm.recurrent_weights.data(), p.lstm.recurrent_weights.size()));
  f(std::string("lstm.bias"), std::span<double>(p.lstm.bias.data(), p.lstm.bias.size()));
  for (std::size_t i = 0; i < p.dense.size(); ++i) {
    auto& d = p.dense[i];
    const std::string prefix = "dense" + std::to_string(i);
    f(prefix + ".weights", std::span<double>(d.weights.data(), d.weights.size()));
    f(prefix + ".bias", std::span<double>(d.bias.data(), d.bias.size()));
  }
}

template <class F>
void for_each_tensor(const NetworkParams& p, F&& f) {
  for_each_tensor(const_cast<NetworkParams&>(p), [&](const std::string& name, std::span<double> s) {
    f(name, std::span<const double>(s.data(), s.size()));
  });
}

struct LstmStep {
  Vector hidden;  // h_t
  Vector cell;    // c_t
  Vector gates;   // activated i, f, g, o stacked (4H)
};

/// One LSTM step: i, f, o = sigmoid, g = tanh, c = f*c_prev + i*g, h = o*tanh(c).
LstmStep lstm_cell_step(const LstmParams& params, const Vector& x, const Vector& h_prev,
                        const Vector& c_prev);

/// Inverted dropout on the inputs of every hidden dense layer. Inactive when
/// probability is 0.
struct Dropout {
  double probability = 0.0;
  std::mt19937_64* rng = nullptr;

  bool active() const { return probability > 0.0; }
};

/// Survivor mask scaled by 1/(1-p): entries are 0 or 1/(1-p).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double probability, std::mt19937_64& rng);

/// Everything backward() needs. Row t of each matrix belongs to timestep t.
struct ForwardCache {
  Matrix inputs;     // T x D
  Matrix gates;      // T x 4H, activated
  Matrix cell;       // T x H
  Matrix cell_tanh;  // T x H
  Matrix hidden;     // T x H
  std::vector<Matrix> layer_inputs;     // per dense layer, after dropout
  std::vector<Matrix> pre_activations;  // per dense layer
  std::vector<Matrix> masks;            // per dense layer, empty when no dropout applied

  std::size_t length() const { return static_cast<std::size_t>(inputs.rows()); }
};

struct ForwardResult {
  Matrix predictions;  // T x output width
  ForwardCache cache;
};

/// Runs the sequence from h0 = c0 = 0 and maps every hidden state through the
/// dense stack, giving one prediction row per input row.
ForwardResult forward(const NetworkParams& params, const Matrix& sequence, Dropout dropout = {});

/// forward() without dropout, discarding the cache.
Matrix predict(const NetworkParams& params, const Matrix& sequence);

/// Reverse-mode gradients of a scalar loss given dLoss/dPredictions.
/// Full backpropagation through time unless `truncation` > 0, in which case
/// recurrent gradients do not cross boundaries every `truncation` steps.
NetworkParams backward(const NetworkParams& params, const ForwardCache& cache,
                       const Matrix& grad_predictions, std::size_t truncation = 0);

}  // namespace motortherm
