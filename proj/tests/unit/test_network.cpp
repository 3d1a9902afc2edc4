// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "motortherm/errors.hpp"
#include "motortherm/network.hpp"

using namespace motortherm;

namespace {

NetworkConfig small_config() {
  NetworkConfig c;
  c.input_size = 3;
  c.hidden_size = 4;
  c.dense_widths = {4, 3, 2};
  c.activations = {Activation::Tanh, Activation::Elu, Activation::Identity};
  return c;
}

NetworkParams randomized(const NetworkConfig& c, std::uint64_t seed) {
  auto p = init_params(c, seed);
  std::mt19937_64 rng(seed + 100);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  p.lstm.bias = p.lstm.bias.unaryExpr([&](double) { return u(rng); });
  for (auto& d : p.dense) d.bias = d.bias.unaryExpr([&](double) { return u(rng); });
  return p;
}

Matrix random_sequence(Eigen::Index t, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  return Matrix::NullaryExpr(t, d, [&]() { return n(rng); });
}

std::vector<double> flatten(const NetworkParams& p) {
  std::vector<double> out;
  for_each_tensor(p, [&](const std::string&, std::span<const double> s) {
    out.insert(out.end(), s.begin(), s.end());
  });
  return out;
}

// Perturbs the k-th scalar of the flattened parameter vector.
NetworkParams nudged(const NetworkParams& p, std::size_t k, double h) {
  auto q = p;
  std::size_t offset = 0;
  for_each_tensor(q, [&](const std::string&, std::span<double> s) {
    if (k >= offset && k < offset + s.size()) s[k - offset] += h;
    offset += s.size();
  });
  return q;
}

// Compares backward() against central differences of L = sum(W .* forward(x)),
// re-seeding the dropout stream for every evaluation so the masks stay fixed.
void expect_gradient_matches(const NetworkParams& p, const Matrix& x, double dropout,
                             std::size_t truncation = 0) {
  const Matrix weights = random_sequence(x.rows(), static_cast<Eigen::Index>(p.output_size()), 77);
  auto loss = [&](const NetworkParams& q) {
    std::mt19937_64 rng(5);
    return (forward(q, x, {dropout, &rng}).predictions.array() * weights.array()).sum();
  };
  std::mt19937_64 rng(5);
  const auto fwd = forward(p, x, {dropout, &rng});
  const auto grads = flatten(backward(p, fwd.cache, weights, truncation));
  const auto values = flatten(p);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(values[k]));
    const double fd = (loss(nudged(p, k, h)) - loss(nudged(p, k, -h))) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(grads[k]), 1e-6});
    EXPECT_LE(std::abs(fd - grads[k]) / denom, 1e-4) << "parameter " << k;
  }
}

}  // namespace

TEST(Activation, Values) {
  EXPECT_EQ(activate(Activation::Identity, -3.25), -3.25);
  EXPECT_EQ(activate(Activation::Sigmoid, 0.0), 0.5);
  EXPECT_EQ(activate(Activation::Tanh, 0.0), 0.0);
  EXPECT_EQ(activate(Activation::Elu, 2.0), 2.0);
  EXPECT_NEAR(activate(Activation::Elu, -1.0), std::exp(-1.0) - 1.0, 1e-15);
  EXPECT_NEAR(activate(Activation::Elu, -50.0), -1.0, 1e-15);
  EXPECT_GT(activate(Activation::Sigmoid, -800.0), -1e-300);
  EXPECT_EQ(activate(Activation::Sigmoid, 800.0), 1.0);
  EXPECT_THROW(parse_activation("relu6"), ConfigError);
}

TEST(Activation, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (auto kind : {Activation::Tanh, Activation::Elu, Activation::Sigmoid, Activation::Identity}) {
    for (int i = 0; i < 100; ++i) {
      const double x = u(rng);
      if (kind == Activation::Elu && std::abs(x) < 1e-4) continue;
      const double h = 1e-6;
      const double fd = (activate(kind, x + h) - activate(kind, x - h)) / (2.0 * h);
      EXPECT_NEAR(activation_grad(kind, x), fd, 1e-8) << to_string(kind) << " at " << x;
    }
  }
}

TEST(NetworkConfig, DefaultShape) {
  NetworkConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.dense_widths.size(), 6u);
  EXPECT_EQ(c.output_size(), 7u);
  EXPECT_EQ(c.activations.back(), Activation::Identity);
  EXPECT_EQ(default_activations(6), c.activations);
}

TEST(NetworkConfig, RejectsInvalidShapes) {
  auto c = small_config();
  c.hidden_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.dense_widths = {3, 4, 2};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.activations.back() = Activation::Tanh;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.activations.pop_back();
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(init_params(c, 1), ConfigError);
}

TEST(NetworkInit, DeterministicGlorotWithForgetBias) {
  const NetworkConfig c;
  const auto a = init_params(c, 3);
  const auto b = init_params(c, 3);
  EXPECT_EQ(flatten(a), flatten(b));
  EXPECT_NE(flatten(a), flatten(init_params(c, 4)));

  auto lstm = a.lstm;
  EXPECT_TRUE((lstm.gate_bias(Gate::Forget).array() == 1.0).all());
  for (Gate g : {Gate::Input, Gate::Cell, Gate::Output}) EXPECT_TRUE(lstm.gate_bias(g).isZero());
  const double h = static_cast<double>(c.hidden_size), d = static_cast<double>(c.input_size);
  EXPECT_LE(lstm.input_weights.cwiseAbs().maxCoeff(), std::sqrt(6.0 / (h + d)));
  EXPECT_LE(lstm.recurrent_weights.cwiseAbs().maxCoeff(), std::sqrt(6.0 / (2.0 * h)));
  for (const auto& layer : a.dense) {
    EXPECT_TRUE(layer.bias.isZero());
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in() + layer.out()));
    EXPECT_LE(layer.weights.cwiseAbs().maxCoeff(), limit);
  }
  EXPECT_EQ(a.config(), c);
  EXPECT_EQ(flatten(a).size(), a.parameter_count());
}

TEST(LstmCell, ZeroParametersGiveZeroState) {
  auto p = zeros_like(init_params(small_config(), 1)).lstm;
  const Vector x = Vector::Constant(3, 2.0);
  const auto s = lstm_cell_step(p, x, Vector::Zero(4), Vector::Zero(4));
  EXPECT_TRUE(s.hidden.isZero());
  EXPECT_TRUE(s.cell.isZero());

  const Vector c_prev = Vector::LinSpaced(4, -1.0, 1.0);
  const auto s2 = lstm_cell_step(p, x, Vector::Zero(4), c_prev);
  EXPECT_TRUE(s2.cell.isApprox(0.5 * c_prev));
}

TEST(LstmCell, HiddenStateIsBounded) {
  const auto p = randomized(small_config(), 9).lstm;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const Vector x = Vector::NullaryExpr(3, [&]() { return n(rng); });
    const Vector h = Vector::NullaryExpr(4, [&]() { return std::tanh(n(rng)); });
    const Vector c = Vector::NullaryExpr(4, [&]() { return n(rng); });
    EXPECT_LE(lstm_cell_step(p, x, h, c).hidden.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(LstmCell, RejectsWrongInputWidth) {
  const auto p = init_params(small_config(), 1).lstm;
  EXPECT_THROW(lstm_cell_step(p, Vector::Zero(2), Vector::Zero(4), Vector::Zero(4)), ConfigError);
}

TEST(Forward, ZeroRecurrentPartComposesDenseBiases) {
  auto p = randomized(small_config(), 2);
  p.lstm = zeros_like(p).lstm;
  const Matrix x = random_sequence(6, 3, 1);
  const Matrix y = predict(p, x);
  Vector a = Vector::Zero(4);
  for (const auto& layer : p.dense) {
    const Vector z = layer.weights * a + layer.bias;
    a = z.unaryExpr([&](double v) { return activate(layer.activation, v); });
  }
  for (Eigen::Index t = 0; t < y.rows(); ++t) EXPECT_TRUE(y.row(t).transpose().isApprox(a, 1e-14));

  for (auto& layer : p.dense) layer.weights.setZero();
  const Matrix y0 = predict(p, x);
  for (Eigen::Index t = 0; t < y0.rows(); ++t) EXPECT_TRUE(y0.row(t).transpose() == p.dense.back().bias);
}

TEST(Forward, MatchesStepwiseCellRecursion) {
  const auto p = randomized(small_config(), 4);
  const Matrix x = random_sequence(12, 3, 2);
  const auto res = forward(p, x);
  Vector h = Vector::Zero(4), c = Vector::Zero(4);
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const auto s = lstm_cell_step(p.lstm, x.row(t).transpose(), h, c);
    h = s.hidden;
    c = s.cell;
    EXPECT_TRUE(res.cache.hidden.row(t).transpose().isApprox(h, 1e-13));
  }
  EXPECT_EQ(res.predictions.rows(), 12);
  EXPECT_EQ(res.predictions.cols(), 2);
}

TEST(Forward, DropoutBehaviour) {
  const auto p = randomized(small_config(), 4);
  const Matrix x = random_sequence(20, 3, 3);
  std::mt19937_64 r0(1);
  EXPECT_TRUE(forward(p, x, {0.0, &r0}).predictions == predict(p, x));

  std::mt19937_64 a(8), b(8), c(9);
  const Matrix ya = forward(p, x, {0.1, &a}).predictions;
  EXPECT_TRUE(ya == forward(p, x, {0.1, &b}).predictions);
  EXPECT_FALSE(ya == forward(p, x, {0.1, &c}).predictions);
}

TEST(Forward, RejectsWidthMismatch) {
  const auto p = init_params(small_config(), 1);
  EXPECT_THROW(predict(p, Matrix::Zero(5, 4)), ConfigError);
}

TEST(Dropout, MaskPreservesExpectation) {
  std::mt19937_64 rng(12);
  const double p = 0.1;
  const Matrix m = dropout_mask(100, 100, p, rng);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = m.data()[i];
    EXPECT_TRUE(v == 0.0 || v == 1.0 / (1.0 - p));
  }
  EXPECT_NEAR(m.mean(), 1.0, 0.02);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  const auto p = randomized(small_config(), 6);
  const Matrix x = random_sequence(7, 3, 4);
  const auto fwd = forward(p, x);
  const auto g = flatten(backward(p, fwd.cache, Matrix::Zero(7, 2)));
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(Backward, SingleStepMatchesFiniteDifferences) {
  expect_gradient_matches(randomized(small_config(), 7), random_sequence(1, 3, 5), 0.0);
}

TEST(Backward, SequenceMatchesFiniteDifferences) {
  expect_gradient_matches(randomized(small_config(), 8), random_sequence(6, 3, 6), 0.0);
}

TEST(Backward, DropoutMasksAreHonoured) {
  expect_gradient_matches(randomized(small_config(), 9), random_sequence(5, 3, 7), 0.3);
}

TEST(Backward, TruncationBeyondLengthEqualsFullBptt) {
  const auto p = randomized(small_config(), 10);
  const Matrix x = random_sequence(8, 3, 8);
  const auto fwd = forward(p, x);
  const Matrix up = random_sequence(8, 2, 9);
  const auto full = flatten(backward(p, fwd.cache, up));
  EXPECT_EQ(full, flatten(backward(p, fwd.cache, up, 8)));
  EXPECT_EQ(full, flatten(backward(p, fwd.cache, up, 100)));
  EXPECT_NE(full, flatten(backward(p, fwd.cache, up, 2)));
}

TEST(Backward, RejectsMismatchedUpstream) {
  const auto p = randomized(small_config(), 10);
  const auto fwd = forward(p, random_sequence(8, 3, 8));
  EXPECT_THROW(backward(p, fwd.cache, Matrix::Zero(7, 2)), ConfigError);
}
