// SPDX-License-Identifier: Apache-2.0
#include "motortherm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "motortherm/errors.hpp"

namespace motortherm {
namespace {

std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

// Per-tensor spans of two structurally identical parameter sets.
template <class F>
void zip_tensors(NetworkParams& a, const NetworkParams& b, F&& f) {
  std::vector<std::span<const double>> other;
  for_each_tensor(b, [&](const std::string&, std::span<const double> s) { other.push_back(s); });
  std::size_t i = 0;
  for_each_tensor(a, [&](const std::string& name, std::span<double> s) {
    if (i >= other.size() || other[i].size() != s.size()) {
      throw ConfigError("parameter and gradient shapes differ at " + name);
    }
    f(name, s, other[i]);
    ++i;
  });
  if (i != other.size()) throw ConfigError("parameter and gradient tensor counts differ");
}

void scale_all(NetworkParams& p, double factor) {
  for_each_tensor(p, [&](const std::string&, std::span<double> s) {
    for (double& v : s) v *= factor;
  });
}

}  // namespace

LossAndGradient mse_loss(const Matrix& predictions, const Matrix& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
    throw ConfigError("MSE shape mismatch: " + std::to_string(predictions.rows()) + "x" +
                      std::to_string(predictions.cols()) + " vs " + std::to_string(targets.rows()) +
                      "x" + std::to_string(targets.cols()));
  }
  if (predictions.size() == 0) throw ConfigError("MSE of empty matrices");
  const double n = static_cast<double>(predictions.size());
  LossAndGradient out;
  const Matrix diff = predictions - targets;
  out.loss = diff.squaredNorm() / n;
  out.gradient = (2.0 / n) * diff;
  return out;
}

AdamState AdamState::fresh(const NetworkParams& params, const AdamHyperParams& hyper) {
  AdamState s;
  s.first_moment = zeros_like(params);
  s.second_moment = zeros_like(params);
  s.hyper = hyper;
  return s;
}

void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state) {
  zip_tensors(params, grads, [](const std::string& name, std::span<double>, std::span<const double> g) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw TrainingError("non-finite gradient in " + name + " at entry " + std::to_string(i));
      }
    }
  });

  const auto& hp = state.hyper;
  const auto t = static_cast<double>(state.step + 1);
  const double correction1 = 1.0 - std::pow(hp.beta1, t);
  const double correction2 = 1.0 - std::pow(hp.beta2, t);

  std::vector<std::span<double>> m_spans, v_spans;
  for_each_tensor(state.first_moment, [&](const std::string&, std::span<double> s) { m_spans.push_back(s); });
  for_each_tensor(state.second_moment, [&](const std::string&, std::span<double> s) { v_spans.push_back(s); });

  std::size_t k = 0;
  zip_tensors(params, grads, [&](const std::string& name, std::span<double> p, std::span<const double> g) {
    if (k >= m_spans.size() || m_spans[k].size() != p.size()) {
      throw ConfigError("Adam state shape differs at " + name);
    }
    auto m = m_spans[k];
    auto v = v_spans[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= hp.learning_rate * m_hat / (std::sqrt(v_hat) + hp.epsilon);
    }
    ++k;
  });
  ++state.step;
}

void TrainingConfig::validate() const {
  network.validate();
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (!(adam.learning_rate > 0.0) || !std::isfinite(adam.learning_rate)) {
    throw ConfigError("learning rate must be > 0");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must be in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
  if (window > 0 && stride < 1) throw ConfigError("stride must be >= 1");
  if (clip_norm < 0.0) throw ConfigError("clip norm must be >= 0");
}

double global_norm(const NetworkParams& params) {
  double sum = 0.0;
  for_each_tensor(params, [&](const std::string&, std::span<const double> s) {
    for (double v : s) sum += v * v;
  });
  return std::sqrt(sum);
}

TrainingResult train(const SequenceDataset& seen, const TrainingConfig& config) {
  config.validate();
  seen.validate();
  if (seen.empty()) throw ConfigError("training dataset is empty");
  if (seen.feature_width() != config.network.input_size) {
    throw ConfigError("network expects " + std::to_string(config.network.input_size) +
                      " input features, dataset has " + std::to_string(seen.feature_width()));
  }
  if (static_cast<std::size_t>(seen.targets.front().cols()) != config.network.output_size()) {
    throw ConfigError("network output width " + std::to_string(config.network.output_size()) +
                      " differs from target width " + std::to_string(seen.targets.front().cols()));
  }

  TrainingResult result;
  const NormStats target_stats = compute_norm_stats(seen.targets);
  if (config.normalize) {
    result.normalization = {true, compute_norm_stats(seen.inputs), target_stats};
  } else {
    result.normalization = {false, NormStats::identity(seen.feature_width()),
                            NormStats::identity(static_cast<std::size_t>(target_stats.channels()))};
  }

  SequenceDataset work;
  work.tag = seen.tag;
  work.dt = seen.dt;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    work.inputs.push_back(normalize(seen.inputs[i], result.normalization.input));
    work.targets.push_back(normalize(seen.targets[i], result.normalization.target));
    work.ids.push_back(seen.ids[i]);
  }
  if (config.window > 0) work = window_dataset(work, config.window, config.stride);

  // Squared errors are divided by these before entering scaled_loss.
  const RowVector error_scale = config.normalize
                                    ? RowVector::Ones(target_stats.std.size())
                                    : RowVector(target_stats.std.cwiseInverse().transpose());

  result.params = init_params(config.network, config.seed);
  AdamState adam = AdamState::fresh(result.params, config.adam);
  auto shuffle_rng = make_stream(config.seed, 1);
  auto dropout_rng = make_stream(config.seed, 2);
  const Dropout dropout{config.dropout, &dropout_rng};

  std::vector<std::size_t> order(work.size());
  std::iota(order.begin(), order.end(), 0);
  NetworkParams last_finite = result.params;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    double scaled_sum = 0.0;
    for (std::size_t idx : order) {
      auto fwd = forward(result.params, work.inputs[idx], dropout);
      auto mse = mse_loss(fwd.predictions, work.targets[idx]);
      if (!std::isfinite(mse.loss)) {
        throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch + 1) + " on sequence '" +
                                  work.ids[idx] + "'",
                              last_finite, result.history);
      }
      loss_sum += mse.loss;
      if (config.normalize) {
        scaled_sum += mse.loss;
      } else {
        const Matrix diff = fwd.predictions - work.targets[idx];
        scaled_sum += (diff.array().rowwise() * error_scale.array()).square().mean();
      }

      NetworkParams grads = backward(result.params, fwd.cache, mse.gradient, config.bptt_truncation);
      if (config.clip_norm > 0.0) {
        const double norm = global_norm(grads);
        if (norm > config.clip_norm) scale_all(grads, config.clip_norm / norm);
      }
      try {
        adam_step(result.params, grads, adam);
      } catch (const TrainingError& e) {
        throw DivergenceError(std::string(e.what()) + " in epoch " + std::to_string(epoch + 1),
                              last_finite, result.history);
      }
    }
    const double mean_loss = loss_sum / static_cast<double>(work.size());
    if (!std::isfinite(mean_loss)) {
      throw DivergenceError("non-finite epoch loss in epoch " + std::to_string(epoch + 1), last_finite,
                            result.history);
    }
    last_finite = result.params;
    result.history.loss.push_back(mean_loss);
    result.history.scaled_loss.push_back(scaled_sum / static_cast<double>(work.size()));
    result.history.seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());

    const std::size_t done = epoch + 1;
    const bool last = done == config.epochs;
    if (config.on_report && config.report_every > 0 && (done % config.report_every == 0 || last)) {
      config.on_report(done, mean_loss);
    }

    if (config.patience > 0 && done > config.patience) {
      const auto& h = result.history.loss;
      const auto split = h.end() - static_cast<std::ptrdiff_t>(config.patience);
      const double before = *std::min_element(h.begin(), split);
      const double recent = *std::min_element(split, h.end());
      if (before - recent < config.min_improvement) {
        result.stopped_early = !last;
        if (config.on_report && !last) config.on_report(done, mean_loss);
        break;
      }
    }
  }
  return result;
}

GradCheckReport gradient_check_suite(const GradCheckOptions& options) {
  GradCheckReport report;
  for (std::uint64_t seed : options.seeds) {
    NetworkConfig config;
    config.input_size = options.input_size;
    config.hidden_size = options.hidden_size;
    config.dense_widths = options.dense_widths;
    config.activations = default_activations(options.dense_widths.size());

    NetworkParams params = init_params(config, seed);
    auto rng = make_stream(seed, 99);
    std::uniform_real_distribution<double> bias_dist(-0.5, 0.5);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& b : std::span<double>(params.lstm.bias.data(), params.lstm.bias.size())) b += bias_dist(rng);
    for (auto& d : params.dense) {
      for (double& b : std::span<double>(d.bias.data(), d.bias.size())) b += bias_dist(rng);
    }

    const auto steps = static_cast<Eigen::Index>(options.sequence_length);
    Matrix sequence(steps, static_cast<Eigen::Index>(options.input_size));
    for (Eigen::Index i = 0; i < sequence.size(); ++i) sequence.data()[i] = normal(rng);
    Matrix weights(steps, static_cast<Eigen::Index>(params.output_size()));
    for (Eigen::Index i = 0; i < weights.size(); ++i) weights.data()[i] = normal(rng);

    auto fwd = forward(params, sequence);
    NetworkParams analytic = backward(params, fwd.cache, weights);
    if (options.corrupt) options.corrupt(analytic);

    auto objective = [&](const NetworkParams& p) { return predict(p, sequence).cwiseProduct(weights).sum(); };

    double seed_worst = 0.0;
    NetworkParams probe = params;
    std::vector<std::span<const double>> analytic_spans;
    for_each_tensor(analytic, [&](const std::string&, std::span<const double> s) { analytic_spans.push_back(s); });
    std::size_t tensor = 0;
    for_each_tensor(probe, [&](const std::string& name, std::span<double> values) {
      const auto grad = analytic_spans[tensor++];
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double original = values[i];
        values[i] = original + options.step;
        const double up = objective(probe);
        values[i] = original - options.step;
        const double down = objective(probe);
        values[i] = original;
        const double numeric = (up - down) / (2.0 * options.step);
        const double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-6});
        const double rel = std::abs(grad[i] - numeric) / denom;
        ++report.checked;
        if (rel > seed_worst) seed_worst = rel;
        if (rel > report.worst) {
          report.worst = rel;
          report.worst_tensor = name + "[" + std::to_string(i) + "]";
        }
      }
    });
    report.max_relative_error.push_back(seed_worst);
  }
  report.passed = report.worst < options.tolerance;
  return report;
}

}  // namespace motortherm
