// SPDX-License-Identifier: Apache-2.0
#include "motortherm/metrics.hpp"

#include <cmath>
#include <string>

#include "motortherm/errors.hpp"

namespace motortherm {
namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("length mismatch: " + std::to_string(a.size()) + " predictions vs " +
                      std::to_string(b.size()) + " truth values");
  }
  if (a.empty()) throw ConfigError("metric of an empty series");
}

}  // namespace

double rmse(std::span<const double> predictions, std::span<const double> truth) {
  check_pair(predictions, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = predictions[i] - truth[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

double max_abs_error(std::span<const double> predictions, std::span<const double> truth) {
  check_pair(predictions, truth);
  double worst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    worst = std::max(worst, std::abs(predictions[i] - truth[i]));
  }
  return worst;
}

double r_squared(std::span<const double> predictions, std::span<const double> truth) {
  check_pair(predictions, truth);
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - predictions[i]) * (truth[i] - predictions[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) throw MetricError("R^2 is undefined for constant truth values");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace motortherm
