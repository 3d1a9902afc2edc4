// SPDX-License-Identifier: Apache-2.0
#include "motortherm/gauss2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "motortherm/errors.hpp"
#include "motortherm/metrics.hpp"

namespace motortherm {
namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

double sum_squared_residuals(const Gauss2Coefficients& c, std::span<const Gauss2Sample> samples) {
  double ssr = 0.0;
  for (const auto& s : samples) {
    const double r = s.y - eval_gauss2(c, s.x);
    ssr += r * r;
  }
  return ssr;
}

Gauss2Coefficients canonical(Gauss2Coefficients c) {
  c.c1 = std::abs(c.c1);
  c.c2 = std::abs(c.c2);
  if (c.a2 > c.a1) {
    std::swap(c.a1, c.a2);
    std::swap(c.b1, c.b2);
    std::swap(c.c1, c.c2);
  }
  return c;
}

}  // namespace

void Gauss2Coefficients::validate() const {
  for (double v : to_array()) {
    if (!std::isfinite(v)) throw ConfigError("Gauss2 coefficients must be finite");
  }
  if (c1 == 0.0 || c2 == 0.0) throw ConfigError("Gauss2 widths c1 and c2 must be non-zero");
}

double eval_gauss2(const Gauss2Coefficients& c, double x) {
  const double u1 = (x - c.b1) / c.c1;
  const double u2 = (x - c.b2) / c.c2;
  return c.a1 * std::exp(-u1 * u1) + c.a2 * std::exp(-u2 * u2);
}

std::array<double, 6> gauss2_jacobian(const Gauss2Coefficients& c, double x) {
  const double u1 = (x - c.b1) / c.c1;
  const double u2 = (x - c.b2) / c.c2;
  const double e1 = std::exp(-u1 * u1);
  const double e2 = std::exp(-u2 * u2);
  return {
      e1,
      c.a1 * e1 * 2.0 * u1 / c.c1,
      c.a1 * e1 * 2.0 * u1 * u1 / c.c1,
      e2,
      c.a2 * e2 * 2.0 * u2 / c.c2,
      c.a2 * e2 * 2.0 * u2 * u2 / c.c2,
  };
}

Gauss2Coefficients gauss2_auto_init(std::span<const Gauss2Sample> samples) {
  if (samples.empty()) throw ConfigError("no samples to initialize from");
  auto peak = std::max_element(samples.begin(), samples.end(),
                               [](const auto& l, const auto& r) { return l.y < r.y; });
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                      [](const auto& l, const auto& r) { return l.x < r.x; });
  double range = hi->x - lo->x;
  if (!(range > 0.0)) range = 1.0;
  Gauss2Coefficients c;
  c.a1 = peak->y;
  c.b1 = peak->x;
  c.c1 = 0.5 * range;
  c.a2 = 0.05 * peak->y;
  c.b2 = lo->x;
  c.c2 = 0.1 * range;
  return c;
}

Gauss2FitReport fit_gauss2(std::span<const Gauss2Sample> samples,
                           std::optional<Gauss2Coefficients> init,
                           const Gauss2FitOptions& options) {
  if (samples.size() < 6) {
    throw ConfigError("Gauss2 fit needs at least 6 samples, got " + std::to_string(samples.size()));
  }
  for (const auto& s : samples) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) throw InputError("non-finite sample");
  }
  Gauss2Coefficients current = init ? *init : gauss2_auto_init(samples);
  current.validate();

  Gauss2FitReport report;
  double ssr = sum_squared_residuals(current, samples);
  report.ssr_history.push_back(ssr);
  double damping = options.initial_damping;

  for (std::size_t iter = 0; iter < options.max_iterations && !report.converged; ++iter) {
    Mat6 jtj = Mat6::Zero();
    Vec6 jtr = Vec6::Zero();
    for (const auto& s : samples) {
      const auto j = gauss2_jacobian(current, s.x);
      const Vec6 row = Eigen::Map<const Vec6>(j.data());
      const double r = s.y - eval_gauss2(current, s.x);
      jtj.noalias() += row * row.transpose();
      jtr += row * r;
    }
    // Floor the scaling so parameters with vanishing sensitivity stay solvable.
    const double diag_floor = 1e-12 * std::max(1.0, jtj.diagonal().maxCoeff());
    const Vec6 scale = jtj.diagonal().cwiseMax(diag_floor);

    bool accepted = false;
    while (damping < 1e20) {
      Mat6 lhs = jtj;
      lhs.diagonal() += damping * scale;
      const Vec6 step = lhs.ldlt().solve(jtr);
      auto trial_params = current.to_array();
      for (int i = 0; i < 6; ++i) trial_params[i] += step(i);
      const auto trial = Gauss2Coefficients::from_array(trial_params);
      const double trial_ssr = (trial.c1 == 0.0 || trial.c2 == 0.0)
                                   ? std::numeric_limits<double>::infinity()
                                   : sum_squared_residuals(trial, samples);
      if (std::isfinite(trial_ssr) && trial_ssr <= ssr) {
        const double improvement = ssr > 0.0 ? (ssr - trial_ssr) / ssr : 0.0;
        current = trial;
        ssr = trial_ssr;
        report.ssr_history.push_back(ssr);
        damping = std::max(damping / options.damping_factor, 1e-15);
        accepted = true;
        if (improvement < options.relative_tolerance) report.converged = true;
        break;
      }
      damping *= options.damping_factor;
    }
    report.iterations = iter + 1;
    // No damping level yields descent: the current point is stationary.
    if (!accepted) report.converged = true;
  }

  report.coefficients = canonical(current);
  std::vector<double> predicted(samples.size());
  std::vector<double> truth(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    predicted[i] = eval_gauss2(report.coefficients, samples[i].x);
    truth[i] = samples[i].y;
  }
  report.rmse = rmse(predicted, truth);
  try {
    report.r_squared = r_squared(predicted, truth);
  } catch (const MetricError&) {
    report.degenerate = true;
    report.r_squared = 0.0;
  }
  return report;
}

}  // namespace motortherm
