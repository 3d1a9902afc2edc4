// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace motortherm {

/// f(x) = a1 exp(-((x - b1)/c1)^2) + a2 exp(-((x - b2)/c2)^2)
///
/// x is a sample index; amplitudes are in degC.
struct Gauss2Coefficients {
  double a1 = 0.0, b1 = 0.0, c1 = 1.0;
  double a2 = 0.0, b2 = 0.0, c2 = 1.0;

  /// Parameter order a1, b1, c1, a2, b2, c2 (also the Jacobian order).
  std::array<double, 6> to_array() const { return {a1, b1, c1, a2, b2, c2}; }
  static Gauss2Coefficients from_array(const std::array<double, 6>& p) {
    return {p[0], p[1], p[2], p[3], p[4], p[5]};
  }
  /// Throws ConfigError for zero widths or non-finite fields.
  void validate() const;
};

double eval_gauss2(const Gauss2Coefficients& coeffs, double x);

/// Analytic partial derivatives of f at x, ordered as Gauss2Coefficients::to_array.
std::array<double, 6> gauss2_jacobian(const Gauss2Coefficients& coeffs, double x);

struct Gauss2Sample {
  double x = 0.0;
  double y = 0.0;
};

struct Gauss2FitOptions {
  std::size_t max_iterations = 200;
  double initial_damping = 1e-3;
  double damping_factor = 10.0;
  /// Stop once an accepted step improves the SSR by less than this fraction.
  double relative_tolerance = 1e-10;
};

struct Gauss2FitReport {
  Gauss2Coefficients coefficients;
  double rmse = 0.0;
  /// 1 - SS_res/SS_tot. Set to 0 when the samples are constant (see `degenerate`).
  double r_squared = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// True when the samples are constant and R^2 is undefined.
  bool degenerate = false;
  /// Sum of squared residuals after every accepted step, starting with the initial guess.
  std::vector<double> ssr_history;
};

/// Large slow term at the peak plus a small early term.
Gauss2Coefficients gauss2_auto_init(std::span<const Gauss2Sample> samples);

/// Levenberg-Marquardt fit with Marquardt diagonal scaling. Non-convergence
/// is reported through `converged`, not thrown. The result is canonical:
/// c1, c2 > 0 and a1 >= a2. Throws ConfigError for fewer than six samples.
Gauss2FitReport fit_gauss2(std::span<const Gauss2Sample> samples,
                           std::optional<Gauss2Coefficients> init = std::nullopt,
                           const Gauss2FitOptions& options = {});

}  // namespace motortherm
