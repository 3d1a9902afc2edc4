// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace motortherm {

/// sqrt(mean((pred - truth)^2)). Throws ConfigError on empty or unequal inputs.
double rmse(std::span<const double> predictions, std::span<const double> truth);

/// max |pred - truth|. Throws ConfigError on empty or unequal inputs.
double max_abs_error(std::span<const double> predictions, std::span<const double> truth);

/// Coefficient of determination 1 - SS_res / SS_tot, SS_tot taken about the
/// mean of `truth`. Negative when the predictions are worse than that mean.
/// Throws MetricError when truth is constant.
double r_squared(std::span<const double> predictions, std::span<const double> truth);

}  // namespace motortherm
