// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "motortherm/linalg.hpp"

namespace motortherm {

inline constexpr std::size_t kJointCount = 7;

/// Lumped first-order thermal model of one joint motor:
///
///   C * dT/dt = k * tau^2 - (T - T_amb) / R
///
/// Joule heating is proportional to the squared joint torque, losses go to
/// ambient through a single thermal resistance.
struct ThermalPlantParams {
  double thermal_resistance = 1.0;   // K/W
  double thermal_capacitance = 100.0;  // J/K
  double heating_coefficient = 0.01;   // W/(N m)^2
  double ambient_temperature = 22.0;   // degC

  double time_constant() const { return thermal_resistance * thermal_capacitance; }

  /// Throws ConfigError when R <= 0, C <= 0, k < 0, or any field is non-finite.
  void validate() const;
};

/// Rows are samples spaced `dt` seconds apart, columns are joints.
struct TorqueTrace {
  double dt = 1.0;
  Matrix values;

  std::size_t samples() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t joints() const { return static_cast<std::size_t>(values.cols()); }
};

struct TemperatureTrace {
  double dt = 1.0;
  Matrix values;

  std::size_t samples() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t joints() const { return static_cast<std::size_t>(values.cols()); }
};

/// Equilibrium temperature under constant torque: T_amb + R k tau^2.
double steady_state_temperature(const ThermalPlantParams& params, double torque);

/// Integrates every joint with the exact exponential step for torque held
/// constant over each interval. Row 0 of the result is `initial`; row n+1 is
/// the response to torque row n. Returns as many rows as the torque trace.
TemperatureTrace simulate_plant(std::span<const ThermalPlantParams> params,
                                const TorqueTrace& torques,
                                std::span<const double> initial);

/// Staggered seven-joint parameter set. Joints 2 and 4 (indices 1 and 3) run
/// the hottest, as observed on real 7-DoF arms.
std::vector<ThermalPlantParams> default_robot_plant();

/// Peak torque per joint used by the synthetic robot, N m.
std::vector<double> default_torque_amplitudes();

}  // namespace motortherm
