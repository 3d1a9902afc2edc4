// SPDX-License-Identifier: Apache-2.0
#include "motortherm/thermal_plant.hpp"

#include <cmath>
#include <string>

#include "motortherm/errors.hpp"

namespace motortherm {

void ThermalPlantParams::validate() const {
  if (!std::isfinite(thermal_resistance) || !std::isfinite(thermal_capacitance) ||
      !std::isfinite(heating_coefficient) || !std::isfinite(ambient_temperature)) {
    throw ConfigError("thermal plant parameters must be finite");
  }
  if (thermal_resistance <= 0.0) throw ConfigError("thermal resistance must be > 0");
  if (thermal_capacitance <= 0.0) throw ConfigError("thermal capacitance must be > 0");
  if (heating_coefficient < 0.0) throw ConfigError("heating coefficient must be >= 0");
}

double steady_state_temperature(const ThermalPlantParams& params, double torque) {
  return params.ambient_temperature +
         params.thermal_resistance * params.heating_coefficient * torque * torque;
}

TemperatureTrace simulate_plant(std::span<const ThermalPlantParams> params,
                                const TorqueTrace& torques,
                                std::span<const double> initial) {
  if (!(torques.dt > 0.0) || !std::isfinite(torques.dt)) {
    throw ConfigError("sampling interval dt must be > 0");
  }
  if (torques.samples() == 0) throw ConfigError("torque trace is empty");
  const std::size_t joints = torques.joints();
  if (params.size() != joints || initial.size() != joints) {
    throw ConfigError("expected " + std::to_string(joints) +
                      " plant parameter sets and initial temperatures, got " +
                      std::to_string(params.size()) + " and " + std::to_string(initial.size()));
  }
  for (const auto& p : params) p.validate();
  if (!torques.values.allFinite()) throw InputError("torque trace contains a non-finite value");
  for (double t0 : initial) {
    if (!std::isfinite(t0)) throw InputError("initial temperature must be finite");
  }

  TemperatureTrace out;
  out.dt = torques.dt;
  out.values.resize(torques.values.rows(), torques.values.cols());
  for (std::size_t j = 0; j < joints; ++j) {
    const auto& p = params[j];
    const double decay = std::exp(-torques.dt / p.time_constant());
    double temp = initial[j];
    const auto col = static_cast<Eigen::Index>(j);
    for (Eigen::Index k = 0; k < torques.values.rows(); ++k) {
      out.values(k, col) = temp;
      const double eq = steady_state_temperature(p, torques.values(k, col));
      temp = eq + (temp - eq) * decay;
    }
  }
  return out;
}

std::vector<ThermalPlantParams> default_robot_plant() {
  // R [K/W], C [J/K], k [W/(N m)^2], T_amb [degC]. Under the default
  // amplitudes the hottest joints swing a few degC over a run.
  return {
      {0.8, 150.0, 0.008, 22.0},
      {0.8, 200.0, 0.008, 22.0},
      {0.8, 150.0, 0.008, 22.0},
      {0.8, 180.0, 0.012, 22.0},
      {1.0, 100.0, 0.020, 22.0},
      {1.0, 100.0, 0.020, 22.0},
      {1.2, 80.0, 0.032, 22.0},
  };
}

std::vector<double> default_torque_amplitudes() {
  return {10.0, 25.0, 10.0, 18.0, 5.0, 5.0, 3.0};
}

}  // namespace motortherm
