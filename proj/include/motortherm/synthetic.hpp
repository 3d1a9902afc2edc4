// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "motortherm/dataset.hpp"
#include "motortherm/thermal_plant.hpp"
#include "motortherm/torque_profile.hpp"

namespace motortherm {

/// Settings for one synthetic run of the seven-joint arm.
struct SyntheticRobotOptions {
  std::vector<ThermalPlantParams> plant = default_robot_plant();
  std::vector<double> torque_amplitudes = default_torque_amplitudes();
  ProfileKind profile = ProfileKind::Composite;
  double duration = 900.0;  // s
  double dt = 1.0;          // s
  /// Start temperature per joint; empty means each joint's ambient.
  std::vector<double> initial_temperature;
  /// Standard deviation of additive sensor noise on the temperature channels.
  double temperature_noise = 0.0;

  void validate() const;
};

/// Torques from the profile generator, temperatures from the thermal plant,
/// and kinematic/current channels derived so every CSV column is populated.
/// Deterministic in (options, seed).
std::vector<JointStateRecord> synthesize_trajectory(const SyntheticRobotOptions& options, std::uint64_t seed);

}  // namespace motortherm
