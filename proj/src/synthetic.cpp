// SPDX-License-Identifier: Apache-2.0
#include "motortherm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "motortherm/errors.hpp"

namespace motortherm {
namespace {

// Joint torque per motor current, N m / A.
constexpr JointVector kTorqueConstant = {11.0, 11.0, 11.0, 11.0, 7.6, 7.6, 7.6};
constexpr double kJointLimit = 2.5;  // rad
constexpr double kPeakVelocity = 0.4;  // rad/s

}  // namespace

void SyntheticRobotOptions::validate() const {
  if (plant.size() != kJointCount || torque_amplitudes.size() != kJointCount) {
    throw ConfigError("synthetic robot needs " + std::to_string(kJointCount) +
                      " plant parameter sets and torque amplitudes");
  }
  for (const auto& p : plant) p.validate();
  if (!initial_temperature.empty() && initial_temperature.size() != kJointCount) {
    throw ConfigError("initial temperature needs one value per joint");
  }
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (!(duration > dt)) throw ConfigError("duration must exceed dt");
  if (!(temperature_noise >= 0.0)) throw ConfigError("temperature noise must be >= 0");
}

std::vector<JointStateRecord> synthesize_trajectory(const SyntheticRobotOptions& options, std::uint64_t seed) {
  options.validate();
  const TorqueTrace torques = generate_torque_profile(options.profile, seed, options.duration, options.dt,
                                                      options.torque_amplitudes);
  std::vector<double> initial = options.initial_temperature;
  if (initial.empty()) {
    for (const auto& p : options.plant) initial.push_back(p.ambient_temperature);
  }
  const TemperatureTrace temps = simulate_plant(options.plant, torques, initial);

  const std::vector<double> velocity_amp(kJointCount, kPeakVelocity);
  const TorqueTrace velocity = generate_torque_profile(ProfileKind::SinusoidMixture, seed ^ 0x5bd1e995ull,
                                                       options.duration, options.dt, velocity_amp);

  std::mt19937_64 noise_rng(seed ^ 0x27d4eb2f165667c5ull);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<JointStateRecord> records(torques.samples());
  JointVector position{};
  for (std::size_t k = 0; k < records.size(); ++k) {
    auto& r = records[k];
    const auto row = static_cast<Eigen::Index>(k);
    r.timestamp = static_cast<double>(k) * options.dt;
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      const double tau = torques.values(row, col);
      const double next = std::clamp(position[j] + velocity.values(row, col) * options.dt, -kJointLimit, kJointLimit);
      r.position[j] = position[j];
      r.velocity[j] = (next - position[j]) / options.dt;
      position[j] = next;
      r.torque[j] = tau;
      r.current[j] = tau / kTorqueConstant[j];
      r.temperature[j] = temps.values(row, col);
      if (options.temperature_noise > 0.0) r.temperature[j] += options.temperature_noise * noise(noise_rng);
    }
  }
  return records;
}

}  // namespace motortherm
