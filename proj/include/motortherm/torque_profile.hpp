// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "motortherm/thermal_plant.hpp"

namespace motortherm {

enum class ProfileKind {
  Step,             // 0 before a seeded instant, amplitude after
  Trapezoid,        // repeated ramp-hold-ramp-rest cycles
  RandomWalk,       // Gaussian increments reflected at +/- amplitude
  SinusoidMixture,  // three seeded sinusoids, |tau| <= amplitude
  Composite,        // dynamic and static regimes alternating at random times
};

ProfileKind parse_profile_kind(std::string_view name);
std::string_view to_string(ProfileKind kind);

/// One channel per entry of `amplitudes`. Each joint draws from its own
/// stream derived from (seed, joint index), so traces are bitwise
/// reproducible for a fixed seed. Requires duration > dt > 0.
TorqueTrace generate_torque_profile(ProfileKind kind, std::uint64_t seed, double duration,
                                    double dt, std::span<const double> amplitudes);

/// Same amplitude on every joint.
TorqueTrace generate_torque_profile(ProfileKind kind, std::uint64_t seed, double duration,
                                    double dt, double amplitude,
                                    std::size_t joints = kJointCount);

}  // namespace motortherm
