// SPDX-License-Identifier: Apache-2.0
#include "motortherm/torque_profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "motortherm/errors.hpp"

namespace motortherm {
namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t seconds_to_samples(double seconds, double dt) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(seconds / dt)));
}

void fill_step(std::span<double> out, double amplitude, Rng& rng) {
  const std::size_t n = out.size();
  const auto lo = std::max<std::size_t>(1, n / 10);
  const auto hi = std::max(lo, 2 * n / 5);
  const std::size_t instant = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  for (std::size_t k = 0; k < n; ++k) out[k] = k < instant ? 0.0 : amplitude;
}

void fill_trapezoid(std::span<double> out, double amplitude, double dt, Rng& rng) {
  std::size_t k = 0;
  while (k < out.size()) {
    const std::size_t rest = seconds_to_samples(uniform(rng, 10.0, 60.0), dt);
    const std::size_t up = seconds_to_samples(uniform(rng, 5.0, 30.0), dt);
    const std::size_t hold = seconds_to_samples(uniform(rng, 20.0, 120.0), dt);
    const std::size_t down = seconds_to_samples(uniform(rng, 5.0, 30.0), dt);
    const double sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    const double level = sign * amplitude * uniform(rng, 0.4, 1.0);
    for (std::size_t i = 0; i < rest && k < out.size(); ++i) out[k++] = 0.0;
    for (std::size_t i = 0; i < up && k < out.size(); ++i) {
      out[k++] = level * static_cast<double>(i + 1) / static_cast<double>(up);
    }
    for (std::size_t i = 0; i < hold && k < out.size(); ++i) out[k++] = level;
    for (std::size_t i = 0; i < down && k < out.size(); ++i) {
      out[k++] = level * (1.0 - static_cast<double>(i + 1) / static_cast<double>(down));
    }
  }
}

double reflect(double x, double bound) {
  while (x > bound || x < -bound) {
    x = x > bound ? 2.0 * bound - x : -2.0 * bound - x;
  }
  return x;
}

void fill_random_walk(std::span<double> out, double amplitude, double dt, double start, Rng& rng) {
  std::normal_distribution<double> step(0.0, 0.05 * amplitude * std::sqrt(dt));
  double x = std::clamp(start, -amplitude, amplitude);
  for (double& v : out) {
    x = reflect(x + step(rng), amplitude);
    v = x;
  }
}

void fill_sinusoids(std::span<double> out, double amplitude, double dt, Rng& rng) {
  constexpr int kTerms = 3;
  double period[kTerms], phase[kTerms], weight[kTerms];
  double total = 0.0;
  for (int i = 0; i < kTerms; ++i) {
    period[i] = uniform(rng, 20.0, 200.0);
    phase[i] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    weight[i] = uniform(rng, 0.2, 1.0);
    total += weight[i];
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double t = static_cast<double>(k) * dt;
    double v = 0.0;
    for (int i = 0; i < kTerms; ++i) {
      v += weight[i] * std::sin(2.0 * std::numbers::pi * t / period[i] + phase[i]);
    }
    out[k] = amplitude * v / total;
  }
}

// Alternates dynamic regimes (ramps, random walks, sinusoids) with static
// ones (rest at zero torque or a held level), each lasting 40-200 s.
void fill_composite(std::span<double> out, double amplitude, double dt, Rng& rng) {
  bool dynamic = uniform(rng, 0.0, 1.0) < 0.5;
  double last = 0.0;
  std::size_t k = 0;
  while (k < out.size()) {
    const std::size_t len =
        std::min(out.size() - k, seconds_to_samples(uniform(rng, 40.0, 200.0), dt));
    auto segment = out.subspan(k, len);
    const double pick = uniform(rng, 0.0, 1.0);
    if (dynamic) {
      if (pick < 1.0 / 3.0) {
        fill_trapezoid(segment, amplitude, dt, rng);
      } else if (pick < 2.0 / 3.0) {
        fill_random_walk(segment, amplitude, dt, last, rng);
      } else {
        fill_sinusoids(segment, amplitude, dt, rng);
      }
    } else {
      double level = 0.0;
      if (pick >= 0.5) {
        const double sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
        level = sign * amplitude * uniform(rng, 0.3, 1.0);
      }
      std::fill(segment.begin(), segment.end(), level);
    }
    last = segment.back();
    k += len;
    dynamic = !dynamic;
  }
}

}  // namespace

ProfileKind parse_profile_kind(std::string_view name) {
  if (name == "step") return ProfileKind::Step;
  if (name == "trapezoid") return ProfileKind::Trapezoid;
  if (name == "random_walk" || name == "random-walk") return ProfileKind::RandomWalk;
  if (name == "sinusoid" || name == "sinusoid_mixture") return ProfileKind::SinusoidMixture;
  if (name == "composite") return ProfileKind::Composite;
  throw ConfigError("unknown torque profile kind '" + std::string(name) + "'");
}

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Step: return "step";
    case ProfileKind::Trapezoid: return "trapezoid";
    case ProfileKind::RandomWalk: return "random_walk";
    case ProfileKind::SinusoidMixture: return "sinusoid_mixture";
    case ProfileKind::Composite: return "composite";
  }
  return "unknown";
}

TorqueTrace generate_torque_profile(ProfileKind kind, std::uint64_t seed, double duration,
                                    double dt, std::span<const double> amplitudes) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (!(duration > dt) || !std::isfinite(duration)) throw ConfigError("duration must exceed dt");
  if (amplitudes.empty()) throw ConfigError("at least one joint is required");
  for (double a : amplitudes) {
    if (!std::isfinite(a) || a < 0.0) throw ConfigError("torque amplitude must be finite and >= 0");
  }

  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  TorqueTrace trace;
  trace.dt = dt;
  trace.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(amplitudes.size()));

  std::vector<double> channel(n);
  for (std::size_t j = 0; j < amplitudes.size(); ++j) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(j), 0x7f4a7c15u};
    Rng rng(seq);
    const double a = amplitudes[j];
    switch (kind) {
      case ProfileKind::Step: fill_step(channel, a, rng); break;
      case ProfileKind::Trapezoid: fill_trapezoid(channel, a, dt, rng); break;
      case ProfileKind::RandomWalk: fill_random_walk(channel, a, dt, 0.0, rng); break;
      case ProfileKind::SinusoidMixture: fill_sinusoids(channel, a, dt, rng); break;
      case ProfileKind::Composite: fill_composite(channel, a, dt, rng); break;
    }
    for (std::size_t k = 0; k < n; ++k) {
      trace.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = channel[k];
    }
  }
  return trace;
}

TorqueTrace generate_torque_profile(ProfileKind kind, std::uint64_t seed, double duration,
                                    double dt, double amplitude, std::size_t joints) {
  const std::vector<double> amplitudes(joints, amplitude);
  return generate_torque_profile(kind, seed, duration, dt, amplitudes);
}

}  // namespace motortherm
