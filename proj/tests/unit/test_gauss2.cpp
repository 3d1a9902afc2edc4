// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "motortherm/errors.hpp"
#include "motortherm/gauss2.hpp"
#include "motortherm/metrics.hpp"

using namespace motortherm;

namespace {

const Gauss2Coefficients kReference{34.07, 276.0, 743.2, 1.668, -26.71, 103.0};

double reference_value(double x) {
  const double u = (x - 276.0) / 743.2;
  const double v = (x + 26.71) / 103.0;
  return 34.07 * std::exp(-u * u) + 1.668 * std::exp(-v * v);
}

std::vector<Gauss2Sample> sample_curve(const Gauss2Coefficients& c, int n, double noise,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, noise > 0 ? noise : 1.0);
  std::vector<Gauss2Sample> out;
  for (int i = 0; i < n; ++i) {
    const double x = i;
    out.push_back({x, eval_gauss2(c, x) + (noise > 0 ? eps(rng) : 0.0)});
  }
  return out;
}

Gauss2Coefficients perturb(const Gauss2Coefficients& c, std::uint64_t seed, double frac) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-frac, frac);
  auto p = c.to_array();
  for (auto& v : p) v *= 1.0 + u(rng);
  return Gauss2Coefficients::from_array(p);
}

}  // namespace

TEST(Gauss2Eval, PeakOfSingleTerm) {
  const Gauss2Coefficients c{5.5, 12.0, 3.0, 0.0, 100.0, 2.0};
  EXPECT_EQ(eval_gauss2(c, 12.0), 5.5);
}

TEST(Gauss2Eval, ReferenceCoefficientsAtCenter) {
  EXPECT_NEAR(eval_gauss2(kReference, 276.0), reference_value(276.0), 1e-12);
  EXPECT_NEAR(eval_gauss2(kReference, 276.0), 34.0703, 5e-5);
}

TEST(Gauss2Eval, SingleTermIsSymmetric) {
  const Gauss2Coefficients c{2.0, 4.0, 1.5, 0.0, 0.0, 1.0};
  for (double d : {0.1, 0.7, 2.0, 5.0}) EXPECT_DOUBLE_EQ(eval_gauss2(c, 4.0 + d), eval_gauss2(c, 4.0 - d));
}

TEST(Gauss2Eval, InvariantUnderTermSwapAndWidthSign) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 50.0), w(0.5, 40.0);
  for (int i = 0; i < 100; ++i) {
    const Gauss2Coefficients c{u(rng), u(rng), w(rng), u(rng), u(rng), w(rng)};
    const Gauss2Coefficients swapped{c.a2, c.b2, c.c2, c.a1, c.b1, c.c1};
    const Gauss2Coefficients negated{c.a1, c.b1, -c.c1, c.a2, c.b2, -c.c2};
    const double x = u(rng);
    EXPECT_NEAR(eval_gauss2(c, x), eval_gauss2(swapped, x), 1e-12);
    EXPECT_EQ(eval_gauss2(c, x), eval_gauss2(negated, x));
  }
}

TEST(Gauss2Jacobian, CenterPartialsVanish) {
  const Gauss2Coefficients c{3.0, 1.0, 2.0, 0.0, 50.0, 1.0};
  const auto j = gauss2_jacobian(c, 1.0);
  EXPECT_EQ(j[1], 0.0);
  EXPECT_EQ(j[2], 0.0);
  EXPECT_EQ(j[0], 1.0);
}

TEST(Gauss2Jacobian, ZeroAmplitudeZeroesShapePartials) {
  const Gauss2Coefficients c{0.0, 1.0, 2.0, 1.0, 3.0, 4.0};
  const auto j = gauss2_jacobian(c, 2.5);
  EXPECT_EQ(j[1], 0.0);
  EXPECT_EQ(j[2], 0.0);
}

TEST(Gauss2Jacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> amp(-40.0, 40.0), ctr(-300.0, 300.0), wid(20.0, 800.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Gauss2Coefficients c{amp(rng), ctr(rng), wid(rng), amp(rng), ctr(rng), wid(rng)};
    const double x = ctr(rng);
    const auto analytic = gauss2_jacobian(c, x);
    const auto p = c.to_array();
    for (std::size_t k = 0; k < 6; ++k) {
      const double h = 1e-5 * std::max(1.0, std::abs(p[k]));
      auto up = p, dn = p;
      up[k] += h;
      dn[k] -= h;
      const double fd = (eval_gauss2(Gauss2Coefficients::from_array(up), x) -
                         eval_gauss2(Gauss2Coefficients::from_array(dn), x)) / (2.0 * h);
      const double scale = std::max({1.0, std::abs(analytic[k]), std::abs(fd)});
      EXPECT_LE(std::abs(analytic[k] - fd) / scale, 1e-6) << "trial " << trial << " param " << k;
    }
  }
}

TEST(Gauss2Fit, NoiselessRecoveryFromPerturbedStart) {
  const auto samples = sample_curve(kReference, 2000, 0.0, 0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto rep = fit_gauss2(samples, perturb(kReference, seed, 0.2));
    EXPECT_TRUE(rep.converged) << seed;
    EXPECT_LE(rep.rmse, 1e-6) << seed;
    EXPECT_GT(rep.r_squared, 0.999999);
  }
}

TEST(Gauss2Fit, NoisyFitMatchesNoiseLevel) {
  const auto samples = sample_curve(kReference, 2000, 0.08, 21);
  const auto rep = fit_gauss2(samples, perturb(kReference, 3, 0.2));
  EXPECT_GT(rep.rmse, 0.07);
  EXPECT_LT(rep.rmse, 0.09);
  EXPECT_GE(rep.r_squared, 0.98);
}

TEST(Gauss2Fit, AutoInitialisationFits) {
  const auto samples = sample_curve(kReference, 2000, 0.0, 0);
  const auto rep = fit_gauss2(samples);
  EXPECT_LE(rep.rmse, 0.1);
  EXPECT_GE(rep.r_squared, 0.999);
}

TEST(Gauss2Fit, SsrHistoryNeverIncreases) {
  const auto samples = sample_curve(kReference, 500, 0.3, 4);
  const auto rep = fit_gauss2(samples, perturb(kReference, 9, 0.3));
  ASSERT_GE(rep.ssr_history.size(), 2u);
  for (std::size_t i = 1; i < rep.ssr_history.size(); ++i)
    EXPECT_LE(rep.ssr_history[i], rep.ssr_history[i - 1]);
}

TEST(Gauss2Fit, ResultIsCanonical) {
  const Gauss2Coefficients flipped{1.668, -26.71, -103.0, 34.07, 276.0, -743.2};
  const auto samples = sample_curve(kReference, 800, 0.0, 0);
  const auto rep = fit_gauss2(samples, flipped);
  EXPECT_GT(rep.coefficients.c1, 0.0);
  EXPECT_GT(rep.coefficients.c2, 0.0);
  EXPECT_GE(rep.coefficients.a1, rep.coefficients.a2);
  EXPECT_NEAR(rep.coefficients.a1, 34.07, 1e-4);
}

TEST(Gauss2Fit, ConstantDataIsDegenerate) {
  std::vector<Gauss2Sample> samples;
  for (int i = 0; i < 50; ++i) samples.push_back({static_cast<double>(i), 3.0});
  const auto rep = fit_gauss2(samples);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_LE(rep.r_squared, 0.0);
  EXPECT_TRUE(std::isfinite(rep.rmse));
}

TEST(Gauss2Fit, TooFewSamples) {
  std::vector<Gauss2Sample> samples{{0, 1}, {1, 2}, {2, 3}, {3, 2}, {4, 1}};
  EXPECT_THROW(fit_gauss2(samples), ConfigError);
}

TEST(RSquared, Examples) {
  const std::vector<double> truth{1.0, 2.0, 3.0};
  EXPECT_EQ(r_squared(truth, truth), 1.0);
  const std::vector<double> mean{2.0, 2.0, 2.0};
  EXPECT_EQ(r_squared(mean, truth), 0.0);
  const std::vector<double> worse{1.0, 2.0, 5.0};
  EXPECT_DOUBLE_EQ(r_squared(worse, truth), -1.0);
  const std::vector<double> flat{4.0, 4.0, 4.0};
  EXPECT_THROW(r_squared(truth, flat), MetricError);
}
