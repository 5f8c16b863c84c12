#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qmg/risk.hpp"
#include "qmg/wigner.hpp"

using namespace qmg;

TEST(EffectivePlanck, PythagoreanCombination) {
  EXPECT_EQ(effective_planck(RiskParams{1.0, 1.0, 1.0, 0.75}), 1.25);
  EXPECT_EQ(effective_planck(RiskParams{3.0, 1.0, 1.0, 4.0}), 5.0);
  EXPECT_EQ(effective_planck(RiskParams{0.4}), 0.4);
}

TEST(Spectrum, EquallySpacedLevels) {
  RiskParams r{0.7, 1.3, 2.0, 0.2};
  const auto s = spectrum(r, 6);
  const double quantum = effective_planck(r) * r.omega();
  ASSERT_EQ(s.eigenvalues.size(), 6u);
  EXPECT_DOUBLE_EQ(s.ground(), quantum / 2);
  for (std::size_t n = 1; n < 6; ++n) EXPECT_NEAR(s.eigenvalues[n] - s.eigenvalues[n - 1], quantum, 1e-14);
  EXPECT_THROW(spectrum(r, 0), InvalidParameter);
}

TEST(Spectrum, GroundLevelTimesTransactionTimeIsPlanck) {
  for (double hbar : {0.3, 1.0, 7.0})
    for (double theta : {0.1, 1.0, 50.0}) {
      RiskParams r{hbar, theta};
      EXPECT_NEAR(spectrum(r, 1).ground() * 2 * theta, r.h_e(), 1e-12 * r.h_e());
    }
}

TEST(RiskExpectation, EigenstatesGiveTheirEigenvalues) {
  RiskParams r{1.0, 2.0 * std::numbers::pi / 1.7, 0.6, 0.0};
  const auto s = spectrum(r, 4);
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(risk_expectation(Strategy::hermite(n, r), r), s.eigenvalues[n], 1e-8) << n;
}

TEST(RiskExpectation, GaussianClosedForm) {
  // <H> = (hbar / 2w)^2 / 2m + m omega^2 w^2 / 2 for |psi|^2 = N(c, w^2); the center and momentum drop out.
  RiskParams r{1.0, 2.0, 1.5};
  for (double w : {0.2, 0.5, 1.3}) {
    const double want = std::pow(1.0 / (2 * w), 2) / (2 * r.m) + r.m * r.omega() * r.omega() * w * w / 2;
    EXPECT_NEAR(risk_expectation(Strategy::gaussian(0.4, w, -1.1), r), want, 1e-8 * want) << w;
  }
}

TEST(RiskExpectation, VariationalBoundOnRandomStates) {
  RandomSource rng(5, 2);
  for (int i = 0; i < 30; ++i) {
    RiskParams r{0.5 + rng.uniform(), 1.0 + 5.0 * rng.uniform(), 0.5 + rng.uniform(), 0.5 * rng.uniform()};
    const auto s = Strategy::gaussian(rng.normal(), 0.1 + rng.uniform(), rng.normal());
    EXPECT_GE(risk_expectation(s, r), effective_planck(r) * r.omega() / 2 - 1e-9);
  }
}

TEST(Thermal, EnergyIsTheGibbsAverage) {
  RiskParams r{1.0, 2.0 * std::numbers::pi / 0.9};
  for (double beta : {0.3, 1.0, 4.0}) {
    const auto w = gibbs_weights(beta, r, 400);
    const auto s = spectrum(r, 400);
    double avg = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) avg += w[n] * s.eigenvalues[n];
    EXPECT_NEAR(thermal_energy(beta, r), avg, 1e-12 * avg);
  }
  EXPECT_THROW(thermal_x(0.0, r), InvalidParameter);
}

TEST(Thermal, ZeroTemperatureLimitIsTheGround) {
  RiskParams r;
  EXPECT_NEAR(thermal_energy(60.0, r), spectrum(r, 1).ground(), 1e-15);
}
