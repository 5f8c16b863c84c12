#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qmg/literal.hpp"
#include "qmg/strategy.hpp"

using namespace qmg;

namespace {

// <p|psi> of the Gaussian with |psi(q)|^2 = N(c, w^2) and momentum kappa, done by hand.
cplx gaussian_supply(double c, double w, double kappa, double hbar, double p) {
  const double d = kappa - p / hbar;
  const double mod = std::pow(2.0 * std::numbers::pi * w * w, -0.25) / std::sqrt(2.0 * std::numbers::pi * hbar) *
                     2.0 * w * std::sqrt(std::numbers::pi) * std::exp(-w * w * d * d);
  return std::polar(mod, d * c);
}

}  // namespace

TEST(RiskParams, DerivedConstants) {
  RiskParams r{2.0, std::numbers::pi, 0.5, 0.0};
  EXPECT_DOUBLE_EQ(r.omega(), 2.0);
  EXPECT_DOUBLE_EQ(r.h_e(), 4.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(r.sigma_q0() * r.sigma_p0(), r.hbar_eff() / 2.0);
  EXPECT_THROW((RiskParams{0.0}.validate()), InvalidParameter);
  EXPECT_THROW((RiskParams{1.0, 1.0, 1.0, -0.1}.validate()), InvalidParameter);
}

TEST(HermiteFunctions, OrthonormalOnAGrid) {
  const Grid g(-14.0, 14.0, 2801);
  const int nmax = 12;
  std::vector<std::vector<double>> phi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) phi[i] = hermite_functions(nmax, g[i]);
  for (int a = 0; a <= nmax; a += 3)
    for (int b = 0; b <= nmax; b += 2) {
      std::vector<double> f(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) f[i] = phi[i][a] * phi[i][b];
      EXPECT_NEAR(integrate(f, g), a == b ? 1.0 : 0.0, 1e-12) << a << "," << b;
    }
  // phi_2 from the explicit polynomial (4x^2 - 2) e^{-x^2/2} / sqrt(8 sqrt(pi)).
  const double x = 0.37;
  EXPECT_NEAR(hermite_function(2, x),
              (4 * x * x - 2) * std::exp(-x * x / 2) / std::sqrt(8.0 * std::sqrt(std::numbers::pi)), 1e-14);
}

TEST(Strategy, ValidatesForms) {
  EXPECT_THROW(Strategy::gaussian(0.0, 0.0), InvalidParameter);
  EXPECT_THROW(Strategy::hermite(-1, {}), InvalidParameter);
  EXPECT_THROW(Strategy::discrete({}), InvalidParameter);
  EXPECT_THROW(Strategy::sampled(Grid(0, 1, 8), std::vector<cplx>(7, 1.0)), ContractViolation);
  EXPECT_THROW(Strategy::sampled(Grid(0, 1, 8), std::vector<cplx>(8, 0.0)), DegenerateState);
}

TEST(Strategy, ImproperStatesRefuseDensityOperations) {
  const auto d = Strategy::delta(0.3);
  EXPECT_TRUE(d.is_improper());
  EXPECT_THROW(normalize(d), ImproperState);
  EXPECT_THROW(to_supply_rep(d, {}), ImproperState);
  EXPECT_THROW(d.amplitude(0.3), ImproperState);
  EXPECT_THROW(moments(d), ImproperState);
}

TEST(Strategy, NormalizeOnlyRescales) {
  const Grid g(-8.0, 8.0, 513);
  std::vector<cplx> a(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) a[i] = cplx(3.0, -1.0) * std::exp(-g[i] * g[i]);
  const auto s = normalize(Strategy::sampled(g, a));
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-13);
  const cplx ratio = s.amplitude(g[200]) / a[200];
  EXPECT_NEAR(ratio.imag(), 0.0, 1e-14);
  EXPECT_GT(ratio.real(), 0.0);
}

TEST(Supply, ShiftedGaussianMatchesClosedForm) {
  for (double hbar : {0.5, 1.0, 2.0}) {
    RiskParams risk{hbar};
    const double c = 0.7, w = 0.6, kappa = -0.9;
    const auto s = to_supply_rep(Strategy::gaussian(c, w, kappa), risk);
    EXPECT_EQ(s.representation(), Representation::supply);
    for (double p = -3.0; p <= 3.0; p += 0.173) {
      const cplx want = gaussian_supply(c, w, kappa, hbar, p);
      EXPECT_LT(std::abs(s.amplitude(p) - want), 1e-8) << "hbar=" << hbar << " p=" << p;
    }
    const auto m = moments(s);
    EXPECT_NEAR(m.mean, hbar * kappa, 1e-8);
    EXPECT_NEAR(m.std, hbar / (2.0 * w), 1e-8);
  }
}

TEST(Supply, SelfDualWidthKeepsTheSpread) {
  const double hbar = 1.0;
  const auto s = Strategy::gaussian(0.0, std::sqrt(hbar / 2.0));
  const auto p = to_supply_rep(s, {hbar});
  EXPECT_NEAR(moments(p).std, moments(s).std, 1e-9);
}

TEST(Supply, HermitePicksUpPhase) {
  RiskParams risk;
  for (int n = 0; n <= 4; ++n) {
    const auto num = to_supply_rep(Strategy::hermite(n, risk), risk);
    const auto exact = Strategy::hermite(n, risk, Representation::supply);
    for (double p = -3.0; p <= 3.0; p += 0.25) EXPECT_LT(std::abs(num.amplitude(p) - exact.amplitude(p)), 1e-8);
  }
}

TEST(Supply, EffectivePlanckWidensTheTransform) {
  RiskParams plain{1.0}, nc{1.0, 2.0 * std::numbers::pi, 1.0, 0.75};
  const auto s = Strategy::gaussian(0.0, 0.5);
  EXPECT_NEAR(moments(to_supply_rep(s, nc)).std / moments(to_supply_rep(s, plain)).std, 1.25, 1e-9);
}

TEST(Supply, RepresentationMismatchIsAnError) {
  const auto s = Strategy::gaussian(0.0, 1.0, 0.0, Representation::supply);
  EXPECT_THROW(to_supply_rep(s, {}), RepresentationMismatch);
  EXPECT_THROW(to_demand_rep(Strategy::gaussian(0, 1), {}), RepresentationMismatch);
  EXPECT_THROW(buy_probability(s, 0.0), RepresentationMismatch);
  EXPECT_THROW(sell_probability(Strategy::gaussian(0, 1), 0.0), RepresentationMismatch);
}

TEST(Supply, SampledRoundTripLandsOnTheOriginalNodes) {
  const Grid g(-9.0, 11.0, 1000);
  std::vector<cplx> a(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    a[i] = std::polar(std::exp(-0.5 * (g[i] - 1) * (g[i] - 1)) + 0.5 * std::exp(-(g[i] + 2) * (g[i] + 2)), 0.3 * g[i]);
  RiskParams risk;
  const auto s = Strategy::sampled(g, a);
  const auto back = to_demand_rep(to_supply_rep(s, risk), risk);
  const auto& smp = std::get<SampledForm>(back.form());
  ASSERT_EQ(smp.grid.size(), g.size());
  EXPECT_NEAR(smp.grid.lo(), g.lo(), 1e-9);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LT(std::abs(smp.amplitudes[i] - a[i]), 1e-10);
}

TEST(Probabilities, BuyAndSellAreGaussianCdfs) {
  const auto d = Strategy::gaussian(0.2, 0.5);
  EXPECT_NEAR(buy_probability(d, 0.2), 0.5, 1e-15);
  EXPECT_NEAR(buy_probability(d, 0.7), normal_cdf(1.0), 1e-15);
  const auto s = Strategy::gaussian(-0.1, 2.0, 0.0, Representation::supply);
  // sells at price c or more iff p <= ln(1/c)
  EXPECT_NEAR(sell_probability(s, 0.1), 0.5, 1e-15);
  EXPECT_NEAR(sell_probability(s, -1.9), normal_cdf(1.0), 1e-15);
  // monotone: higher price, more likely to buy-at-or-below, less likely to sell
  EXPECT_LT(buy_probability(d, 0.0), buy_probability(d, 0.1));
  EXPECT_GT(sell_probability(s, 0.0), sell_probability(s, 0.1));
}

TEST(Probabilities, SellFromDemandPictureUsesTheTransform) {
  RiskParams risk;
  const auto d = Strategy::gaussian(0.0, 0.5, 1.0);  // p ~ N(1, 1)
  EXPECT_NEAR(sell_probability(d, -1.0, risk), 0.5, 1e-6);
}

TEST(PriceMeasure, DiscreteMergesAndWeights) {
  const auto m = price_measure(Strategy::discrete({0.3, 0.1, 0.3}, {1.0, cplx(0, 1), 1.0}));
  ASSERT_TRUE(m.is_atomic());
  EXPECT_EQ(m.atoms()->points, (std::vector<double>{0.1, 0.3}));
  EXPECT_NEAR(m.atoms()->weights[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.cdf(0.3), 1.0, 1e-15);
  EXPECT_NEAR(m.cdf_below(0.3), 1.0 / 3.0, 1e-15);
}

TEST(PriceMeasure, TabulatedHermiteSamplesHaveTheRightVariance) {
  RiskParams risk;
  const auto m = price_measure(Strategy::hermite(1, risk));
  RandomSource rng(1);
  CompensatedSum s2;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = m.sample(rng);
    s2.add(x * x);
  }
  EXPECT_NEAR(s2.value() / n, 1.5, 0.02);  // (2n+1) sigma0^2 with sigma0^2 = 1/2
}

TEST(Superpose, CatStateIsNormalizedAndSymmetric) {
  const Grid g(-8, 8, 1025);
  const auto cat = superpose({Strategy::gaussian(-2, 0.5), Strategy::gaussian(2, 0.5)}, {1.0, 1.0}, g);
  EXPECT_NEAR(cat.norm_squared(), 1.0, 1e-12);
  EXPECT_NEAR(moments(cat).mean, 0.0, 1e-12);
  // each lobe contributes 4 + w^2, the overlap term e^{-8} has variance w^2
  const double ov = std::exp(-8.0);
  EXPECT_NEAR(moments(cat).std, std::sqrt((4.25 + 0.25 * ov) / (1.0 + ov)), 1e-6);
}

TEST(Literal, ParsesEveryFamily) {
  RiskParams risk;
  const auto g = parse_strategy("gaussian(0.5, 2, -1)");
  EXPECT_EQ(std::get<GaussianForm>(g.form()).slope, -1.0);
  EXPECT_EQ(std::get<HermiteForm>(parse_strategy(" hermite( 3 ) ", Representation::supply, risk).form()).order, 3);
  EXPECT_EQ(std::get<DeltaForm>(parse_strategy("delta(-0.5)").form()).location, -0.5);
  EXPECT_EQ(std::get<DiscreteForm>(parse_strategy("discrete(0.1,0.3)").form()).locations.size(), 2u);
  EXPECT_THROW(parse_strategy("gaussian(1)"), InvalidParameter);
  EXPECT_THROW(parse_strategy("hermite(1.5)"), InvalidParameter);
  EXPECT_THROW(parse_strategy("lorentz(1, 2)"), InvalidParameter);
  EXPECT_THROW(parse_strategy("gaussian(1, x)"), InvalidParameter);
  EXPECT_THROW(parse_strategy("gaussian"), InvalidParameter);
}
