#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qmg/clearing.hpp"

using namespace qmg;

namespace {

// E[(X - a)^+] for X ~ N(0, s^2) by Simpson quadrature over the tail.
double surplus_by_quadrature(double a, double s) {
  const int n = 20000;
  const double lo = a, hi = a + 40.0 * s, h = (hi - lo) / n;
  auto f = [&](double x) { return (x - a) * normal_pdf(x / s) / s; };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST(ProfitIntensity, MatchesTheTailIntegral) {
  for (double s : {0.5, 1.0, 3.0})
    for (double a : {-1.0, 0.0, 0.27, 1.5}) EXPECT_NEAR(profit_intensity(a, s), surplus_by_quadrature(a, s), 1e-10);
  EXPECT_NEAR(profit_intensity(0.0, 1.0), 1.0 / std::sqrt(2 * std::numbers::pi), 1e-15);
  EXPECT_THROW(profit_intensity(0.0, 0.0), InvalidParameter);
}

TEST(FixedPoint, FrozenReferenceValue) {
  // scipy brentq on phi(a) - a (1 - Phi(a)) - a with xtol 1e-15.
  EXPECT_NEAR(fixed_point(1.0), 0.2760298047981431, 1e-12);
}

TEST(FixedPoint, ScalesWithSigma) {
  const double a1 = fixed_point(1.0);
  for (double s : {0.01, 0.5, 2.0, 40.0}) EXPECT_NEAR(fixed_point(s), s * a1, 1e-11 * std::max(1.0, s));
}

TEST(FixedPoint, CustomIntensityAndBracketFailure) {
  EXPECT_NEAR(fixed_point(1.0, [](double a, double s) { return s * std::exp(-a); }), 0.5671432904097838, 1e-12);
  EXPECT_THROW(fixed_point(1.0, [](double a, double) { return a + 1.0; }), BracketingError);
}

TEST(Cooling, DescendingSigmasShrinkTheFixedPoint) {
  const std::vector<double> sigmas{4.0, 2.0, 1.0, 0.5};
  const auto rows = cooling_experiment(sigmas);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].fixed_point, rows[i - 1].fixed_point);
  for (const auto& r : rows) EXPECT_NEAR(r.max_intensity, r.fixed_point, 1e-11);
  const std::vector<double> bad{1.0, 2.0};
  EXPECT_THROW(cooling_experiment(bad), InvalidParameter);
}

TEST(MarketTemperature, InverseBetaAndThermalEnergy) {
  RiskParams r;
  const auto t = market_temperature(2.0, r);
  EXPECT_DOUBLE_EQ(t.temperature, 0.5);
  EXPECT_NEAR(t.energy, 0.5 / std::tanh(1.0), 1e-15);
}

TEST(Clearing, NeedsTwoTraders) {
  RandomSource rng(1);
  EXPECT_THROW(clear_round(MarketState({Strategy::gaussian(0, 1)}), ClearingPolicy::random(), rng), ContractViolation);
}

TEST(Clearing, FlowsBalanceAndOnlyRationalPairsTrade) {
  MarketState m({Strategy::gaussian(0, 1), Strategy::gaussian(0.5, 0.4), Strategy::hermite(1, {}),
                 Strategy::gaussian(-0.3, 0.8, 0.2, Representation::supply), Strategy::gaussian(1, 1)});
  ClearingEngine engine(m, ClearingPolicy::random());
  RandomSource rng(17);
  int executed = 0;
  for (int round = 0; round < 200; ++round) {
    const auto out = engine.round(rng);
    double total = 0.0;
    for (double f : out.flows) total += f;
    EXPECT_NEAR(total, 0.0, 1e-12);
    for (const auto& match : out.matches) {
      EXPECT_EQ(out.sides[match.buyer], Side::buyer);
      EXPECT_EQ(out.sides[match.seller], Side::seller);
      EXPECT_EQ(match.executed, out.log_prices[match.buyer] + out.log_prices[match.seller] <= 0.0);
      if (match.executed) {
        ++executed;
        EXPECT_NEAR(out.flows[match.buyer], -std::exp(-out.log_prices[match.buyer]), 1e-12);
      }
    }
  }
  EXPECT_GT(executed, 0);
}

TEST(Clearing, FixedDivisionAndImproperTakers) {
  // Trader 1 is an improper demand strategy sent to sell: it accepts any price.
  MarketState m({Strategy::delta(0.4), Strategy::delta(2.0)});
  Division d{{0}, {1}};
  RandomSource rng(0);
  const auto out = clear_round(m, ClearingPolicy::fixed_division(d), rng);
  ASSERT_EQ(out.matches.size(), 1u);
  EXPECT_TRUE(out.matches[0].executed);
  EXPECT_EQ(out.log_prices[1], -std::numeric_limits<double>::infinity());
  EXPECT_NEAR(out.flows[1], std::exp(-0.4), 1e-15);
}

TEST(Clearing, InvalidDivisionIsRejected) {
  MarketState m({Strategy::gaussian(0, 1), Strategy::gaussian(0, 1)});
  EXPECT_THROW(ClearingEngine(m, ClearingPolicy::fixed_division(Division{{0}, {0}})), InvalidParameter);
  EXPECT_THROW(ClearingEngine(m, ClearingPolicy::fixed_division(Division{{0}, {2}})), InvalidParameter);
}

TEST(Clearing, ByRepresentationAndDeterministicLog) {
  MarketState m({Strategy::gaussian(0, 1), Strategy::gaussian(0, 1, 0, Representation::supply),
                 Strategy::gaussian(-1, 0.5)});
  auto run = [&] {
    ClearingEngine e(m, ClearingPolicy::representation());
    RandomSource rng(5, 1);
    auto w = round_log_writer();
    for (int k = 0; k < 5; ++k) append_round_log(w, static_cast<std::size_t>(k), e.round(rng));
    return w.str();
  };
  const auto a = run();
  EXPECT_EQ(a, run());
  EXPECT_EQ(a.substr(0, a.find('\n')), "round,trader,side,logprice,executed,flow");
  EXPECT_NE(a.find("\n0,1,sell,"), std::string::npos);
  EXPECT_NE(a.find("\n0,2,buy,"), std::string::npos);
}
