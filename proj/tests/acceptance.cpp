// Acceptance run: one PASS/FAIL line per criterion, every tolerance fixed here.
// Usage: acceptance [path/to/qmg path/to/scenarios]

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qmg/qmg.hpp"

using namespace qmg;

namespace {

constexpr double kFixedPointPaper = 0.27603;
constexpr double kFixedPointTol = 1e-5;
constexpr double kFixedPointScalingTol = 1e-8;
constexpr double kFixedPointSeconds = 1.0;
constexpr double kThermalTol = 1e-8;
constexpr double kThermalSeconds = 10.0;
constexpr double kExcitedCenterTol = 1e-9;
constexpr double kNumericWignerTol = 1e-4;
constexpr double kUncertaintyTol = 1e-6;
constexpr double kCoherentFloor = -1e-10;
constexpr double kGiffenCeiling = -1e-4;
constexpr double kMarginalTol = 1e-5;
constexpr double kAuctionSigmas = 3.0;
constexpr double kZenoTol = 1e-12;
constexpr double kSpectrumTol = 1e-12;
constexpr double kVariationalSlack = 1e-6;
constexpr double kRoundTripTol = 1e-8;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome fixed_point_criterion() {
  const auto t0 = std::chrono::steady_clock::now();
  const double a1 = fixed_point(1.0);
  const double dt = seconds_since(t0);
  bool ok = std::abs(a1 - kFixedPointPaper) <= kFixedPointTol && dt < kFixedPointSeconds;
  double worst = 0.0;
  for (double s : {0.5, 2.0}) worst = std::max(worst, std::abs(fixed_point(s) - s * a1));
  ok = ok && worst <= kFixedPointScalingTol;
  return {ok, fmt("a(1)=%.10f in %.3gs, max |a(s)-s*a(1)|=%.2e", a1, dt, worst)};
}

Outcome thermal_criterion() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double b : {0.5, 1.0, 2.0}) {
    RiskParams risk;  // hbar_E = omega = 1, so beta hbar omega = b
    const double x = thermal_x(b, risk);
    const double sp = std::sqrt(risk.m / x);
    const double sq = std::sqrt(1.0 / (x * risk.m * risk.omega() * risk.omega()));
    const Grid pg(-6.0 * sp, 6.0 * sp, 201), qg(-6.0 * sq, 6.0 * sq, 201);
    const auto closed = thermal_wigner(b, risk, pg, qg, ThermalMode::closed());
    const auto series = thermal_wigner(b, risk, pg, qg, ThermalMode::series(200));
    for (std::size_t i = 0; i < closed.values().size(); ++i)
      worst = std::max(worst, std::abs(closed.values()[i] - series.values()[i]));
  }
  const double dt = seconds_since(t0);
  return {worst < kThermalTol && dt < kThermalSeconds, fmt("max diff %.2e, %.2fs", worst, dt)};
}

Outcome negativity_criterion() {
  RiskParams risk;
  const double hbar = risk.hbar_e;
  const Grid g0(-1.0, 1.0, 9);  // node 4 is the origin
  const double center = excited_wigner(1, risk, g0, g0)(4, 4);
  const double want = -1.0 / (std::numbers::pi * hbar);
  const Grid pg(-4.0, 4.0, 81), qg(-4.0, 4.0, 81);
  const auto closed = excited_wigner(1, risk, pg, qg);
  const auto numeric = wigner_transform(Strategy::hermite(1, risk), pg, qg, hbar);
  double worst = 0.0;
  for (std::size_t i = 0; i < closed.values().size(); ++i)
    worst = std::max(worst, std::abs(closed.values()[i] - numeric.values()[i]));
  const bool ok = std::abs(center - want) <= kExcitedCenterTol && worst <= kNumericWignerTol;
  return {ok, fmt("W1(0,0)=%.12f (want %.12f), numeric vs closed %.2e", center, want, worst)};
}

Outcome hudson_criterion() {
  const double hbar = 1.0;
  double worst_product = 0.0, lowest = 1.0;
  for (double r : {0.0, 0.5, -0.5, 0.9, -0.9}) {
    CoherentParams c{r, 0.8, 0.3, -0.2};
    const double dp = c.delta_p(hbar), dq = c.delta_q();
    const Grid pg(c.p0 - 9.0 * dp, c.p0 + 9.0 * dp, 301), qg(c.q0 - 9.0 * dq, c.q0 + 9.0 * dq, 301);
    const auto d = coherent_wigner(c, hbar, pg, qg);
    const auto m = d.moments();
    worst_product = std::max(worst_product, std::abs(m.sd_p * m.sd_q * std::sqrt(1.0 - r * r) - hbar / 2.0));
    lowest = std::min(lowest, d.minimum().value);
  }
  RiskParams risk;
  const double h2 = hudson_check(Strategy::hermite(2, risk), hbar).min_value;
  const Grid cg(-8.0, 8.0, 2048);
  const auto cat = superpose({Strategy::gaussian(-2.0, 0.5), Strategy::gaussian(2.0, 0.5)}, {1.0, 1.0}, cg);
  const double hc = hudson_check(cat, hbar).min_value;
  const bool ok = worst_product <= kUncertaintyTol && lowest >= kCoherentFloor && h2 < kGiffenCeiling &&
                  hc < kGiffenCeiling;
  return {ok, fmt("max |dp dq sqrt(1-r^2) - hbar/2|=%.2e, coherent min %.2e, hermite(2) min %.4f, cat min %.4f",
                  worst_product, lowest, h2, hc)};
}

Strategy random_superposition(RandomSource& rng, const Grid& grid) {
  const int parts = 1 + static_cast<int>(rng.uniform() * 3.0);
  std::vector<Strategy> s;
  std::vector<cplx> c;
  for (int k = 0; k < parts; ++k) {
    s.push_back(Strategy::gaussian(-1.5 + 3.0 * rng.uniform(), 0.4 + 0.6 * rng.uniform(), -1.0 + 2.0 * rng.uniform()));
    c.push_back(std::polar(0.3 + rng.uniform(), 2.0 * std::numbers::pi * rng.uniform()));
  }
  return superpose(s, c, grid);
}

Outcome marginals_criterion() {
  RandomSource rng(2024, 5);
  RiskParams risk;
  const double hbar = risk.hbar_eff();
  const Grid sg(-16.0, 16.0, 4096);
  const Grid qg(-10.0, 10.0, 201), pg(-12.0, 12.0, 201);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Strategy s = random_superposition(rng, sg);
    const Strategy sp = to_supply_rep(s, risk);
    const auto w = wigner_transform(s, pg, qg, hbar);
    const auto mq = w.marginal_q();
    const auto mp = w.marginal_p();
    for (std::size_t i = 0; i < qg.size(); ++i) worst = std::max(worst, std::abs(mq[i] - std::norm(s.amplitude(qg[i]))));
    for (std::size_t i = 0; i < pg.size(); ++i) worst = std::max(worst, std::abs(mp[i] - std::norm(sp.amplitude(pg[i]))));
  }
  return {worst <= kMarginalTol, fmt("max L-inf marginal error over 10 states %.2e", worst)};
}

Outcome auction_criterion() {
  AuctionInstance inst{{Strategy::gaussian(0, 1), Strategy::gaussian(0, 1)},
                       Strategy::gaussian(0, 1, 0, Representation::supply), Pricing::first, 1.0, 1000000, 99};
  const auto mc = run_auction(inst);
  const auto quad = transaction_probability(inst);
  const double p = 1.0 - mc.p_no_trade;
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(mc.samples));
  const double z = std::abs(p - quad.total) / se;

  AuctionInstance delta{{Strategy::delta(0.1), Strategy::delta(0.3)},
                        Strategy::delta(-1.0, Representation::supply), Pricing::first, 1.0, 1000, 1};
  const double first = run_auction(delta).revenue_mean;
  delta.pricing = Pricing::second;
  const double second = run_auction(delta).revenue_mean;
  const bool ok = z <= kAuctionSigmas && first == std::exp(-0.1) && second == std::exp(-0.3);
  return {ok, fmt("MC %.6f vs quadrature %.6f (%.2f SE); delta first %.17g second %.17g", p, quad.total, z, first,
                  second)};
}

Outcome vickrey_criterion() {
  const std::vector<double> bids{0.1, 0.3, 0.5, 0.7, 0.9};
  RandomSource rng(0, 0);
  const auto rep = vickrey_truthfulness_check(0.5, bids, {Strategy::discrete({0.3, 0.7})},
                                              Strategy::delta(-1.0, Representation::supply), rng);
  std::string set;
  for (auto i : rep.argmax_set) set += fmt("%s%.1f", set.empty() ? "" : ",", bids[i]);
  return {rep.exact && rep.truthful_in_argmax_set, fmt("exact=%d argmax set {%s}", rep.exact ? 1 : 0, set.c_str())};
}

Outcome zeno_criterion() {
  const auto run = ZenoRun::from_coefficients({1.0, 1.0}, std::numbers::pi, 1);
  const double s1 = survival_probability(run, 1), s2 = survival_probability(run, 2);
  const std::vector<std::size_t> ns{1, 10, 100, 1000};
  const auto rows = freeze_experiment(run, ns);
  bool increasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i) increasing = increasing && rows[i].survival > rows[i - 1].survival;
  bool eigen = true;
  RiskParams risk;
  for (int k = 0; k < 6; ++k) {
    const auto e = ZenoRun::from_strategy(Strategy::hermite(k, risk), 2.7, 1, risk);
    for (std::size_t n : {1, 2, 3, 10, 1000}) eigen = eigen && survival_probability(e, n) == 1.0;
  }
  const bool ok = std::abs(s1) <= kZenoTol && std::abs(s2 - 0.25) <= kZenoTol && increasing &&
                  rows.back().survival > 0.99 && eigen;
  return {ok, fmt("S(1)=%.2e S(2)=%.15f S(1000)=%.6f increasing=%d eigenstates exact=%d", s1, s2,
                  rows.back().survival, increasing ? 1 : 0, eigen ? 1 : 0)};
}

Outcome spectrum_criterion() {
  double worst = 0.0;
  for (double hbar : {0.5, 1.0, 3.0})
    for (double theta : {0.7, 2.0 * std::numbers::pi, 10.0}) {
      RiskParams r{hbar, theta, 1.3, 0.0};
      const double e0 = spectrum(r, 1).ground();
      worst = std::max(worst, std::abs(e0 * 2.0 * theta - r.h_e()) / r.h_e());
    }
  const double eff = effective_planck(RiskParams{1.0, 2.0 * std::numbers::pi, 1.0, 0.75});
  RandomSource rng(77, 3);
  double min_gap = 1e300;
  for (int i = 0; i < 100; ++i) {
    RiskParams r{0.5 + rng.uniform(), 2.0 + 8.0 * rng.uniform(), 0.5 + rng.uniform(), 0.8 * rng.uniform()};
    Strategy s = i % 2 == 0 ? Strategy::gaussian(-1.0 + 2.0 * rng.uniform(), 0.2 + 1.5 * rng.uniform(),
                                                 -2.0 + 4.0 * rng.uniform())
                            : random_superposition(rng, Grid(-12.0, 12.0, 2048));
    min_gap = std::min(min_gap, risk_expectation(s, r) - r.hbar_eff() * r.omega() / 2.0);
  }
  const bool ok = worst <= kSpectrumTol && eff == 1.25 && min_gap >= -kVariationalSlack;
  return {ok, fmt("max rel |E0*2theta - h_E| %.2e, effective_planck(1,0.75)=%.17g, min <H>-E0 %.3e", worst, eff,
                  min_gap)};
}

Outcome fourier_criterion() {
  RiskParams risk;
  const Grid g(-20.0, 20.0, 2048);
  std::vector<Strategy> states{Strategy::gaussian(0.3, 0.8, 0.5), Strategy::gaussian(-1.0, 1.5)};
  for (int n = 0; n <= 5; ++n) states.push_back(Strategy::hermite(n, risk));
  double worst = 0.0;
  for (const auto& s : states) {
    const auto a = s.sample(g);
    const auto p = fourier_q_to_p(a, g, 1.0);
    const auto back = fourier_p_to_q(p.amplitudes, p.grid, 1.0, g.lo());
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) err += std::norm(back.amplitudes[i] - a[i]);
    worst = std::max(worst, std::sqrt(err * g.spacing()));
  }
  return {worst < kRoundTripTol, fmt("max L2 round-trip error %.2e over gaussian and hermite(0..5)", worst)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism_criterion(const std::string& cli, const std::string& scenarios) {
  namespace fs = std::filesystem;
  std::size_t compared = 0;
  std::string mismatch;
  if (cli.empty()) return {false, "no CLI path given"};
  const fs::path root = fs::temp_directory_path() / fs::path("qmg_acceptance_" + std::to_string(::getpid()));
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(scenarios))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto stem = f.stem().string();
    for (const char* run : {"a", "b"}) {
      const std::string cmd = "\"" + cli + "\" run \"" + f.string() + "\" --out \"" + (root / run / stem).string() +
                              "\" > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) return {false, "scenario " + stem + " failed to run"};
    }
    for (const auto& e : fs::directory_iterator(root / "a" / stem)) {
      if (e.path().extension() != ".csv") continue;
      ++compared;
      if (slurp(e.path()) != slurp(root / "b" / stem / e.path().filename()))
        mismatch += stem + "/" + e.path().filename().string() + " ";
    }
  }
  fs::remove_all(root);
  return {mismatch.empty() && compared > 0,
          fmt("%zu CSVs from %zu scenarios compared%s%s", compared, files.size(), mismatch.empty() ? "" : "; differ: ",
              mismatch.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::string scenarios = argc > 2 ? argv[2] : "scenarios";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"fixed point", fixed_point_criterion},
      {"thermal closed form vs series", thermal_criterion},
      {"Wigner negativity", negativity_criterion},
      {"uncertainty and Hudson", hudson_criterion},
      {"Wigner marginals", marginals_criterion},
      {"auction oracle equivalence", auction_criterion},
      {"Vickrey truthfulness", vickrey_criterion},
      {"Zeno freezing", zeno_criterion},
      {"risk spectrum", spectrum_criterion},
      {"Fourier round trip", fourier_criterion},
      {"determinism", [&] { return determinism_criterion(cli, scenarios); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
