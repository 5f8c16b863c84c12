#pragma once

// Trader against the Rest of the World: profit intensity and its fixed
// point, the cooling table, market temperature and one round of the
// projective clearing transaction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "qmg/csv.hpp"
#include "qmg/errors.hpp"
#include "qmg/numerics.hpp"
#include "qmg/risk.hpp"
#include "qmg/strategy.hpp"

namespace qmg {

// ---------------------------------------------------------------------------
// Profit intensity

/// Expected surplus E[(X - a)^+] of a Gaussian RW log-price X ~ N(0, sigma^2)
/// over the threshold a: sigma [phi(a/sigma) - (a/sigma)(1 - Phi(a/sigma))].
inline double profit_intensity(double a, double rw_sigma) {
  if (!(rw_sigma > 0)) throw InvalidParameter("profit_intensity: sigma must be > 0");
  const double z = a / rw_sigma;
  return rw_sigma * (normal_pdf(z) - z * normal_cdf(-z));
}

using IntensityFn = std::function<double(double a, double rw_sigma)>;

/// Root of intensity(a) = a on (0, 5 sigma).
inline double fixed_point(double rw_sigma, const IntensityFn& intensity = profit_intensity,
                          double tol = 1e-12) {
  if (!(rw_sigma > 0)) throw InvalidParameter("fixed_point: sigma must be > 0");
  return find_root([&](double a) { return intensity(a, rw_sigma) - a; }, 0.0, 5.0 * rw_sigma, tol);
}

struct CoolingRow {
  double sigma;
  double fixed_point;
  double max_intensity;
};

/// One row per RW dispersion, in the given (non-increasing) order.
inline std::vector<CoolingRow> cooling_experiment(std::span<const double> sigmas) {
  if (sigmas.empty()) throw InvalidParameter("cooling_experiment: no sigmas");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0)) throw InvalidParameter("cooling_experiment: sigmas must be > 0");
    if (i > 0 && sigmas[i] > sigmas[i - 1])
      throw InvalidParameter("cooling_experiment: sigmas must be descending");
  }
  std::vector<CoolingRow> rows;
  rows.reserve(sigmas.size());
  for (double s : sigmas) {
    const double a = fixed_point(s);
    rows.push_back({s, a, profit_intensity(a, s)});
  }
  return rows;
}

struct MarketTemperature {
  double temperature;
  double energy;
};

inline MarketTemperature market_temperature(double beta, const RiskParams& risk) {
  if (!(beta > 0) || !std::isfinite(beta)) throw InvalidParameter("market_temperature: beta must be > 0");
  return {1.0 / beta, thermal_energy(beta, risk)};
}

// ---------------------------------------------------------------------------
// Clearing

enum class Side { buyer, seller };

inline const char* to_string(Side s) { return s == Side::buyer ? "buy" : "sell"; }

/// Split of the traders into buyers {k_d} and sellers {k_s}.
struct Division {
  std::vector<std::size_t> buyers;
  std::vector<std::size_t> sellers;

  void validate(std::size_t n_traders) const {
    std::vector<int> seen(n_traders, 0);
    for (auto k : buyers) {
      if (k >= n_traders) throw InvalidParameter("division: buyer index out of range");
      ++seen[k];
    }
    for (auto k : sellers) {
      if (k >= n_traders) throw InvalidParameter("division: seller index out of range");
      ++seen[k];
    }
    for (int c : seen)
      if (c != 1) throw InvalidParameter("division: buyers and sellers must partition the traders");
  }
};

struct ClearingPolicy {
  enum class Kind {
    random_half,        // each trader buys with probability 1/2
    fixed,              // the given division every round
    by_representation,  // demand-picture traders buy, supply-picture ones sell
  };
  Kind kind = Kind::random_half;
  std::optional<Division> division{};
  RiskParams risk{};

  static ClearingPolicy random(RiskParams r = {}) { return {Kind::random_half, std::nullopt, r}; }
  static ClearingPolicy fixed_division(Division d, RiskParams r = {}) { return {Kind::fixed, std::move(d), r}; }
  static ClearingPolicy representation(RiskParams r = {}) {
    return {Kind::by_representation, std::nullopt, r};
  }
};

struct Match {
  std::size_t buyer;
  std::size_t seller;
  bool executed;
};

/// Result of one round. log_prices holds q for buyers and p for sellers;
/// flows are signed currency amounts (buyers pay, sellers receive).
struct ClearingOutcome {
  Division division;
  std::vector<Side> sides;
  std::vector<double> log_prices;
  std::vector<double> flows;
  std::vector<Match> matches;

  bool executed(std::size_t trader) const {
    for (const auto& m : matches)
      if (m.executed && (m.buyer == trader || m.seller == trader)) return true;
    return false;
  }
};

/// Reusable clearing machinery: price measures are computed once per trader
/// and side. An improper strategy sent to its non-native side trades at any
/// price (log-price -inf).
class ClearingEngine {
 public:
  ClearingEngine(MarketState market, ClearingPolicy policy)
      : market_(std::move(market)), policy_(std::move(policy)) {
    if (market_.size() < 2) throw ContractViolation("clear_round: need at least two traders");
    policy_.risk.validate();
    if (policy_.kind == ClearingPolicy::Kind::fixed) {
      if (!policy_.division) throw InvalidParameter("fixed clearing policy needs a division");
      policy_.division->validate(market_.size());
    }
    demand_.resize(market_.size());
    supply_.resize(market_.size());
  }

  const MarketState& market() const { return market_; }

  ClearingOutcome round(RandomSource& rng) {
    ClearingOutcome out;
    out.division = divide(rng);
    const std::size_t n = market_.size();
    out.sides.assign(n, Side::buyer);
    out.log_prices.assign(n, 0.0);
    out.flows.assign(n, 0.0);
    for (auto k : out.division.sellers) out.sides[k] = Side::seller;
    for (std::size_t k = 0; k < n; ++k)
      out.log_prices[k] = draw(k, out.sides[k], rng);

    auto order = [&](std::vector<std::size_t> idx) {
      std::stable_sort(idx.begin(), idx.end(),
                       [&](auto a, auto b) { return out.log_prices[a] < out.log_prices[b]; });
      return idx;
    };
    // Most eager buyer (smallest q) meets the cheapest seller (smallest p).
    const auto buyers = order(out.division.buyers);
    const auto sellers = order(out.division.sellers);
    const std::size_t pairs = std::min(buyers.size(), sellers.size());
    for (std::size_t i = 0; i < pairs; ++i) {
      const std::size_t b = buyers[i], s = sellers[i];
      const double q = out.log_prices[b], p = out.log_prices[s];
      // Deal at the buyer's bid e^{-q}; a buyer who takes any price pays the ask e^{p}.
      const double bid = std::isfinite(q) ? q : -p;
      const bool ok = q + p <= 0.0 && std::isfinite(bid);
      out.matches.push_back({b, s, ok});
      if (ok) {
        const double amount = std::exp(-bid);
        out.flows[b] = -amount;
        out.flows[s] = amount;
      }
    }
    return out;
  }

 private:
  Division divide(RandomSource& rng) const {
    Division d;
    switch (policy_.kind) {
      case ClearingPolicy::Kind::fixed:
        return *policy_.division;
      case ClearingPolicy::Kind::by_representation:
        for (std::size_t k = 0; k < market_.size(); ++k)
          (market_.traders[k].representation() == Representation::demand ? d.buyers : d.sellers).push_back(k);
        return d;
      case ClearingPolicy::Kind::random_half:
        for (std::size_t k = 0; k < market_.size(); ++k)
          (rng.uniform() < 0.5 ? d.buyers : d.sellers).push_back(k);
        return d;
    }
    return d;
  }

  double draw(std::size_t k, Side side, RandomSource& rng) {
    const Strategy& s = market_.traders[k];
    const Representation want = side == Side::buyer ? Representation::demand : Representation::supply;
    auto& cache = side == Side::buyer ? demand_ : supply_;
    if (s.representation() != want && s.is_improper()) return -std::numeric_limits<double>::infinity();
    if (!cache[k]) {
      if (s.representation() == want)
        cache[k] = price_measure(s);
      else
        cache[k] = price_measure(want == Representation::supply ? to_supply_rep(s, policy_.risk)
                                                                : to_demand_rep(s, policy_.risk));
    }
    return cache[k]->sample(rng);
  }

  MarketState market_;
  ClearingPolicy policy_;
  std::vector<std::optional<PriceMeasure>> demand_;
  std::vector<std::optional<PriceMeasure>> supply_;
};

inline ClearingOutcome clear_round(const MarketState& market, const ClearingPolicy& policy,
                                   RandomSource& rng) {
  ClearingEngine engine(market, policy);
  return engine.round(rng);
}

/// Append rows `round,trader,side,logprice,executed,flow`.
inline void append_round_log(csv::Writer& w, std::size_t round, const ClearingOutcome& o) {
  for (std::size_t k = 0; k < o.sides.size(); ++k)
    w.row(round, k, std::string(to_string(o.sides[k])), o.log_prices[k], o.executed(k), o.flows[k]);
}

inline csv::Writer round_log_writer() {
  return csv::Writer({"round", "trader", "side", "logprice", "executed", "flow"});
}

}  // namespace qmg
