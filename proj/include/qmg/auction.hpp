#pragma once

// q-bargaining and q-auctions. Buyers carry the variable q (bid price
// e^{-q}), the seller carries p (withdrawal price e^{p}); a deal needs
// q_min + p <= 0. Buyer index breaks ties in q.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmg/errors.hpp"
#include "qmg/numerics.hpp"
#include "qmg/strategy.hpp"
#include "qmg/wigner.hpp"

namespace qmg {

/// Iverson bracket [q + p <= 0].
inline bool rationality(double q, double p) { return q + p <= 0.0; }

enum class Pricing { first, second, mixed };

inline const char* to_string(Pricing p) {
  switch (p) {
    case Pricing::first: return "first";
    case Pricing::second: return "second";
    case Pricing::mixed: return "mixed";
  }
  return "?";
}

/// Polarization of the (seller, winning buyer) pair as amplitudes over the
/// two assignments |0>_{-1}|1>_1 (buyers propose) and |1>_{-1}|0>_1 (seller
/// reveals). Only |amplitude|^2 enters the auction.
struct Polarization {
  cplx buyers_propose{1.0};
  cplx seller_reveals{0.0};

  double weight() const { return std::norm(buyers_propose); }

  void validate() const {
    const double n = std::norm(buyers_propose) + std::norm(seller_reveals);
    if (std::abs(n - 1.0) > 1e-12) throw InvalidParameter("polarization amplitudes must have unit norm");
  }
};

struct AuctionInstance {
  std::vector<Strategy> buyers;  // demand picture
  Strategy seller;               // supply picture
  Pricing pricing = Pricing::first;
  double weight = 1.0;  // first-price share for Pricing::mixed
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 0;

  void validate() const {
    if (buyers.empty()) throw InvalidParameter("auction needs at least one buyer");
    if (mc_samples < 1) throw InvalidParameter("auction needs mc_samples >= 1");
    if (!(weight >= 0.0 && weight <= 1.0)) throw InvalidParameter("auction weight must lie in [0, 1]");
    for (const auto& b : buyers)
      if (b.representation() != Representation::demand)
        throw RepresentationMismatch("auction buyers must be in the demand picture");
    if (seller.representation() != Representation::supply)
      throw RepresentationMismatch("auction seller must be in the supply picture");
  }
};

namespace detail {

struct AuctionMeasures {
  std::vector<PriceMeasure> buyers;
  PriceMeasure seller;
};

inline AuctionMeasures auction_measures(const AuctionInstance& inst) {
  inst.validate();
  std::vector<PriceMeasure> b;
  b.reserve(inst.buyers.size());
  for (const auto& s : inst.buyers) b.push_back(price_measure(s));
  return {std::move(b), price_measure(inst.seller)};
}

// Probability that buyer k at q beats everybody else (ties to the lower index)
// and the seller accepts.
inline double win_and_trade(const AuctionMeasures& m, std::size_t k, double q) {
  double acc = m.seller.cdf(-q);
  for (std::size_t j = 0; j < m.buyers.size() && acc > 0.0; ++j) {
    if (j == k) continue;
    acc *= j < k ? 1.0 - m.buyers[j].cdf(q) : 1.0 - m.buyers[j].cdf_below(q);
  }
  return acc;
}

}  // namespace detail

/// Density of trading with buyer k at q_k:
/// |psi_k(q_k)|^2 prod_{m != k} P(q_m > q_k) P(p <= -q_k).
inline double transaction_density(const AuctionInstance& inst, std::size_t k, double q) {
  if (k >= inst.buyers.size()) throw InvalidParameter("transaction_density: buyer index out of range");
  const auto m = detail::auction_measures(inst);
  if (m.buyers[k].is_atomic())
    throw ImproperState("transaction_density: buyer has an atomic measure; use transaction_probability");
  return m.buyers[k].pdf(q) * detail::win_and_trade(m, k, q);
}

struct TransactionBreakdown {
  std::vector<double> per_buyer;  // P(buyer k wins and the deal executes)
  double total = 0.0;
  double no_trade = 1.0;
  double expected_revenue = 0.0;  // first-price, E[e^{-q_min}; deal]
};

/// Quadrature of the transaction density summed over buyers; atomic buyers contribute
/// their atoms directly.
inline TransactionBreakdown transaction_probability(const AuctionInstance& inst) {
  const auto m = detail::auction_measures(inst);
  TransactionBreakdown out;
  out.per_buyer.assign(inst.buyers.size(), 0.0);
  for (std::size_t k = 0; k < m.buyers.size(); ++k) {
    if (const auto* atoms = m.buyers[k].atoms()) {
      for (std::size_t i = 0; i < atoms->points.size(); ++i) {
        const double q = atoms->points[i];
        const double pr = atoms->weights[i] * detail::win_and_trade(m, k, q);
        out.per_buyer[k] += pr;
        out.expected_revenue += pr * std::exp(-q);
      }
      continue;
    }
    const Grid g = m.buyers[k].support();
    std::vector<double> dens(g.size()), rev(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      dens[i] = m.buyers[k].pdf(g[i]) * detail::win_and_trade(m, k, g[i]);
      rev[i] = dens[i] * std::exp(-g[i]);
    }
    out.per_buyer[k] = integrate(dens, g);
    out.expected_revenue += integrate(rev, g);
  }
  for (double p : out.per_buyer) out.total += p;
  out.no_trade = 1.0 - out.total;
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo auction

struct Histogram {
  std::vector<double> edges;    // size bins + 1
  std::vector<double> weights;  // counts, or blended counts
};

inline Histogram make_histogram(std::span<const double> a, std::span<const double> b, double wa,
                                double wb, std::size_t bins = 40) {
  Histogram h;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : a) lo = std::min(lo, x), hi = std::max(hi, x);
  for (double x : b) lo = std::min(lo, x), hi = std::max(hi, x);
  if (!std::isfinite(lo)) return h;
  if (lo == hi) {
    h.edges = {lo, hi};
    h.weights = {wa * static_cast<double>(a.size()) + wb * static_cast<double>(b.size())};
    return h;
  }
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  h.edges.back() = hi;
  h.weights.assign(bins, 0.0);
  auto put = [&](double x, double w) {
    auto i = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins));
    h.weights[std::min(i, bins - 1)] += w;
  };
  for (double x : a) put(x, wa);
  for (double x : b) put(x, wb);
  return h;
}

struct AuctionOutcome {
  Pricing pricing = Pricing::first;
  std::size_t samples = 0;
  std::vector<double> winner_freq;  // P(buyer k wins and the deal executes)
  double p_no_trade = 0.0;
  double revenue_mean = 0.0;  // revenue is 0 without a deal
  double revenue_sd = 0.0;
  double revenue_se = 0.0;
  Histogram price_histogram;
};

namespace detail {

// Sums are taken about the first draw, so a constant revenue stream has an
// exact mean and zero variance.
struct BranchStats {
  CompensatedSum sum, sum_sq;
  std::vector<double> prices;
  double shift = 0.0;
  bool started = false;

  void add(double revenue, bool traded) {
    if (!started) {
      shift = revenue;
      started = true;
    }
    const double d = revenue - shift;
    sum.add(d);
    sum_sq.add(d * d);
    if (traded) prices.push_back(revenue);
  }
  double mean(double n) const { return shift + sum.value() / n; }
  double variance(double n) const {
    const double m = sum.value() / n;
    return std::max(0.0, sum_sq.value() / n - m * m);
  }
};

struct AuctionRun {
  std::size_t samples = 0;
  std::vector<std::size_t> wins;
  std::size_t no_trade = 0;
  BranchStats first, second;
};

inline AuctionRun simulate(const AuctionInstance& inst) {
  const auto m = auction_measures(inst);
  RandomSource rng(inst.seed, 0);
  AuctionRun run;
  run.samples = inst.mc_samples;
  run.wins.assign(inst.buyers.size(), 0);
  run.first.prices.reserve(inst.mc_samples);
  run.second.prices.reserve(inst.mc_samples);
  std::vector<double> q(inst.buyers.size());
  for (std::size_t s = 0; s < inst.mc_samples; ++s) {
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = m.buyers[k].sample(rng);
    const double p = m.seller.sample(rng);
    std::size_t winner = 0;
    for (std::size_t k = 1; k < q.size(); ++k)
      if (q[k] < q[winner]) winner = k;
    if (!rationality(q[winner], p)) {
      ++run.no_trade;
      run.first.add(0.0, false);
      run.second.add(0.0, false);
      continue;
    }
    ++run.wins[winner];
    double runner_up = -p;  // seller's withdrawal price is a pseudo-bid
    for (std::size_t k = 0; k < q.size(); ++k)
      if (k != winner) runner_up = std::min(runner_up, q[k]);
    run.first.add(std::exp(-q[winner]), true);
    run.second.add(std::exp(-runner_up), true);
  }
  return run;
}

inline AuctionOutcome blend(const AuctionRun& run, double w, Pricing label) {
  AuctionOutcome out;
  out.pricing = label;
  out.samples = run.samples;
  const double n = static_cast<double>(run.samples);
  for (auto c : run.wins) out.winner_freq.push_back(static_cast<double>(c) / n);
  out.p_no_trade = static_cast<double>(run.no_trade) / n;
  const double m1 = run.first.mean(n), m2 = run.second.mean(n);
  out.revenue_mean = w * m1 + (1.0 - w) * m2;
  if (w == 1.0) out.revenue_mean = m1;
  if (w == 0.0) out.revenue_mean = m2;
  // mixture variance: within-branch spread plus the spread of the branch means
  const double var = w * run.first.variance(n) + (1.0 - w) * run.second.variance(n) +
                     w * (1.0 - w) * (m1 - m2) * (m1 - m2);
  out.revenue_sd = std::sqrt(var);
  out.revenue_se = out.revenue_sd / std::sqrt(n);
  const auto& a = run.first.prices;
  const auto& b = run.second.prices;
  if (w == 1.0)
    out.price_histogram = make_histogram(a, {}, 1.0, 0.0);
  else if (w == 0.0)
    out.price_histogram = make_histogram({}, b, 0.0, 1.0);
  else
    out.price_histogram = make_histogram(a, b, w, 1.0 - w);
  return out;
}

}  // namespace detail

/// Sample every buyer and the seller mc_samples times; the winner holds the
/// smallest q. First price: e^{-q_min}. Second price: e^{-x} with x the
/// second smallest of {q_m} and -p.
inline AuctionOutcome run_auction(const AuctionInstance& inst) {
  const auto run = detail::simulate(inst);
  switch (inst.pricing) {
    case Pricing::first: return detail::blend(run, 1.0, Pricing::first);
    case Pricing::second: return detail::blend(run, 0.0, Pricing::second);
    case Pricing::mixed: return detail::blend(run, inst.weight, Pricing::mixed);
  }
  return {};
}

/// Weighted mixture of the first-price branch (weight) and the second-price,
/// seller-reveals branch (1 - weight), evaluated on common draws.
inline AuctionOutcome mixed_polarization_auction(const AuctionInstance& inst, double weight) {
  if (!(weight >= 0.0 && weight <= 1.0))
    throw InvalidParameter("mixed_polarization_auction: weight must lie in [0, 1]");
  const auto run = detail::simulate(inst);
  return detail::blend(run, weight, Pricing::mixed);
}

inline AuctionOutcome mixed_polarization_auction(const AuctionInstance& inst, const Polarization& pol) {
  pol.validate();
  return mixed_polarization_auction(inst, pol.weight());
}

// ---------------------------------------------------------------------------
// Vickrey incentive check

struct PayoffRow {
  double bid;     // q of the submitted bid
  double payoff;  // expected valuation minus price paid
  double se;      // 0 for exact enumeration
};

struct VickreyReport {
  bool exact = false;
  std::vector<PayoffRow> rows;
  std::size_t argmax = 0;
  std::vector<std::size_t> argmax_set;  // exact ties, or within 3 SE of the best
  std::size_t truthful = 0;
  bool truthful_in_argmax_set = false;
  double argmax_ci_lo = 0.0, argmax_ci_hi = 0.0;
};

namespace detail {

// Second-price payoff of the bidder (index 0 in tie breaks) facing opponent
// draws and the seller's p.
inline double vickrey_payoff(double bid, double value, std::span<const double> opp, double p) {
  double best_opp = std::numeric_limits<double>::infinity();
  for (double x : opp) best_opp = std::min(best_opp, x);
  if (bid > best_opp || !rationality(bid, p)) return 0.0;
  return value - std::exp(-std::min(best_opp, -p));
}

inline void positivity_guard(const Strategy& s, double hbar) {
  if (s.is_improper()) return;
  if (hudson_check(s, hbar).classification == HudsonClass::non_gaussian_negative)
    throw NotApplicable("Vickrey incentive property assumes positive measures; got a giffen strategy");
}

}  // namespace detail

/// Expected second-price payoff of a bidder with valuation e^{-valuation}
/// for each bid q on bid_grid. Exact enumeration when every opponent and
/// the seller are atomic; Monte Carlo with common random numbers otherwise.
inline VickreyReport vickrey_truthfulness_check(double valuation, std::span<const double> bid_grid,
                                                const std::vector<Strategy>& opponents,
                                                const Strategy& seller, RandomSource& rng,
                                                std::size_t samples = 200000, double hbar = 1.0) {
  if (bid_grid.empty()) throw InvalidParameter("vickrey check: empty bid grid");
  auto truthful = std::find(bid_grid.begin(), bid_grid.end(), valuation);
  if (truthful == bid_grid.end()) throw InvalidParameter("vickrey check: bid grid must contain the valuation");
  for (const auto& o : opponents) {
    if (o.representation() != Representation::demand)
      throw RepresentationMismatch("vickrey check: opponents must be in the demand picture");
    detail::positivity_guard(o, hbar);
  }
  if (seller.representation() != Representation::supply)
    throw RepresentationMismatch("vickrey check: seller must be in the supply picture");
  detail::positivity_guard(seller, hbar);

  std::vector<PriceMeasure> opp;
  for (const auto& o : opponents) opp.push_back(price_measure(o));
  const PriceMeasure sel = price_measure(seller);
  const double value = std::exp(-valuation);

  VickreyReport rep;
  rep.truthful = static_cast<std::size_t>(std::distance(bid_grid.begin(), truthful));
  rep.exact = sel.is_atomic() && std::all_of(opp.begin(), opp.end(), [](const auto& m) { return m.is_atomic(); });

  if (rep.exact) {
    // Enumerate the product of all atoms.
    std::vector<std::size_t> idx(opp.size(), 0);
    std::vector<double> draw(opp.size());
    std::vector<double> payoff(bid_grid.size(), 0.0);
    const auto* satoms = sel.atoms();
    while (true) {
      double w = 1.0;
      for (std::size_t j = 0; j < opp.size(); ++j) {
        draw[j] = opp[j].atoms()->points[idx[j]];
        w *= opp[j].atoms()->weights[idx[j]];
      }
      for (std::size_t s = 0; s < satoms->points.size(); ++s)
        for (std::size_t b = 0; b < bid_grid.size(); ++b)
          payoff[b] += w * satoms->weights[s] * detail::vickrey_payoff(bid_grid[b], value, draw, satoms->points[s]);
      std::size_t j = 0;
      while (j < idx.size() && ++idx[j] == opp[j].atoms()->points.size()) idx[j++] = 0;
      if (j == idx.size()) break;
    }
    for (std::size_t b = 0; b < bid_grid.size(); ++b) rep.rows.push_back({bid_grid[b], payoff[b], 0.0});
  } else {
    std::vector<CompensatedSum> sum(bid_grid.size()), sum_sq(bid_grid.size());
    std::vector<double> draw(opp.size());
    for (std::size_t s = 0; s < samples; ++s) {
      for (std::size_t j = 0; j < opp.size(); ++j) draw[j] = opp[j].sample(rng);
      const double p = sel.sample(rng);
      for (std::size_t b = 0; b < bid_grid.size(); ++b) {
        const double v = detail::vickrey_payoff(bid_grid[b], value, draw, p);
        sum[b].add(v);
        sum_sq[b].add(v * v);
      }
    }
    const double n = static_cast<double>(samples);
    for (std::size_t b = 0; b < bid_grid.size(); ++b) {
      const double mean = sum[b].value() / n;
      const double var = std::max(0.0, sum_sq[b].value() / n - mean * mean);
      rep.rows.push_back({bid_grid[b], mean, std::sqrt(var / n)});
    }
  }

  for (std::size_t b = 1; b < rep.rows.size(); ++b)
    if (rep.rows[b].payoff > rep.rows[rep.argmax].payoff) rep.argmax = b;
  const auto& best = rep.rows[rep.argmax];
  rep.argmax_ci_lo = best.payoff - 3.0 * best.se;
  rep.argmax_ci_hi = best.payoff + 3.0 * best.se;
  for (std::size_t b = 0; b < rep.rows.size(); ++b) {
    const bool in = rep.exact ? rep.rows[b].payoff == best.payoff
                              : rep.rows[b].payoff >= best.payoff - 3.0 * std::hypot(best.se, rep.rows[b].se);
    if (in) rep.argmax_set.push_back(b);
  }
  rep.truthful_in_argmax_set =
      std::find(rep.argmax_set.begin(), rep.argmax_set.end(), rep.truthful) != rep.argmax_set.end();
  return rep;
}

}  // namespace qmg
