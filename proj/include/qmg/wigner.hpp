#pragma once

// Phase-space layer: Wigner transforms of strategies, the closed-form
// coherent / excited / thermal families, giffen detection and the dominant
// demand and supply curves.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "qmg/errors.hpp"
#include "qmg/numerics.hpp"
#include "qmg/risk.hpp"
#include "qmg/strategy.hpp"

namespace qmg {

struct PhaseMoments {
  double mean_p, mean_q;
  double sd_p, sd_q;
  double corr;  // Pearson correlation of p and q under the density
};

/// Real pseudo-density W(p, q) on a p-grid x q-grid, stored row-major by p.
/// Empty weights mean a pure state; otherwise the mixture weights w_n.
class PhaseSpaceDensity {
 public:
  PhaseSpaceDensity(Grid p, Grid q, double hbar, std::vector<double> values,
                    std::vector<double> weights = {})
      : p_(p), q_(q), hbar_(hbar), values_(std::move(values)), weights_(std::move(weights)) {
    if (values_.size() != p_.size() * q_.size())
      throw ContractViolation("PhaseSpaceDensity: value count does not match grids");
    if (!(hbar_ > 0)) throw InvalidParameter("PhaseSpaceDensity: hbar must be > 0");
    if (!weights_.empty()) {
      double total = 0.0;
      for (double w : weights_) {
        if (!(w >= 0)) throw InvalidParameter("mixture weights must be nonnegative");
        total += w;
      }
      if (std::abs(total - 1.0) > 1e-9) throw InvalidParameter("mixture weights must sum to 1");
    }
  }

  const Grid& p_grid() const { return p_; }
  const Grid& q_grid() const { return q_; }
  double hbar() const { return hbar_; }
  bool is_mixture() const { return !weights_.empty(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(std::size_t ip, std::size_t iq) const { return values_[ip * q_.size() + iq]; }

  /// Integral over p at each q node.
  std::vector<double> marginal_q() const {
    std::vector<double> out(q_.size()), col(p_.size());
    for (std::size_t iq = 0; iq < q_.size(); ++iq) {
      for (std::size_t ip = 0; ip < p_.size(); ++ip) col[ip] = (*this)(ip, iq);
      out[iq] = integrate(col, p_);
    }
    return out;
  }

  /// Integral over q at each p node.
  std::vector<double> marginal_p() const {
    std::vector<double> out(p_.size());
    for (std::size_t ip = 0; ip < p_.size(); ++ip)
      out[ip] = integrate(std::span<const double>(values_.data() + ip * q_.size(), q_.size()), q_);
    return out;
  }

  double mass() const { return integrate(marginal_p(), p_); }

  PhaseMoments moments() const {
    const double m = mass();
    std::vector<double> row(q_.size()), outer(p_.size());
    auto expect = [&](auto fn) {
      for (std::size_t ip = 0; ip < p_.size(); ++ip) {
        for (std::size_t iq = 0; iq < q_.size(); ++iq) row[iq] = fn(p_[ip], q_[iq]) * (*this)(ip, iq);
        outer[ip] = integrate(row, q_);
      }
      return integrate(outer, p_) / m;
    };
    const double mp = expect([](double p, double) { return p; });
    const double mq = expect([](double, double q) { return q; });
    const double vp = expect([&](double p, double) { return (p - mp) * (p - mp); });
    const double vq = expect([&](double, double q) { return (q - mq) * (q - mq); });
    const double cpq = expect([&](double p, double q) { return (p - mp) * (q - mq); });
    return {mp, mq, std::sqrt(vp), std::sqrt(vq), cpq / std::sqrt(vp * vq)};
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// (min value, p, q) of the argmin node; first occurrence in row-major order.
  struct Extremum {
    double value, p, q;
  };
  Extremum minimum() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values_.size(); ++i)
      if (values_[i] < values_[best]) best = i;
    return {values_[best], p_[best / q_.size()], q_[best % q_.size()]};
  }

 private:
  Grid p_, q_;
  double hbar_;
  std::vector<double> values_;
  std::vector<double> weights_;
};

// ---------------------------------------------------------------------------
// Laguerre polynomials

/// exp(-y/2) L_k(y) for k = 0..n by the three-term recurrence.
inline std::vector<double> laguerre_damped_all(int n, double y) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  out[0] = std::exp(-0.5 * y);
  if (n >= 1) out[1] = (1.0 - y) * out[0];
  for (int k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const auto i = static_cast<std::size_t>(k);
    out[i + 1] = ((2.0 * kk + 1.0 - y) * out[i] - kk * out[i - 1]) / (kk + 1.0);
  }
  return out;
}

inline double laguerre(int n, double y) {
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 1.0 - y;
  for (int k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double next = ((2.0 * kk + 1.0 - y) * cur - kk * prev) / (kk + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Numeric Wigner transform

/// W(p, q) = (2 pi hbar)^{-1} \int exp(-i p x / hbar) psi(q + x/2) psi*(q - x/2) dx / <psi|psi>
/// for demand strategies; supply strategies use the conjugate form with
/// exp(+i q y / hbar). Marginals reproduce |<q|psi>|^2 and |fourier_q_to_p|^2.
inline PhaseSpaceDensity wigner_transform(const Strategy& s, const Grid& p_grid, const Grid& q_grid,
                                          double hbar) {
  if (!(hbar > 0)) throw InvalidParameter("wigner_transform: hbar must be > 0");
  if (s.is_improper()) throw ImproperState("wigner_transform: delta/discrete strategy");
  const bool demand = s.representation() == Representation::demand;
  const Grid& own = demand ? q_grid : p_grid;
  const Grid& conj = demand ? p_grid : q_grid;
  const double sign = demand ? -1.0 : 1.0;

  const auto [mx, sx] = s.spread();
  const auto [mk, sk] = s.conjugate_spread(hbar);
  const double reach = std::max(std::abs(own.lo() - mx), std::abs(own.hi() - mx));
  double half_span = 2.0 * reach + 18.0 * sx;
  if (const auto* smp = std::get_if<SampledForm>(&s.form()))
    half_span = std::min(half_span, 2.0 * (smp->grid.hi() - smp->grid.lo()));
  const double kmax = std::max(std::abs(conj.lo()), std::abs(conj.hi())) + std::abs(mk) + 12.0 * sk;
  const double dy = std::min(std::numbers::pi * hbar / kmax, sx / 4.0);
  const auto half_n = static_cast<std::size_t>(std::ceil(half_span / dy));

  // Phase table exp(i sign v y_k / hbar), k = 1..half_n.
  std::vector<cplx> phase(conj.size() * half_n);
  for (std::size_t iv = 0; iv < conj.size(); ++iv)
    for (std::size_t k = 1; k <= half_n; ++k)
      phase[iv * half_n + (k - 1)] = std::polar(1.0, sign * conj[iv] * static_cast<double>(k) * dy / hbar);

  const double norm = s.norm_squared();
  const double pref = dy / (2.0 * std::numbers::pi * hbar * norm);
  std::vector<double> values(p_grid.size() * q_grid.size());
  std::vector<cplx> f(half_n);
  for (std::size_t iu = 0; iu < own.size(); ++iu) {
    const double u = own[iu];
    const double f0 = std::norm(s.amplitude(u));
    for (std::size_t k = 1; k <= half_n; ++k) {
      const double y = static_cast<double>(k) * dy;
      f[k - 1] = s.amplitude(u + 0.5 * y) * std::conj(s.amplitude(u - 0.5 * y));
    }
    for (std::size_t iv = 0; iv < conj.size(); ++iv) {
      double acc = 0.0;
      const cplx* ph = phase.data() + iv * half_n;
      for (std::size_t k = 0; k < half_n; ++k) acc += (f[k] * ph[k]).real();
      const double w = pref * (f0 + 2.0 * acc);
      if (demand)
        values[iv * q_grid.size() + iu] = w;
      else
        values[iu * q_grid.size() + iv] = w;
    }
  }
  return PhaseSpaceDensity(p_grid, q_grid, hbar, std::move(values));
}

// ---------------------------------------------------------------------------
// Closed-form families

/// Correlated coherent strategy parameters: Delta_p = hbar / (2 eta),
/// Delta_q = eta / sqrt(1 - r^2).
struct CoherentParams {
  double r = 0.0;
  double eta = 1.0;
  double p0 = 0.0;
  double q0 = 0.0;

  double delta_p(double hbar) const { return hbar / (2.0 * eta); }
  double delta_q() const { return eta / std::sqrt(1.0 - r * r); }
};

/// Bivariate Gaussian with the cross term +2r(p-p0)(q-q0)/(Dp Dq) in the
/// exponent, so the p-q correlation under the density is -r.
inline PhaseSpaceDensity coherent_wigner(const CoherentParams& c, double hbar, const Grid& p_grid,
                                         const Grid& q_grid) {
  if (!(hbar > 0)) throw InvalidParameter("coherent_wigner: hbar must be > 0");
  if (!(c.eta > 0)) throw InvalidParameter("coherent_wigner: eta must be > 0");
  if (!(std::abs(c.r) < 1.0)) throw DegenerateDensity("coherent_wigner: |r| must be < 1");
  const double dp = c.delta_p(hbar);
  const double dq = c.delta_q();
  const double one_m_r2 = 1.0 - c.r * c.r;
  const double norm = 1.0 / (2.0 * std::numbers::pi * dp * dq * std::sqrt(one_m_r2));
  std::vector<double> values(p_grid.size() * q_grid.size());
  for (std::size_t ip = 0; ip < p_grid.size(); ++ip) {
    const double u = (p_grid[ip] - c.p0) / dp;
    for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
      const double v = (q_grid[iq] - c.q0) / dq;
      const double quad = (u * u + 2.0 * c.r * u * v + v * v) / (2.0 * one_m_r2);
      values[ip * q_grid.size() + iq] = norm * std::exp(-quad);
    }
  }
  return PhaseSpaceDensity(p_grid, q_grid, hbar, std::move(values));
}

/// H(p, q) with both centers at the origin.
inline double risk_hamiltonian(const RiskParams& risk, double p, double q) {
  const double w = risk.omega();
  return p * p / (2.0 * risk.m) + risk.m * w * w * q * q / 2.0;
}

inline constexpr int kMaxExcitedLevel = 512;

/// W_n = ((-1)^n / pi hbar) exp(-2H / hbar omega) L_n(4H / hbar omega).
inline PhaseSpaceDensity excited_wigner(int n, const RiskParams& risk, const Grid& p_grid,
                                        const Grid& q_grid, int n_max = kMaxExcitedLevel) {
  risk.validate();
  if (n < 0 || n > n_max)
    throw InvalidParameter("excited_wigner: level " + std::to_string(n) + " outside [0, " +
                           std::to_string(n_max) + "]");
  const double hbar = effective_planck(risk);
  const double quantum = hbar * risk.omega();
  const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
  std::vector<double> values(p_grid.size() * q_grid.size());
  for (std::size_t ip = 0; ip < p_grid.size(); ++ip)
    for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
      const double y = 4.0 * risk_hamiltonian(risk, p_grid[ip], q_grid[iq]) / quantum;
      values[ip * q_grid.size() + iq] =
          sgn / (std::numbers::pi * hbar) * laguerre_damped_all(n, y)[static_cast<std::size_t>(n)];
    }
  return PhaseSpaceDensity(p_grid, q_grid, hbar, std::move(values));
}

struct ThermalMode {
  enum class Kind { closed_form, series } kind = Kind::closed_form;
  int terms = 200;

  static ThermalMode closed() { return {}; }
  static ThermalMode series(int n) { return {Kind::series, n}; }
};

/// Gibbs weights w_n = (1 - e^{-b}) e^{-n b}, b = beta hbar omega, renormalized
/// over the first `terms` levels.
inline std::vector<double> gibbs_weights(double beta, const RiskParams& risk, int terms) {
  if (!(beta > 0)) throw InvalidParameter("gibbs_weights: beta must be > 0");
  if (terms < 1) throw InvalidParameter("gibbs_weights: need at least one term");
  const double b = beta * effective_planck(risk) * risk.omega();
  std::vector<double> w(static_cast<std::size_t>(terms));
  double total = 0.0;
  for (int n = 0; n < terms; ++n) total += (w[static_cast<std::size_t>(n)] = std::exp(-b * n));
  for (auto& x : w) x /= total;
  return w;
}

/// Thermal mixture rho_beta = (omega / 2 pi) x exp(-x H), or the truncated
/// Gibbs series of W_n.
inline PhaseSpaceDensity thermal_wigner(double beta, const RiskParams& risk, const Grid& p_grid,
                                        const Grid& q_grid, ThermalMode mode = ThermalMode::closed()) {
  risk.validate();
  if (!(beta > 0) || !std::isfinite(beta)) throw InvalidParameter("thermal_wigner: beta must be > 0");
  const double hbar = effective_planck(risk);
  const double x = thermal_x(beta, risk);
  std::vector<double> values(p_grid.size() * q_grid.size());
  if (mode.kind == ThermalMode::Kind::closed_form) {
    const double pref = risk.omega() / (2.0 * std::numbers::pi) * x;
    for (std::size_t ip = 0; ip < p_grid.size(); ++ip)
      for (std::size_t iq = 0; iq < q_grid.size(); ++iq)
        values[ip * q_grid.size() + iq] = pref * std::exp(-x * risk_hamiltonian(risk, p_grid[ip], q_grid[iq]));
    return PhaseSpaceDensity(p_grid, q_grid, hbar, std::move(values));
  }
  if (mode.terms < 1) throw InvalidParameter("thermal_wigner: series needs N >= 1");
  auto w = gibbs_weights(beta, risk, mode.terms);
  const double quantum = hbar * risk.omega();
  for (std::size_t ip = 0; ip < p_grid.size(); ++ip)
    for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
      const double y = 4.0 * risk_hamiltonian(risk, p_grid[ip], q_grid[iq]) / quantum;
      const auto lag = laguerre_damped_all(mode.terms - 1, y);
      double acc = 0.0;
      for (std::size_t n = 0; n < lag.size(); ++n) acc += ((n % 2 == 0) ? w[n] : -w[n]) * lag[n];
      values[ip * q_grid.size() + iq] = acc / (std::numbers::pi * hbar);
    }
  return PhaseSpaceDensity(p_grid, q_grid, hbar, std::move(values), std::move(w));
}

// ---------------------------------------------------------------------------
// Negativity

struct GiffenReport {
  bool giffen;
  double min_value;
  double p, q;  // witness
};

inline double default_negativity_tol(const PhaseSpaceDensity& d) { return 1e-9 * d.max_abs(); }

/// True iff the grid minimum is below -tol.
inline GiffenReport is_giffen(const PhaseSpaceDensity& d, std::optional<double> tol = std::nullopt) {
  const double t = tol.value_or(default_negativity_tol(d));
  const auto m = d.minimum();
  return {m.value < -t, m.value, m.p, m.q};
}

enum class HudsonClass { gaussian_positive, non_gaussian_negative };

struct HudsonReport {
  HudsonClass classification;
  double min_value;
  double p, q;
};

inline HudsonReport hudson_check(const PhaseSpaceDensity& d) {
  if (d.is_mixture()) throw ContractViolation("hudson_check applies to pure states only");
  const auto g = is_giffen(d);
  return {g.giffen ? HudsonClass::non_gaussian_negative : HudsonClass::gaussian_positive, g.min_value,
          g.p, g.q};
}

/// Wigner transform over +-7 standard deviations in both pictures, then the
/// negativity test.
inline HudsonReport hudson_check(const Strategy& s, double hbar, std::size_t points = 201) {
  if (s.is_improper()) throw ImproperState("hudson_check: delta/discrete strategy");
  const auto [mx, sx] = s.spread();
  auto [mk, sk] = s.conjugate_spread(hbar);
  // conjugate_spread reports |mean|; the sampled grid must straddle both signs.
  const double lk = std::abs(mk) + 7.0 * sk;
  const Grid own(mx - 7.0 * sx, mx + 7.0 * sx, points);
  const Grid conj(-lk, lk, points);
  const bool demand = s.representation() == Representation::demand;
  return hudson_check(demand ? wigner_transform(s, conj, own, hbar) : wigner_transform(s, own, conj, hbar));
}

// ---------------------------------------------------------------------------
// Dominant curves

/// F_d(ln c): cumulative fixed-p slice over q; F_s(ln c): cumulative fixed-q
/// slice over p up to ln(1/c). Each slice is renormalized by its own integral.
class DominantCurves {
 public:
  DominantCurves(Grid q, std::vector<double> slice_q, Grid p, std::vector<double> slice_p,
                 double p_slice, double q_slice)
      : q_(q), p_(p), slice_q_(std::move(slice_q)), slice_p_(std::move(slice_p)),
        p_slice_(p_slice), q_slice_(q_slice) {
    degenerate_d_ = normalize_slice(slice_q_, q_);
    degenerate_s_ = normalize_slice(slice_p_, p_);
    cum_q_ = cumulative_integral(std::span<const double>(slice_q_), q_);
    cum_p_ = cumulative_integral(std::span<const double>(slice_p_), p_);
  }

  double demand(double log_price) const { return eval(slice_q_, cum_q_, q_, log_price); }
  double supply(double log_price) const { return eval(slice_p_, cum_p_, p_, -log_price); }

  /// Nondecreasing in ln c.
  bool demand_monotone() const { return monotone(cum_q_); }
  /// Nondecreasing in ln(1/c).
  bool supply_monotone() const { return monotone(cum_p_); }
  /// Slice integral vanished; normalized by the absolute mass instead.
  bool demand_degenerate() const { return degenerate_d_; }
  bool supply_degenerate() const { return degenerate_s_; }

  double p_slice() const { return p_slice_; }
  double q_slice() const { return q_slice_; }
  const Grid& q_grid() const { return q_; }
  const Grid& p_grid() const { return p_; }
  const std::vector<double>& demand_nodes() const { return cum_q_; }
  const std::vector<double>& supply_nodes() const { return cum_p_; }

 private:
  static bool normalize_slice(std::vector<double>& s, const Grid& g) {
    std::vector<double> a(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) a[i] = std::abs(s[i]);
    const double abs_mass = integrate(a, g);
    if (!(abs_mass > 0)) throw DegenerateDensity("dominant_curves: slice is identically zero");
    double z = integrate(s, g);
    bool degenerate = false;
    if (std::abs(z) <= 1e-9 * abs_mass) {
      z = abs_mass;
      degenerate = true;
    }
    for (auto& v : s) v /= z;
    return degenerate;
  }

  static bool monotone(const std::vector<double>& c) {
    for (std::size_t i = 1; i < c.size(); ++i)
      if (c[i] < c[i - 1] - 1e-12) return false;
    return true;
  }

  static double eval(const std::vector<double>& f, const std::vector<double>& cum, const Grid& g,
                     double x) {
    if (x <= g.lo()) return 0.0;
    if (x >= g.hi()) return cum.back();
    std::size_t i;
    double t;
    detail::locate(g, x, i, t);
    return cum[i] + detail::cell_partial(std::span<const double>(f), i, t, g.spacing());
  }

  Grid q_, p_;
  std::vector<double> slice_q_, slice_p_;
  std::vector<double> cum_q_, cum_p_;
  double p_slice_, q_slice_;
  bool degenerate_d_ = false, degenerate_s_ = false;
};

/// Slice constants default to the density's first moments.
inline DominantCurves dominant_curves(const PhaseSpaceDensity& d, std::optional<double> p_slice = {},
                                      std::optional<double> q_slice = {}) {
  const auto& pg = d.p_grid();
  const auto& qg = d.q_grid();
  if (!p_slice || !q_slice) {
    const auto m = d.moments();
    if (!p_slice) p_slice = m.mean_p;
    if (!q_slice) q_slice = m.mean_q;
  }
  if (!pg.contains(*p_slice)) throw InvalidParameter("dominant_curves: p slice outside the grid");
  if (!qg.contains(*q_slice)) throw InvalidParameter("dominant_curves: q slice outside the grid");

  std::vector<double> col(pg.size()), slice_q(qg.size()), slice_p(pg.size());
  for (std::size_t iq = 0; iq < qg.size(); ++iq) {
    for (std::size_t ip = 0; ip < pg.size(); ++ip) col[ip] = d(ip, iq);
    slice_q[iq] = interpolate(std::span<const double>(col), pg, *p_slice);
  }
  for (std::size_t ip = 0; ip < pg.size(); ++ip)
    slice_p[ip] = interpolate(std::span<const double>(d.values().data() + ip * qg.size(), qg.size()),
                              qg, *q_slice);
  return DominantCurves(qg, std::move(slice_q), pg, std::move(slice_p), *p_slice, *q_slice);
}

}  // namespace qmg
