#pragma once

// Trader strategies: wave functions over log-price in the demand (q) or the
// supply (p) picture, their price measures and the buy/sell probabilities.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qmg/errors.hpp"
#include "qmg/numerics.hpp"

namespace qmg {

/// Risk-operator constants (hbar_E, theta, m, Theta). omega = 2 pi / theta.
struct RiskParams {
  double hbar_e = 1.0;
  double theta = 2.0 * std::numbers::pi;
  double m = 1.0;
  double theta_nc = 0.0;

  static RiskParams from_omega(double hbar_e, double omega, double m = 1.0, double theta_nc = 0.0) {
    RiskParams r{hbar_e, 2.0 * std::numbers::pi / omega, m, theta_nc};
    r.validate();
    return r;
  }

  double omega() const { return 2.0 * std::numbers::pi / theta; }
  double h_e() const { return 2.0 * std::numbers::pi * hbar_e; }
  /// sqrt(hbar_E^2 + Theta^2); the constant the single-player oscillator sees.
  double hbar_eff() const { return std::sqrt(hbar_e * hbar_e + theta_nc * theta_nc); }

  /// Ground-state standard deviations of q and p.
  double sigma_q0() const { return std::sqrt(hbar_eff() / (2.0 * m * omega())); }
  double sigma_p0() const { return std::sqrt(hbar_eff() * m * omega() / 2.0); }

  void validate() const {
    if (!(hbar_e > 0) || !std::isfinite(hbar_e)) throw InvalidParameter("risk.hbar_e must be > 0");
    if (!(theta > 0) || !std::isfinite(theta)) throw InvalidParameter("risk.theta must be > 0");
    if (!(m > 0) || !std::isfinite(m)) throw InvalidParameter("risk.m must be > 0");
    if (!(theta_nc >= 0) || !std::isfinite(theta_nc))
      throw InvalidParameter("risk.theta_nc must be >= 0");
  }

  bool operator==(const RiskParams&) const = default;
};

// ---------------------------------------------------------------------------
// Hermite functions

/// Orthonormal Hermite functions phi_0..phi_nmax at xi (normalized recurrence).
inline std::vector<double> hermite_functions(int nmax, double xi) {
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1);
  out[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
  if (nmax >= 1) out[1] = std::numbers::sqrt2 * xi * out[0];
  for (int k = 1; k < nmax; ++k) {
    const double kk = static_cast<double>(k);
    out[static_cast<std::size_t>(k) + 1] =
        std::sqrt(2.0 / (kk + 1.0)) * xi * out[static_cast<std::size_t>(k)] -
        std::sqrt(kk / (kk + 1.0)) * out[static_cast<std::size_t>(k) - 1];
  }
  return out;
}

inline double hermite_function(int n, double xi) {
  return hermite_functions(n, xi)[static_cast<std::size_t>(n)];
}

// ---------------------------------------------------------------------------
// Strategy

enum class Representation { demand, supply };

inline const char* to_string(Representation r) {
  return r == Representation::demand ? "demand" : "supply";
}

/// Gaussian amplitude whose squared modulus is N(center, width^2), times
/// exp(i * slope * x).
struct GaussianForm {
  double center = 0.0;
  double width = 1.0;
  double slope = 0.0;
};

/// n-th eigenstate of the risk operator, centered at the origin.
struct HermiteForm {
  int order = 0;
  RiskParams risk{};
};

/// Improper eigenstate |a> of the log-price operator.
struct DeltaForm {
  double location = 0.0;
};

/// Finite comb of improper eigenstates with complex weights.
struct DiscreteForm {
  std::vector<double> locations;
  std::vector<cplx> amplitudes;
};

/// Where a transformed sampled strategy came from, so the inverse transform
/// lands back on the original nodes.
struct ConjugateWindow {
  Grid padded;
  std::size_t offset = 0;
  std::size_t count = 0;
};

struct SampledForm {
  Grid grid;
  std::vector<cplx> amplitudes;
  std::optional<ConjugateWindow> conjugate{};
};

class Strategy {
 public:
  using Form = std::variant<GaussianForm, HermiteForm, DeltaForm, DiscreteForm, SampledForm>;

  explicit Strategy(Form form, Representation rep = Representation::demand, cplx scale = 1.0)
      : form_(std::move(form)), rep_(rep), scale_(scale) {
    validate();
  }

  static Strategy gaussian(double center, double width, double slope = 0.0,
                           Representation rep = Representation::demand) {
    return Strategy(GaussianForm{center, width, slope}, rep);
  }
  static Strategy hermite(int n, const RiskParams& risk,
                          Representation rep = Representation::demand) {
    return Strategy(HermiteForm{n, risk}, rep);
  }
  static Strategy delta(double location, Representation rep = Representation::demand) {
    return Strategy(DeltaForm{location}, rep);
  }
  static Strategy discrete(std::vector<double> locations, std::vector<cplx> amplitudes = {},
                           Representation rep = Representation::demand) {
    if (amplitudes.empty()) amplitudes.assign(locations.size(), cplx(1.0));
    return Strategy(DiscreteForm{std::move(locations), std::move(amplitudes)}, rep);
  }
  static Strategy sampled(Grid grid, std::vector<cplx> amplitudes,
                          Representation rep = Representation::demand) {
    return Strategy(SampledForm{grid, std::move(amplitudes)}, rep);
  }

  const Form& form() const { return form_; }
  Representation representation() const { return rep_; }
  cplx scale() const { return scale_; }

  bool is_improper() const {
    return std::holds_alternative<DeltaForm>(form_) || std::holds_alternative<DiscreteForm>(form_);
  }

  Strategy scaled(cplx factor) const {
    Strategy s = *this;
    s.scale_ *= factor;
    s.validate();
    return s;
  }

  /// Amplitude at x in this strategy's own representation.
  cplx amplitude(double x) const {
    require_proper("amplitude");
    return scale_ * std::visit([&](const auto& f) { return base_amplitude(f, x); }, form_);
  }

  std::vector<cplx> sample(const Grid& grid) const {
    std::vector<cplx> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = amplitude(grid[i]);
    return out;
  }

  double norm_squared() const {
    require_proper("norm");
    const double s2 = std::norm(scale_);
    if (const auto* smp = std::get_if<SampledForm>(&form_)) {
      std::vector<double> dens(smp->amplitudes.size());
      for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = std::norm(smp->amplitudes[i]);
      return s2 * integrate(dens, smp->grid);
    }
    return s2;  // analytic families are unit-normalized
  }

  /// Closed-form or quick estimate of (mean, std) of |amplitude|^2.
  std::pair<double, double> spread() const {
    require_proper("spread");
    if (const auto* g = std::get_if<GaussianForm>(&form_)) return {g->center, g->width};
    if (const auto* h = std::get_if<HermiteForm>(&form_))
      return {0.0, own_sigma0(*h) * std::sqrt(2.0 * h->order + 1.0)};
    const auto& smp = std::get<SampledForm>(form_);
    return sampled_moments(smp.grid, smp.amplitudes);
  }

  /// (|mean| + std scale) estimate of the conjugate variable under Planck constant hbar.
  std::pair<double, double> conjugate_spread(double hbar) const {
    require_proper("conjugate_spread");
    if (const auto* g = std::get_if<GaussianForm>(&form_))
      return {hbar * g->slope, hbar / (2.0 * g->width)};
    if (const auto* h = std::get_if<HermiteForm>(&form_)) {
      const double sig0 = rep_ == Representation::demand ? h->risk.sigma_p0() : h->risk.sigma_q0();
      return {0.0, sig0 * std::sqrt(2.0 * h->order + 1.0)};
    }
    const auto& smp = std::get<SampledForm>(form_);
    const auto [mean, sd] = sampled_moments(smp.grid, smp.amplitudes);
    (void)mean;
    // <k> = hbar Im<psi|psi'>, <k^2> = hbar^2 <psi'|psi'> with central differences.
    const auto& a = smp.amplitudes;
    const double h = smp.grid.spacing();
    std::vector<double> d2(a.size(), 0.0), cur(a.size(), 0.0), dens(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) dens[i] = std::norm(a[i]);
    for (std::size_t i = 1; i + 1 < a.size(); ++i) {
      const cplx der = (a[i + 1] - a[i - 1]) / (2.0 * h);
      d2[i] = std::norm(der);
      cur[i] = std::imag(std::conj(a[i]) * der);
    }
    const double nrm = integrate(dens, smp.grid);
    const double k1 = hbar * integrate(cur, smp.grid) / nrm;
    const double k2 = hbar * hbar * integrate(d2, smp.grid) / nrm;
    double sdk = std::sqrt(std::max(0.0, k2 - k1 * k1));
    sdk = std::max(sdk, hbar / (2.0 * std::max(sd, 1e-300)));
    return {std::abs(k1), sdk};
  }

  /// Grid covering the support: center +- 8 std, or the sampled grid itself.
  Grid natural_grid(std::size_t n = 2048) const {
    require_proper("natural_grid");
    if (const auto* smp = std::get_if<SampledForm>(&form_)) return smp->grid;
    const auto [mean, sd] = spread();
    return Grid(mean - 8.0 * sd, mean + 8.0 * sd, n);
  }

 private:
  void validate() const {
    if (!std::isfinite(scale_.real()) || !std::isfinite(scale_.imag()))
      throw InvalidParameter("strategy scale must be finite");
    std::visit([](const auto& f) { check_form(f); }, form_);
  }

  void require_proper(const char* what) const {
    if (is_improper())
      throw ImproperState(std::string(what) + ": delta/discrete strategies are not normalizable");
  }

  static void check_form(const GaussianForm& g) {
    if (!(g.width > 0) || !std::isfinite(g.width)) throw InvalidParameter("gaussian width must be > 0");
    if (!std::isfinite(g.center) || !std::isfinite(g.slope))
      throw InvalidParameter("gaussian parameters must be finite");
  }
  static void check_form(const HermiteForm& h) {
    if (h.order < 0) throw InvalidParameter("hermite order must be >= 0");
    h.risk.validate();
  }
  static void check_form(const DeltaForm& d) {
    if (!std::isfinite(d.location)) throw InvalidParameter("delta location must be finite");
  }
  static void check_form(const DiscreteForm& d) {
    if (d.locations.empty()) throw InvalidParameter("discrete strategy needs at least one location");
    if (d.locations.size() != d.amplitudes.size())
      throw ContractViolation("discrete strategy: locations/amplitudes size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < d.locations.size(); ++i) {
      if (!std::isfinite(d.locations[i])) throw InvalidParameter("discrete location must be finite");
      total += std::norm(d.amplitudes[i]);
    }
    if (!(total > 0)) throw DegenerateState("discrete strategy has zero weight");
  }
  static void check_form(const SampledForm& s) {
    if (s.amplitudes.size() != s.grid.size())
      throw ContractViolation("sampled strategy: amplitude count does not match grid");
    double total = 0.0;
    for (const auto& a : s.amplitudes) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
        throw InvalidParameter("sampled amplitudes must be finite");
      total += std::norm(a);
    }
    if (!(total > 0)) throw DegenerateState("sampled strategy has zero L2 norm");
  }

  double own_sigma0(const HermiteForm& h) const {
    return rep_ == Representation::demand ? h.risk.sigma_q0() : h.risk.sigma_p0();
  }

  static cplx base_amplitude(const GaussianForm& g, double x) {
    const double u = (x - g.center) / g.width;
    const double mod = std::pow(2.0 * std::numbers::pi * g.width * g.width, -0.25) * std::exp(-0.25 * u * u);
    return std::polar(mod, g.slope * x);
  }
  cplx base_amplitude(const HermiteForm& h, double x) const {
    // psi_n(x) = s^{-1/2} phi_n(x / s), s = sqrt(2) sigma0; supply picture adds (-i)^n.
    const double s = std::numbers::sqrt2 * own_sigma0(h);
    const double v = hermite_function(h.order, x / s) / std::sqrt(s);
    if (rep_ == Representation::demand) return v;
    static constexpr cplx kPhase[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    return v * kPhase[h.order % 4];
  }
  static cplx base_amplitude(const DeltaForm&, double) { return 0.0; }
  static cplx base_amplitude(const DiscreteForm&, double) { return 0.0; }
  static cplx base_amplitude(const SampledForm& s, double x) {
    return interpolate<cplx, 6>(std::span<const cplx>(s.amplitudes), s.grid, x);
  }

  static std::pair<double, double> sampled_moments(const Grid& grid, const std::vector<cplx>& a) {
    std::vector<double> d(a.size()), xd(a.size()), x2d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      d[i] = std::norm(a[i]);
      xd[i] = grid[i] * d[i];
    }
    const double nrm = integrate(d, grid);
    const double mean = integrate(xd, grid) / nrm;
    for (std::size_t i = 0; i < a.size(); ++i) x2d[i] = (grid[i] - mean) * (grid[i] - mean) * d[i];
    return {mean, std::sqrt(integrate(x2d, grid) / nrm)};
  }

  Form form_;
  Representation rep_;
  cplx scale_;
};

/// Players of one market round. Each strategy is held independently.
struct MarketState {
  std::vector<Strategy> traders;

  explicit MarketState(std::vector<Strategy> t) : traders(std::move(t)) {
    if (traders.empty()) throw ContractViolation("market state needs at least one trader");
  }
  std::size_t size() const { return traders.size(); }
};

// ---------------------------------------------------------------------------
// Price measure: distribution of the strategy's own variable.

class PriceMeasure {
 public:
  struct Normal {
    double mean;
    double sd;
  };
  struct Atoms {
    std::vector<double> points;   // sorted ascending
    std::vector<double> weights;  // normalized
  };

  explicit PriceMeasure(Normal n) : impl_(n) {}
  explicit PriceMeasure(TabulatedCdf t) : impl_(std::move(t)) {}
  explicit PriceMeasure(Atoms a) : impl_(std::move(a)) {}

  bool is_atomic() const { return std::holds_alternative<Atoms>(impl_); }
  const Atoms* atoms() const { return std::get_if<Atoms>(&impl_); }

  /// P(X <= x).
  double cdf(double x) const {
    if (const auto* n = std::get_if<Normal>(&impl_)) return normal_cdf((x - n->mean) / n->sd);
    if (const auto* t = std::get_if<TabulatedCdf>(&impl_)) return t->cdf(x);
    const auto& a = std::get<Atoms>(impl_);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.points.size() && a.points[i] <= x; ++i) acc += a.weights[i];
    return std::min(acc, 1.0);
  }

  /// P(X < x).
  double cdf_below(double x) const {
    if (const auto* a = std::get_if<Atoms>(&impl_)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < a->points.size() && a->points[i] < x; ++i) acc += a->weights[i];
      return std::min(acc, 1.0);
    }
    return cdf(x);
  }

  /// Density for continuous measures.
  double pdf(double x) const {
    if (const auto* n = std::get_if<Normal>(&impl_)) return normal_pdf((x - n->mean) / n->sd) / n->sd;
    if (const auto* t = std::get_if<TabulatedCdf>(&impl_)) return t->pdf(x);
    throw ImproperState("pdf: atomic measure has no density");
  }

  /// Quadrature grid for continuous measures.
  Grid support(std::size_t n = 4001) const {
    if (const auto* nm = std::get_if<Normal>(&impl_))
      return Grid(nm->mean - 10.0 * nm->sd, nm->mean + 10.0 * nm->sd, n);
    if (const auto* t = std::get_if<TabulatedCdf>(&impl_)) return t->grid();
    throw ImproperState("support: atomic measure");
  }

  double sample(RandomSource& rng) const {
    if (const auto* n = std::get_if<Normal>(&impl_)) return n->mean + n->sd * rng.normal();
    if (const auto* t = std::get_if<TabulatedCdf>(&impl_)) return t->quantile(rng.uniform());
    const auto& a = std::get<Atoms>(impl_);
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      acc += a.weights[i];
      if (u < acc) return a.points[i];
    }
    return a.points.back();
  }

 private:
  std::variant<Normal, TabulatedCdf, Atoms> impl_;
};

inline PriceMeasure price_measure(const Strategy& s) {
  const auto& form = s.form();
  if (const auto* g = std::get_if<GaussianForm>(&form))
    return PriceMeasure(PriceMeasure::Normal{g->center, g->width});
  if (const auto* d = std::get_if<DeltaForm>(&form))
    return PriceMeasure(PriceMeasure::Atoms{{d->location}, {1.0}});
  if (const auto* d = std::get_if<DiscreteForm>(&form)) {
    std::vector<std::size_t> idx(d->locations.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](auto a, auto b) { return d->locations[a] < d->locations[b]; });
    PriceMeasure::Atoms atoms;
    double total = 0.0;
    for (auto i : idx) total += std::norm(d->amplitudes[i]);
    for (auto i : idx) {
      const double w = std::norm(d->amplitudes[i]) / total;
      if (!atoms.points.empty() && atoms.points.back() == d->locations[i])
        atoms.weights.back() += w;
      else {
        atoms.points.push_back(d->locations[i]);
        atoms.weights.push_back(w);
      }
    }
    return PriceMeasure(std::move(atoms));
  }
  const Grid grid = s.natural_grid(4097);
  const auto amps = s.sample(grid);
  std::vector<double> dens(amps.size());
  for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = std::norm(amps[i]);
  return PriceMeasure(TabulatedCdf(grid, std::move(dens)));
}

// ---------------------------------------------------------------------------
// Operations

/// Unit-norm copy; amplitudes change by a positive factor only.
inline Strategy normalize(const Strategy& s) {
  if (s.is_improper()) throw ImproperState("normalize: delta/discrete strategy");
  const double n2 = s.norm_squared();
  if (!(n2 > 0) || !std::isfinite(n2)) throw DegenerateState("normalize: zero amplitude vector");
  return s.scaled(1.0 / std::sqrt(n2));
}

namespace detail {

inline Strategy transform_strategy(const Strategy& s, double hbar, Representation target) {
  constexpr std::size_t kMaxPoints = std::size_t{1} << 21;
  const int sign = target == Representation::supply ? -1 : +1;

  if (const auto* smp = std::get_if<SampledForm>(&s.form())) {
    const double dx = smp->grid.spacing();
    // Coming back from a previous transform: land on the original nodes.
    if (smp->conjugate) {
      const auto& win = *smp->conjugate;
      const Grid recip = reciprocal_grid(smp->grid, win.padded.lo(), hbar);
      if (std::abs(recip.spacing() - win.padded.spacing()) <= 1e-9 * win.padded.spacing()) {
        std::vector<cplx> amps(smp->amplitudes);
        for (auto& a : amps) a *= s.scale();
        auto out = fourier_transform(amps, smp->grid, win.padded.lo(), sign, hbar);
        std::vector<cplx> trimmed(out.amplitudes.begin() + static_cast<std::ptrdiff_t>(win.offset),
                                  out.amplitudes.begin() +
                                      static_cast<std::ptrdiff_t>(win.offset + win.count));
        SampledForm back{Grid::from_spacing(out.grid[win.offset], out.grid.spacing(), win.count),
                         std::move(trimmed)};
        return Strategy(std::move(back), target);
      }
    }
    const auto [km, ks] = s.conjugate_spread(hbar);
    (void)km;
    const std::size_t n = smp->grid.size();
    const double want = 40.0 * std::numbers::pi * hbar / (dx * ks);
    std::size_t np = next_pow2(std::max<std::size_t>(n, static_cast<std::size_t>(std::ceil(want))));
    np = std::min(np, std::max(kMaxPoints, next_pow2(n)));
    const std::size_t offset = (np - n) / 2;
    const Grid padded = Grid::from_spacing(smp->grid.lo() - static_cast<double>(offset) * dx, dx, np);
    std::vector<cplx> amps(np, cplx(0.0));
    for (std::size_t i = 0; i < n; ++i) amps[offset + i] = s.scale() * smp->amplitudes[i];
    const double lo = -static_cast<double>(np / 2) * reciprocal_grid(padded, 0.0, hbar).spacing();
    auto out = fourier_transform(amps, padded, lo, sign, hbar);
    SampledForm res{out.grid, std::move(out.amplitudes), ConjugateWindow{padded, offset, n}};
    return Strategy(std::move(res), target);
  }

  // Analytic: sample on a grid balanced between both pictures.
  const auto [mx, sx] = s.spread();
  const auto [mk, sk] = s.conjugate_spread(hbar);
  const double lx = std::abs(mx) + 10.0 * sx;
  const double lk = std::abs(mk) + 10.0 * sk;
  const double dx = std::min(sx / 32.0, std::numbers::pi * hbar / lk);
  const double need_span = std::ceil(2.0 * lx / dx) + 1.0;
  // Output spacing must resolve both the conjugate spread and the finest
  // conjugate feature, roughly hbar / lx; the second needs zero padding.
  const double need_res = std::max(std::ceil(80.0 * std::numbers::pi * hbar / (dx * sk)), 8.0 * need_span);
  std::size_t np = next_pow2(static_cast<std::size_t>(std::max({2048.0, need_span, need_res})));
  np = std::min(np, kMaxPoints);
  const Grid gx = Grid::centered(dx, np);
  const auto amps = s.sample(gx);
  const double lo = -static_cast<double>(np / 2) * reciprocal_grid(gx, 0.0, hbar).spacing();
  auto out = fourier_transform(amps, gx, lo, sign, hbar);
  SampledForm res{out.grid, std::move(out.amplitudes), ConjugateWindow{gx, 0, np}};
  return Strategy(std::move(res), target);
}

}  // namespace detail

/// <p|psi> from a demand-picture strategy, using hbar_eff of the risk params.
inline Strategy to_supply_rep(const Strategy& s, const RiskParams& risk) {
  risk.validate();
  if (s.representation() != Representation::demand)
    throw RepresentationMismatch("to_supply_rep: strategy is already in the supply picture");
  if (s.is_improper())
    throw ImproperState("to_supply_rep: the transform of a delta strategy is a plane wave");
  return detail::transform_strategy(s, risk.hbar_eff(), Representation::supply);
}

/// <q|psi> from a supply-picture strategy.
inline Strategy to_demand_rep(const Strategy& s, const RiskParams& risk) {
  risk.validate();
  if (s.representation() != Representation::supply)
    throw RepresentationMismatch("to_demand_rep: strategy is already in the demand picture");
  if (s.is_improper())
    throw ImproperState("to_demand_rep: the transform of a delta strategy is a plane wave");
  return detail::transform_strategy(s, risk.hbar_eff(), Representation::demand);
}

/// Probability that the trader buys at log-price ln c or lower.
inline double buy_probability(const Strategy& s, double log_price) {
  if (s.representation() != Representation::demand)
    throw RepresentationMismatch("buy_probability needs a demand-picture strategy");
  return std::clamp(price_measure(s).cdf(log_price), 0.0, 1.0);
}

/// Probability that the trader sells at price c or greater: P(p <= ln(1/c)).
inline double sell_probability(const Strategy& s, double log_price) {
  if (s.representation() != Representation::supply)
    throw RepresentationMismatch("sell_probability needs a supply-picture strategy");
  return std::clamp(price_measure(s).cdf(-log_price), 0.0, 1.0);
}

inline double sell_probability(const Strategy& s, double log_price, const RiskParams& risk) {
  if (s.representation() == Representation::demand)
    return sell_probability(to_supply_rep(s, risk), log_price);
  return sell_probability(s, log_price);
}

struct Moments {
  double mean;
  double std;
};

/// Mean and standard deviation of |amplitude|^2 by quadrature.
inline Moments moments(const Strategy& s) {
  if (s.is_improper()) throw ImproperState("moments: delta/discrete strategy");
  const Grid grid = s.natural_grid();
  const auto a = s.sample(grid);
  std::vector<double> d(a.size()), w(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = std::norm(a[i]);
    w[i] = grid[i] * d[i];
  }
  const double nrm = integrate(d, grid);
  const double mean = integrate(w, grid) / nrm;
  for (std::size_t i = 0; i < a.size(); ++i) w[i] = (grid[i] - mean) * (grid[i] - mean) * d[i];
  return {mean, std::sqrt(integrate(w, grid) / nrm)};
}

/// Sampled superposition sum_k c_k s_k on a grid (cat states and the like).
inline Strategy superpose(const std::vector<Strategy>& parts, const std::vector<cplx>& coeffs,
                          const Grid& grid) {
  if (parts.empty() || parts.size() != coeffs.size())
    throw ContractViolation("superpose: parts and coefficients must be nonempty and equal length");
  std::vector<cplx> amps(grid.size(), cplx(0.0));
  const Representation rep = parts.front().representation();
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (parts[k].representation() != rep)
      throw RepresentationMismatch("superpose: mixed representations");
    for (std::size_t i = 0; i < grid.size(); ++i) amps[i] += coeffs[k] * parts[k].amplitude(grid[i]);
  }
  return normalize(Strategy::sampled(grid, std::move(amps), rep));
}

}  // namespace qmg
