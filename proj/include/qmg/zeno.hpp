#pragma once

// Repeated observation of a strategy evolving under the risk operator.
// The state is expanded in the eigenbasis of H; between measurements level k
// picks up exp(-i E_k dt / hbar_E), and each measurement projects back onto
// the initial strategy.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qmg/errors.hpp"
#include "qmg/numerics.hpp"
#include "qmg/risk.hpp"
#include "qmg/strategy.hpp"

namespace qmg {

inline constexpr std::size_t kZenoDefaultLevels = 128;
inline constexpr std::size_t kZenoMaxLevels = 4096;
inline constexpr double kZenoNormTolerance = 1e-8;

namespace detail {

// Overlaps <phi_k|psi>, k < levels, by trapezoid quadrature on a grid fine
// enough for the highest retained level.
inline std::vector<cplx> hermite_overlaps(const Strategy& s, const RiskParams& risk, std::size_t levels) {
  const bool demand = s.representation() == Representation::demand;
  const double scale = std::numbers::sqrt2 * (demand ? risk.sigma_q0() : risk.sigma_p0());
  const auto [mean, sd] = s.spread();
  const double turning = scale * std::sqrt(2.0 * static_cast<double>(levels) + 1.0);
  const double lo = std::min(mean - 10.0 * sd, -turning - 8.0 * scale);
  const double hi = std::max(mean + 10.0 * sd, turning + 8.0 * scale);
  double h = std::min(sd / 16.0, scale / (8.0 * std::sqrt(2.0 * static_cast<double>(levels) + 1.0)));
  if (const auto* smp = std::get_if<SampledForm>(&s.form())) h = std::min(h, smp->grid.spacing());
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
  const Grid g(lo, hi, std::max<std::size_t>(n, 8));

  static constexpr cplx kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};  // conj((-i)^k)
  std::vector<CompensatedSum> re(levels), im(levels);
  const double dx = g.spacing();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx a = s.amplitude(g[i]);
    if (a == cplx(0.0)) continue;
    const double w = (i == 0 || i + 1 == g.size()) ? 0.5 * dx : dx;
    const auto phi = hermite_functions(static_cast<int>(levels) - 1, g[i] / scale);
    for (std::size_t k = 0; k < levels; ++k) {
      cplx c = w * phi[k] / std::sqrt(scale) * a;
      if (!demand) c *= kPhase[k % 4];
      re[k].add(c.real());
      im[k].add(c.imag());
    }
  }
  std::vector<cplx> out(levels);
  for (std::size_t k = 0; k < levels; ++k) out[k] = {re[k].value(), im[k].value()};
  return out;
}

}  // namespace detail

/// Initial strategy in the H eigenbasis, observed n_measurements times
/// during total_time (physical time; the level phases advance by E_k t / hbar_E).
struct ZenoRun {
  std::vector<cplx> coefficients;
  double total_time = 0.0;
  std::size_t n_measurements = 1;
  RiskParams risk{};

  static ZenoRun from_coefficients(std::vector<cplx> c, double total_time, std::size_t n,
                                   RiskParams risk = {}) {
    if (c.empty()) throw InvalidParameter("zeno: empty coefficient vector");
    double norm = 0.0;
    for (const auto& x : c) norm += std::norm(x);
    if (!(norm > 0) || !std::isfinite(norm)) throw DegenerateState("zeno: zero coefficient vector");
    for (auto& x : c) x /= std::sqrt(norm);
    ZenoRun r{std::move(c), total_time, n, risk};
    r.validate();
    return r;
  }

  /// Projects the strategy onto the first M eigenstates of H, doubling M from
  /// 128 until the captured norm reaches 1 - 1e-8.
  static ZenoRun from_strategy(const Strategy& s, double total_time, std::size_t n,
                               RiskParams risk = {}) {
    risk.validate();
    if (s.is_improper()) throw ImproperState("zeno: delta/discrete strategies have no finite expansion");
    if (const auto* h = std::get_if<HermiteForm>(&s.form()); h && h->risk == risk) {
      std::vector<cplx> c(static_cast<std::size_t>(h->order) + 1, cplx(0.0));
      c.back() = 1.0;
      return from_coefficients(std::move(c), total_time, n, risk);
    }
    const Strategy unit = normalize(s);
    double captured = 0.0;
    for (std::size_t m = kZenoDefaultLevels; m <= kZenoMaxLevels; m *= 2) {
      auto c = detail::hermite_overlaps(unit, risk, m);
      captured = 0.0;
      for (const auto& x : c) captured += std::norm(x);
      if (captured >= 1.0 - kZenoNormTolerance) return from_coefficients(std::move(c), total_time, n, risk);
    }
    throw TruncationError("zeno: " + std::to_string(kZenoMaxLevels) + " levels capture only " +
                          std::to_string(captured) + " of the norm");
  }

  void validate() const {
    risk.validate();
    if (coefficients.empty()) throw InvalidParameter("zeno: empty coefficient vector");
    if (n_measurements < 1) throw InvalidParameter("zeno: n_measurements must be >= 1");
    if (!std::isfinite(total_time)) throw InvalidParameter("zeno: total_time must be finite");
  }
};

/// exp(-i H dt / hbar_E) applied to eigenbasis coefficients.
inline std::vector<cplx> evolve(std::span<const cplx> c, const RiskParams& risk, double dt) {
  const double quantum = effective_planck(risk) * risk.omega() / risk.hbar_e;
  std::vector<cplx> out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k)
    out[k] = c[k] * std::polar(1.0, -(static_cast<double>(k) + 0.5) * quantum * dt);
  return out;
}

/// |<psi|U(T/n)|psi>|^{2n}. The phase of the heaviest level is factored out
/// so that an eigenstate gives exactly 1.
inline double survival_probability(const ZenoRun& run, std::size_t n) {
  run.validate();
  if (n < 1) throw InvalidParameter("zeno: n_measurements must be >= 1");
  const auto& c = run.coefficients;
  std::size_t dominant = 0;
  for (std::size_t k = 1; k < c.size(); ++k)
    if (std::norm(c[k]) > std::norm(c[dominant])) dominant = k;
  const double step = effective_planck(run.risk) * run.risk.omega() / run.risk.hbar_e * run.total_time /
                      static_cast<double>(n);
  cplx amp = std::norm(c[dominant]);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k == dominant) continue;
    const double rel = static_cast<double>(static_cast<long long>(k) - static_cast<long long>(dominant));
    amp += std::norm(c[k]) * std::polar(1.0, -rel * step);
  }
  const double overlap = std::norm(amp);
  if (overlap == 1.0) return 1.0;
  return std::clamp(std::pow(overlap, static_cast<double>(n)), 0.0, 1.0);
}

inline double survival_probability(const ZenoRun& run) {
  return survival_probability(run, run.n_measurements);
}

struct ZenoRow {
  std::size_t n;
  double survival;
};

inline std::vector<ZenoRow> freeze_experiment(const ZenoRun& run, std::span<const std::size_t> n_values) {
  if (n_values.empty()) throw InvalidParameter("freeze_experiment: no n values");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 1) throw InvalidParameter("freeze_experiment: n values must be >= 1");
    if (i > 0 && n_values[i] <= n_values[i - 1])
      throw InvalidParameter("freeze_experiment: n values must be ascending");
  }
  std::vector<ZenoRow> rows;
  rows.reserve(n_values.size());
  for (auto n : n_values) rows.push_back({n, survival_probability(run, n)});
  return rows;
}

}  // namespace qmg
