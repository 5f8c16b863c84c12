#pragma once

// The risk inclination operator H = (P - p0)^2 / 2m + m omega^2 (Q - q0)^2 / 2:
// its spectrum, expectation values and the thermal (Gibbs) energy.

#include <cmath>
#include <vector>

#include "qmg/errors.hpp"
#include "qmg/strategy.hpp"

namespace qmg {

/// sqrt(hbar_E^2 + Theta^2).
inline double effective_planck(const RiskParams& risk) {
  risk.validate();
  return std::sqrt(risk.hbar_e * risk.hbar_e + risk.theta_nc * risk.theta_nc);
}

struct RiskSpectrum {
  std::vector<double> eigenvalues;  // ascending
  RiskParams risk;

  double ground() const { return eigenvalues.front(); }
};

/// (n + 1/2) hbar_eff omega for n = 0 .. n_levels - 1.
inline RiskSpectrum spectrum(const RiskParams& risk, int n_levels) {
  if (n_levels < 1) throw InvalidParameter("spectrum: n_levels must be >= 1");
  const double quantum = effective_planck(risk) * risk.omega();
  RiskSpectrum out{{}, risk};
  out.eigenvalues.reserve(static_cast<std::size_t>(n_levels));
  for (int n = 0; n < n_levels; ++n) out.eigenvalues.push_back((n + 0.5) * quantum);
  return out;
}

/// <H> for a demand-picture strategy. Both centers are the state's own means,
/// so <H> = Var(p) / 2m + m omega^2 Var(q) / 2. Var(p) comes from the
/// numerically transformed supply picture.
inline double risk_expectation(const Strategy& s, const RiskParams& risk) {
  risk.validate();
  if (s.is_improper()) throw ImproperState("risk_expectation: delta/discrete strategy");
  const Strategy demand =
      s.representation() == Representation::demand ? s : to_demand_rep(s, risk);
  const Strategy supply =
      s.representation() == Representation::supply ? s : to_supply_rep(s, risk);
  const Moments mq = moments(demand);
  const Moments mp = moments(supply);
  const double w = risk.omega();
  return mp.std * mp.std / (2.0 * risk.m) + risk.m * w * w * mq.std * mq.std / 2.0;
}

/// Inverse Gibbs parameter x = (2 / hbar omega) tanh(beta hbar omega / 2).
inline double thermal_x(double beta, const RiskParams& risk) {
  if (!(beta > 0) || !std::isfinite(beta)) throw InvalidParameter("beta must be > 0");
  const double q = effective_planck(risk) * risk.omega();
  return 2.0 / q * std::tanh(beta * q / 2.0);
}

/// Energy of the thermal mixture: 1 / x = (hbar omega / 2) coth(beta hbar omega / 2).
inline double thermal_energy(double beta, const RiskParams& risk) {
  return 1.0 / thermal_x(beta, risk);
}

}  // namespace qmg
