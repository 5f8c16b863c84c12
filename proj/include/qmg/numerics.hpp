#pragma once

// Shared numerical substrate: uniform grids, quadrature, interpolation,
// tabulated cumulative integrals, the hbar-scaled Fourier transform,
// bracketed root finding and a seedable random source.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qmg/errors.hpp"

namespace qmg {

using cplx = std::complex<double>;

/// Uniformly spaced points lo, lo + h, ..., lo + (n-1) h.
class Grid {
 public:
  static constexpr std::size_t kMinPoints = 8;

  Grid(double lo, double hi, std::size_t n) : lo_(lo), n_(n) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw InvalidParameter("grid requires finite lo < hi");
    if (n < kMinPoints) throw InvalidParameter("grid requires at least 8 points");
    spacing_ = (hi - lo) / static_cast<double>(n - 1);
  }

  static Grid from_spacing(double lo, double spacing, std::size_t n) {
    if (!(spacing > 0)) throw InvalidParameter("grid spacing must be positive");
    Grid g(lo, lo + spacing * static_cast<double>(n - 1), n);
    g.spacing_ = spacing;
    return g;
  }

  /// Grid whose node n/2 sits at the origin.
  static Grid centered(double spacing, std::size_t n) {
    return from_spacing(-static_cast<double>(n / 2) * spacing, spacing, n);
  }

  double lo() const { return lo_; }
  double hi() const { return lo_ + spacing_ * static_cast<double>(n_ - 1); }
  double spacing() const { return spacing_; }
  std::size_t size() const { return n_; }
  double operator[](std::size_t i) const { return lo_ + spacing_ * static_cast<double>(i); }
  bool contains(double x) const { return x >= lo_ && x <= hi(); }

  std::vector<double> points() const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = (*this)[i];
    return out;
  }

  bool operator==(const Grid&) const = default;

 private:
  double lo_;
  std::size_t n_;
  double spacing_{};
};

// ---------------------------------------------------------------------------
// Scalar helpers

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// Quadrature

/// Composite trapezoid rule over the whole grid. Spectrally accurate for
/// smooth integrands that decay at both ends.
template <class T>
T integrate(std::span<const T> samples, const Grid& grid) {
  if (samples.size() != grid.size())
    throw ContractViolation("integrate: sample count " + std::to_string(samples.size()) +
                            " does not match grid size " + std::to_string(grid.size()));
  T acc{};
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) acc += samples[i];
  acc += (samples.front() + samples.back()) * 0.5;
  return acc * grid.spacing();
}

inline double integrate(const std::vector<double>& samples, const Grid& grid) {
  return integrate(std::span<const double>(samples), grid);
}

namespace detail {

// Weights of the Lagrange cubic through local nodes s = -1, 0, 1, 2,
// integrated from 0 to t.
inline void cubic_partial_weights(double t, double w[4]) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
  w[0] = -(t4 / 4.0 - t3 + t2) / 6.0;
  w[1] = (t4 / 4.0 - 2.0 * t3 / 3.0 - t2 / 2.0 + 2.0 * t) / 2.0;
  w[2] = -(t4 / 4.0 - t3 / 3.0 - t2) / 2.0;
  w[3] = (t4 / 4.0 - t2 / 2.0) / 6.0;
}

// Quadratic through s = 0, 1, 2 integrated from 0 to t (first cell).
inline void quad_head_weights(double t, double w[3]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = (t3 / 3.0 - 1.5 * t2 + 2.0 * t) / 2.0;
  w[1] = -(t3 / 3.0 - t2);
  w[2] = (t3 / 3.0 - t2 / 2.0) / 2.0;
}

// Quadratic through s = -1, 0, 1 integrated from 0 to t (last cell).
inline void quad_tail_weights(double t, double w[3]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = (t3 / 3.0 - t2 / 2.0) / 2.0;
  w[1] = t - t3 / 3.0;
  w[2] = (t3 / 3.0 + t2 / 2.0) / 2.0;
}

// Integral of the local interpolant over [x_i, x_i + t h].
template <class T>
T cell_partial(std::span<const T> f, std::size_t i, double t, double h) {
  const std::size_t n = f.size();
  if (i == 0) {
    double w[3];
    quad_head_weights(t, w);
    return (f[0] * w[0] + f[1] * w[1] + f[2] * w[2]) * h;
  }
  if (i + 2 >= n) {
    double w[3];
    quad_tail_weights(t, w);
    return (f[n - 3] * w[0] + f[n - 2] * w[1] + f[n - 1] * w[2]) * h;
  }
  double w[4];
  cubic_partial_weights(t, w);
  return (f[i - 1] * w[0] + f[i] * w[1] + f[i + 1] * w[2] + f[i + 2] * w[3]) * h;
}

// Locate x: cell index i with x in [x_i, x_{i+1}] and fraction t.
inline void locate(const Grid& g, double x, std::size_t& i, double& t) {
  const double s = (x - g.lo()) / g.spacing();
  const double fl = std::floor(s);
  auto idx = static_cast<std::ptrdiff_t>(fl);
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(g.size()) - 2);
  i = static_cast<std::size_t>(idx);
  t = s - static_cast<double>(idx);
}

}  // namespace detail

/// Fourth-order cumulative integral at the grid nodes:
/// out[i] = integral of the sampled function from lo to x_i.
template <class T>
std::vector<T> cumulative_integral(std::span<const T> f, const Grid& grid) {
  if (f.size() != grid.size()) throw ContractViolation("cumulative_integral: size mismatch");
  std::vector<T> out(f.size());
  out[0] = T{};
  for (std::size_t i = 0; i + 1 < f.size(); ++i)
    out[i + 1] = out[i] + detail::cell_partial(f, i, 1.0, grid.spacing());
  return out;
}

/// Lagrange interpolation on a Points-node stencil (cubic by default); zero
/// outside the grid.
template <class T, std::size_t Points = 4>
T interpolate(std::span<const T> f, const Grid& grid, double x) {
  static_assert(Points >= 2 && Points % 2 == 0);
  if (!grid.contains(x)) return T{};
  const std::size_t n = f.size();
  if (n < Points) throw ContractViolation("interpolate: grid too short for the stencil");
  std::size_t i;
  double t;
  detail::locate(grid, x, i, t);
  constexpr std::size_t half = Points / 2 - 1;
  std::size_t base = i >= half ? i - half : 0;
  if (base + Points > n) base = n - Points;
  const double s = t + static_cast<double>(i) - static_cast<double>(base);  // position in stencil
  T acc{};
  for (std::size_t a = 0; a < Points; ++a) {
    double w = 1.0;
    for (std::size_t b = 0; b < Points; ++b)
      if (a != b) w *= (s - static_cast<double>(b)) / (static_cast<double>(a) - static_cast<double>(b));
    acc += f[base + a] * w;
  }
  return acc;
}

/// Cumulative distribution of a tabulated density. The density is
/// normalized over the grid; mass outside [lo, hi] is zero.
class TabulatedCdf {
 public:
  TabulatedCdf(Grid grid, std::vector<double> density) : grid_(grid), density_(std::move(density)) {
    if (density_.size() != grid_.size()) throw ContractViolation("TabulatedCdf: size mismatch");
    nodes_.assign(density_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < density_.size(); ++i) {
      const double cell = detail::cell_partial(std::span<const double>(density_), i, 1.0,
                                               grid_.spacing());
      nodes_[i + 1] = nodes_[i] + std::max(cell, 0.0);
    }
    total_ = nodes_.back();
    if (!(total_ > 0)) throw DegenerateState("tabulated density has no positive mass");
    for (auto& d : density_) d /= total_;
    for (auto& c : nodes_) c /= total_;
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& density() const { return density_; }
  /// Normalization constant that was divided out.
  double raw_mass() const { return total_; }

  double cdf(double x) const {
    if (x <= grid_.lo()) return 0.0;
    if (x >= grid_.hi()) return 1.0;
    std::size_t i;
    double t;
    detail::locate(grid_, x, i, t);
    const double cell = nodes_[i + 1] - nodes_[i];
    double part = detail::cell_partial(std::span<const double>(density_), i, t, grid_.spacing());
    part = std::clamp(part, 0.0, cell);
    return nodes_[i] + part;
  }

  double pdf(double x) const {
    return std::max(0.0, interpolate(std::span<const double>(density_), grid_, x));
  }

  /// Inverse CDF: linear guess within the cell, then safeguarded Newton steps.
  double quantile(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u);
    if (it == nodes_.begin()) return grid_.lo();
    if (it == nodes_.end()) return grid_.hi();
    const auto i = static_cast<std::size_t>(std::distance(nodes_.begin(), it)) - 1;
    const double cell = nodes_[i + 1] - nodes_[i];
    if (!(cell > 0)) return grid_[i];
    double lo = grid_[i], hi = grid_[i] + grid_.spacing();
    double x = lo + (u - nodes_[i]) / cell * grid_.spacing();
    for (int k = 0; k < 6; ++k) {
      const double r = cdf(x) - u;
      (r > 0 ? hi : lo) = x;
      const double d = pdf(x);
      double next = d > 0 ? x - r / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - x) < 1e-15 * (1.0 + std::abs(x))) return next;
      x = next;
    }
    return x;
  }

 private:
  Grid grid_;
  std::vector<double> density_;
  std::vector<double> nodes_;
  double total_ = 0.0;
};

// ---------------------------------------------------------------------------
// Fourier transform between conjugate log-price variables.
//
//   out(y) = (2 pi hbar)^{-1/2} \int exp(sign * i * x * y / hbar) in(x) dx
//
// sampled on the reciprocal grid whose spacing satisfies dx * dy = 2 pi hbar / n.
// On such a pair of grids the discretized transform is an exact unitary DFT,
// so forward followed by backward reproduces the input to rounding error.

struct Transformed {
  std::vector<cplx> amplitudes;
  Grid grid;
};

inline Grid reciprocal_grid(const Grid& from, double to_lo, double hbar) {
  if (!(hbar > 0)) throw InvalidParameter("hbar must be positive");
  const double n = static_cast<double>(from.size());
  return Grid::from_spacing(to_lo, 2.0 * std::numbers::pi * hbar / (n * from.spacing()),
                            from.size());
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place complex DFT, sign -1 (FFTW_FORWARD) or +1 (FFTW_BACKWARD).
inline void fft_inplace(std::vector<cplx>& data, int sign) {
  const int n = static_cast<int>(data.size());
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * data.size()));
  if (buf == nullptr) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(n, buf, buf, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    buf[i][0] = data[i].real();
    buf[i][1] = data[i].imag();
  }
  fftw_execute(plan);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = cplx(buf[i][0], buf[i][1]);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

}  // namespace detail

/// General conjugate transform onto reciprocal_grid(from, to_lo, hbar).
inline Transformed fourier_transform(std::span<const cplx> amplitudes, const Grid& from,
                                     double to_lo, int sign, double hbar) {
  if (amplitudes.size() != from.size())
    throw ContractViolation("fourier: amplitude count does not match grid");
  if (!(hbar > 0)) throw InvalidParameter("fourier: hbar must be positive");
  Grid to = reciprocal_grid(from, to_lo, hbar);
  const double s = sign < 0 ? -1.0 : 1.0;
  const double dx = from.spacing();
  const double dy = to.spacing();
  std::vector<cplx> work(amplitudes.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    const double phase = s * to_lo * (static_cast<double>(i) * dx) / hbar;
    work[i] = amplitudes[i] * std::polar(1.0, phase);
  }
  detail::fft_inplace(work, sign);
  const double scale = dx / std::sqrt(2.0 * std::numbers::pi * hbar);
  for (std::size_t j = 0; j < work.size(); ++j) {
    const double phase = s * (to_lo * from.lo() + static_cast<double>(j) * dy * from.lo()) / hbar;
    work[j] *= scale * std::polar(1.0, phase);
  }
  return {std::move(work), to};
}

/// <p|psi> from <q|psi> with kernel exp(-i p q / hbar); the p grid is centered.
inline Transformed fourier_q_to_p(std::span<const cplx> amplitudes, const Grid& grid_q,
                                  double hbar) {
  if (!(hbar > 0)) throw InvalidParameter("fourier_q_to_p: hbar must be positive");
  const Grid probe = reciprocal_grid(grid_q, 0.0, hbar);
  const double lo = -static_cast<double>(grid_q.size() / 2) * probe.spacing();
  return fourier_transform(amplitudes, grid_q, lo, -1, hbar);
}

/// Inverse of fourier_q_to_p onto the q grid starting at q_lo.
inline Transformed fourier_p_to_q(std::span<const cplx> amplitudes, const Grid& grid_p,
                                  double hbar, double q_lo) {
  return fourier_transform(amplitudes, grid_p, q_lo, +1, hbar);
}

inline Transformed fourier_p_to_q(std::span<const cplx> amplitudes, const Grid& grid_p,
                                  double hbar) {
  if (!(hbar > 0)) throw InvalidParameter("fourier_p_to_q: hbar must be positive");
  const Grid probe = reciprocal_grid(grid_p, 0.0, hbar);
  return fourier_p_to_q(amplitudes, grid_p, hbar,
                        -static_cast<double>(grid_p.size() / 2) * probe.spacing());
}

// ---------------------------------------------------------------------------
// Root finding

/// Bisection on a sign-changing bracket until its width is at most tol.
template <class F>
double find_root(F&& f, double lo, double hi, double tol = 1e-12) {
  if (!(lo < hi)) throw InvalidParameter("find_root: bracket must satisfy lo < hi");
  if (!(tol > 0)) throw InvalidParameter("find_root: tol must be positive");
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi) || std::isnan(flo) || std::isnan(fhi))
    throw BracketingError("find_root: no sign change on [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Random source

/// Reproducible random stream. Not thread-safe: give each worker its own
/// stream id.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace qmg
