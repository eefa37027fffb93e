#pragma once

/** @file
 * Lag-domain Fourier sums for the copula, Wigner-Ville quantile and classical
 * time-varying spectra, plus the discrete pseudo-Wigner distribution of a
 * deterministic signal.
 */

#include "qspec/copula.hpp"
#include "qspec/models.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qspec {

using cplx = std::complex<double>;

/// Frequencies in (-pi, pi], strictly increasing.
struct FrequencyGrid {
  std::vector<double> omegas;

  /// Fourier frequencies 2 pi j / N for j in (-N/2, N/2].
  static FrequencyGrid fourier(std::int64_t N) {
    if (N < 2) throw std::invalid_argument("FrequencyGrid: N must be at least 2");
    FrequencyGrid g;
    g.omegas.reserve(static_cast<std::size_t>(N));
    for (std::int64_t j = -N / 2 + 1; j <= N / 2; ++j)
      g.omegas.push_back(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(N));
    // N odd puts the last point below pi; that is still inside (-pi, pi].
    return g;
  }

  static FrequencyGrid from(std::vector<double> omegas) {
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      if (!(omegas[i] > -std::numbers::pi && omegas[i] <= std::numbers::pi))
        throw std::invalid_argument("FrequencyGrid: frequency outside (-pi, pi]");
      if (i && !(omegas[i] > omegas[i - 1])) throw std::invalid_argument("FrequencyGrid: not strictly increasing");
    }
    return FrequencyGrid{std::move(omegas)};
  }

  std::size_t size() const { return omegas.size(); }

  /// Index of the grid point closest to omega on the circle.
  std::size_t nearest(double omega) const {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t j = 0; j < omegas.size(); ++j) {
      double d = std::remainder(omegas[j] - omega, 2.0 * std::numbers::pi);
      d = std::abs(d);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;
};

enum class Provenance { copula_tv, wv_quantile, classical_tv, classical_wv, wigner_signal, estimator };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::copula_tv: return "copula_tv";
    case Provenance::wv_quantile: return "wv_quantile";
    case Provenance::classical_tv: return "classical_tv";
    case Provenance::classical_wv: return "classical_wv";
    case Provenance::wigner_signal: return "wigner_signal";
    case Provenance::estimator: return "estimator";
  }
  return "?";
}

inline Provenance provenance_from_string(const std::string& s) {
  for (auto p : {Provenance::copula_tv, Provenance::wv_quantile, Provenance::classical_tv, Provenance::classical_wv,
                 Provenance::wigner_signal, Provenance::estimator})
    if (s == to_string(p)) return p;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

/**
 * Complex spectrum over a frequency grid and, for quantile spectra, a list
 * of tau-pairs.  Classical and signal spectra carry no tau-pairs and a
 * single column.
 */
struct SpectrumGrid {
  Provenance provenance = Provenance::copula_tv;
  double u_or_t0 = 0.0;
  std::int64_t T = 0;  // 0 where no array length applies
  std::int64_t H = 0;
  FrequencyGrid grid;
  std::vector<TauPair> taus;
  std::vector<cplx> values;  // values[pair * grid.size() + j]
  double tail_bound = 0.0;   // bound on the truncation error of every value

  std::size_t n_columns() const { return taus.empty() ? 1 : taus.size(); }
  const cplx& at(std::size_t j, std::size_t pair = 0) const { return values.at(pair * grid.size() + j); }
  cplx& at(std::size_t j, std::size_t pair = 0) { return values.at(pair * grid.size() + j); }

  SpectrumGrid scaled(double factor) const {
    SpectrumGrid out = *this;
    for (auto& v : out.values) v *= factor;
    out.tail_bound *= std::abs(factor);
    return out;
  }
};

namespace detail {

// scale * sum_{h=-H}^{H} coeffs[h + H] e^{-i h omega}, accumulated from the
// largest |h| inwards.
inline cplx lag_fourier(std::span<const double> coeffs, double omega, double scale) {
  const auto H = static_cast<std::int64_t>(coeffs.size() / 2);
  cplx acc{0.0, 0.0};
  for (std::int64_t h = H; h >= 1; --h) {
    const cplx e = std::polar(1.0, -static_cast<double>(h) * omega);
    acc += coeffs[static_cast<std::size_t>(H + h)] * e + coeffs[static_cast<std::size_t>(H - h)] * std::conj(e);
  }
  acc += coeffs[static_cast<std::size_t>(H)];
  return scale * acc;
}

}  // namespace detail

/**
 * Bound on (2 pi)^{-1} sum_{|h|>H} |gamma_h| when |corr(h)| <= c rate^|h|,
 * using |C_rho(t1,t2) - t1 t2| <= arcsin|rho| / (2 pi).
 */
inline double copula_tail_bound(double c, double rate, std::int64_t H) {
  if (rate <= 0.0) return 0.0;
  double sum = 0.0;
  double r = c * std::pow(rate, static_cast<double>(H + 1));
  for (std::int64_t h = H + 1; h < H + 100000; ++h) {
    const double term = std::asin(std::min(1.0, r));
    sum += term;
    if (term < 1e-18 * sum || term == 0.0) break;
    r *= rate;
  }
  return 2.0 * sum / (4.0 * std::numbers::pi * std::numbers::pi);
}

/// Smallest H >= 1 whose stationary copula tail bound is below tol.
inline std::int64_t default_stationary_H(const StationaryFamilyModel& family, double tol = 1e-10) {
  const double rate = std::abs(family.coefficient);
  std::int64_t H = 1;
  while (copula_tail_bound(1.0, rate, H) >= tol) ++H;
  return H;
}

/// ceil(T^{1/3}), the lag truncation used whenever an array length is in play.
inline std::int64_t cube_root_H(std::int64_t T) {
  auto H = static_cast<std::int64_t>(std::ceil(std::cbrt(static_cast<double>(T))));
  // guard against cbrt rounding at exact cubes
  while ((H - 1) * (H - 1) * (H - 1) >= T) --H;
  while (H * H * H < T) ++H;
  return std::max<std::int64_t>(H, 1);
}

/// (2 pi)^{-1} sum_{|h|<=H} gamma^u_h(tau1,tau2) e^{-i h omega}.
inline SpectrumGrid copula_tv_spectrum(const StationaryFamilyModel& family, std::vector<TauPair> taus,
                                       const FrequencyGrid& grid, std::int64_t H) {
  if (H < 1) throw std::invalid_argument("copula_tv_spectrum: H must be >= 1");
  SpectrumGrid out;
  out.provenance = Provenance::copula_tv;
  out.u_or_t0 = family.u;
  out.H = H;
  out.grid = grid;
  out.taus = std::move(taus);
  out.tail_bound = copula_tail_bound(1.0, std::abs(family.coefficient), H);
  const double scale = 1.0 / (2.0 * std::numbers::pi);
  out.values.reserve(out.taus.size() * grid.size());
  for (const auto& p : out.taus) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(2 * H + 1));
    for (std::int64_t h = -H; h <= H; ++h) g.push_back(gamma_stationary(family, h, p.first, p.second));
    for (double w : grid.omegas) out.values.push_back(detail::lag_fourier(g, w, scale));
  }
  return out;
}

inline SpectrumGrid copula_tv_spectrum(const StationaryFamilyModel& family, std::vector<TauPair> taus,
                                       const FrequencyGrid& grid) {
  return copula_tv_spectrum(family, std::move(taus), grid, default_stationary_H(family));
}

/// (2 pi)^{-1} sum_{|s|<=H} gamma_{t0;T}(s,tau1,tau2) e^{-i omega s}.
inline SpectrumGrid wv_quantile_spectrum(const TriangularArrayModel& model, std::int64_t t0,
                                         std::vector<TauPair> taus, const FrequencyGrid& grid, std::int64_t H) {
  if (H < 0) throw std::invalid_argument("wv_quantile_spectrum: H must be >= 0");
  SpectrumGrid out;
  out.provenance = Provenance::wv_quantile;
  out.u_or_t0 = static_cast<double>(t0);
  out.T = model.T();
  out.H = H;
  out.grid = grid;
  const double sup = model.curve().sup_abs();
  out.tail_bound = copula_tail_bound(1.0 / std::sqrt(1.0 - sup * sup), sup, H);
  const auto table = array_table(model, t0, H, std::move(taus));
  out.taus = table.taus;
  const double scale = 1.0 / (2.0 * std::numbers::pi);
  out.values.reserve(out.taus.size() * grid.size());
  for (std::size_t p = 0; p < out.taus.size(); ++p) {
    const auto g = table.lag_series(p);
    for (double w : grid.omegas) out.values.push_back(detail::lag_fourier(g, w, scale));
  }
  return out;
}

/// AR(1) closed form sigma^2 / (2 pi |1 - a(u) e^{-i omega}|^2).
inline SpectrumGrid classical_tv_spectrum(const StationaryFamilyModel& family, const FrequencyGrid& grid) {
  SpectrumGrid out;
  out.provenance = Provenance::classical_tv;
  out.u_or_t0 = family.u;
  out.grid = grid;
  const double s2 = family.innovation_sd * family.innovation_sd;
  for (double w : grid.omegas) {
    const double d = std::norm(1.0 - family.coefficient * std::polar(1.0, -w));
    out.values.emplace_back(s2 / (2.0 * std::numbers::pi * d), 0.0);
  }
  return out;
}

/// Truncated covariance sum (2 pi)^{-1} sum_{|h|<=H} Cov(X_u(h), X_u(0)) e^{-i omega h}.
inline SpectrumGrid classical_tv_spectrum_sum(const StationaryFamilyModel& family, const FrequencyGrid& grid,
                                              std::int64_t H) {
  SpectrumGrid out;
  out.provenance = Provenance::classical_tv;
  out.u_or_t0 = family.u;
  out.H = H;
  out.grid = grid;
  const double a = std::abs(family.coefficient);
  const double v = family.marginal_variance();
  out.tail_bound = a > 0.0 ? 2.0 * v * std::pow(a, static_cast<double>(H + 1)) / ((1.0 - a) * 2.0 * std::numbers::pi) : 0.0;
  std::vector<double> c;
  for (std::int64_t h = -H; h <= H; ++h) c.push_back(v * family.corr(h));
  for (double w : grid.omegas) out.values.push_back(detail::lag_fourier(c, w, 1.0 / (2.0 * std::numbers::pi)));
  return out;
}

/**
 * sum_{|s|<=H} Cov(X_{floor(uT - s/2),T}, X_{floor(uT + s/2),T}) e^{-i omega s},
 * without a (2 pi)^{-1} factor.
 */
inline SpectrumGrid classical_wv_spectrum(const TriangularArrayModel& model, double u, const FrequencyGrid& grid,
                                          std::int64_t H) {
  SpectrumGrid out;
  out.provenance = Provenance::classical_wv;
  out.u_or_t0 = u;
  out.T = model.T();
  out.H = H;
  out.grid = grid;
  const double centre = u * static_cast<double>(model.T());
  std::vector<double> c;
  for (std::int64_t s = -H; s <= H; ++s) {
    const auto lo = static_cast<std::int64_t>(std::floor(centre - 0.5 * static_cast<double>(s)));
    const auto hi = static_cast<std::int64_t>(std::floor(centre + 0.5 * static_cast<double>(s)));
    c.push_back(model.cross_cov(lo, hi));
  }
  const double sup = model.curve().sup_abs();
  const double vmax = model.innovation_sd() * model.innovation_sd() / (1.0 - sup * sup);
  out.tail_bound = sup > 0.0 ? 2.0 * vmax * std::pow(sup, static_cast<double>(H + 1)) / (1.0 - sup) : 0.0;
  for (double w : grid.omegas) out.values.push_back(detail::lag_fourier(c, w, 1.0));
  return out;
}

/**
 * Discrete pseudo-Wigner distribution at sample t:
 * (2 pi)^{-1} sum_tau s*(t - tau) s(t + tau) e^{-2 i tau omega}
 * over every tau with both indices inside the signal.
 */
inline SpectrumGrid discrete_wigner(std::span<const cplx> signal, std::int64_t t, const FrequencyGrid& grid) {
  const auto n = static_cast<std::int64_t>(signal.size());
  SpectrumGrid out;
  out.provenance = Provenance::wigner_signal;
  out.u_or_t0 = static_cast<double>(t);
  out.grid = grid;
  out.values.assign(grid.size(), cplx{0.0, 0.0});
  if (t < 0 || t >= n) return out;
  const std::int64_t m = std::min(t, n - 1 - t);
  out.H = m;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double w = grid.omegas[j];
    cplx acc{0.0, 0.0};
    for (std::int64_t tau = -m; tau <= m; ++tau) {
      const auto lo = static_cast<std::size_t>(t - tau);
      const auto hi = static_cast<std::size_t>(t + tau);
      acc += std::conj(signal[lo]) * signal[hi] * std::polar(1.0, -2.0 * static_cast<double>(tau) * w);
    }
    out.values[j] = acc / (2.0 * std::numbers::pi);
  }
  return out;
}

namespace detail {

inline void require_compatible(const SpectrumGrid& a, const SpectrumGrid& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("spectrum grids differ in frequencies");
  if (!(a.taus == b.taus)) throw std::invalid_argument("spectrum grids differ in tau-pairs");
  if (a.values.size() != b.values.size()) throw std::invalid_argument("spectrum grids differ in size");
}

// Periodic trapezoid weights: half the distance to each neighbour on the circle.
inline std::vector<double> periodic_trapezoid_weights(const FrequencyGrid& grid) {
  const auto n = grid.size();
  std::vector<double> w(n, 0.0);
  if (n == 0) return w;
  if (n == 1) {
    w[0] = 2.0 * std::numbers::pi;
    return w;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double next = j + 1 < n ? grid.omegas[j + 1] : grid.omegas[0] + 2.0 * std::numbers::pi;
    const double gap = next - grid.omegas[j];
    w[j] += 0.5 * gap;
    w[(j + 1) % n] += 0.5 * gap;
  }
  return w;
}

}  // namespace detail

struct SupLocation {
  double distance = 0.0;
  std::size_t omega_index = 0;
  std::size_t pair = 0;
};

inline SupLocation sup_distance_at(const SpectrumGrid& a, const SpectrumGrid& b) {
  detail::require_compatible(a, b);
  SupLocation best;
  const auto n = a.grid.size();
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = std::abs(a.values[i] - b.values[i]);
    if (d > best.distance) best = {d, i % n, i / n};
  }
  return best;
}

/// max over the grid of |A - B|.
inline double sup_distance(const SpectrumGrid& a, const SpectrumGrid& b) { return sup_distance_at(a, b).distance; }

/// Integral over (-pi, pi] of |A - B|^2 by the periodic trapezoid rule, summed over columns.
inline double l2_distance(const SpectrumGrid& a, const SpectrumGrid& b) {
  detail::require_compatible(a, b);
  const auto w = detail::periodic_trapezoid_weights(a.grid);
  const auto n = a.grid.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) acc += w[i % n] * std::norm(a.values[i] - b.values[i]);
  return acc;
}

/// Integral over (-pi, pi] of one column by the periodic trapezoid rule.
inline cplx integrate(const SpectrumGrid& s, std::size_t pair = 0) {
  const auto w = detail::periodic_trapezoid_weights(s.grid);
  cplx acc{0.0, 0.0};
  for (std::size_t j = 0; j < s.grid.size(); ++j) acc += w[j] * s.at(j, pair);
  return acc;
}

inline double sup_abs_value(const SpectrumGrid& s, std::size_t pair) {
  double m = 0.0;
  for (std::size_t j = 0; j < s.grid.size(); ++j) m = std::max(m, std::abs(s.at(j, pair)));
  return m;
}

}  // namespace qspec
