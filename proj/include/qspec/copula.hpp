#pragma once

/** @file
 * Copula cross-covariance kernels of quantile indicators.
 *
 * Stationary kernel of the family at rescaled time u:
 * \f[ \gamma^u_h(\tau_1,\tau_2) = \mathrm{Cov}(1\{X_u(t) \le q^u(\tau_1)\}, 1\{X_u(t-h) \le q^u(\tau_2)\}). \f]
 * Array kernel centred at t0, with floor indices taken literally:
 * \f[ \gamma_{t_0;T}(s,\tau_1,\tau_2) = \mathrm{Cov}(1\{X_{\lfloor t_0+s/2\rfloor,T} \le F^{-1}(\tau_1)\},
 *                                          1\{X_{\lfloor t_0-s/2\rfloor,T} \le F^{-1}(\tau_2)\}). \f]
 * For Gaussian marginals both reduce to C_rho(tau1,tau2) - tau1 tau2 with
 * C_rho the Gaussian copula at the pair's correlation.
 */

#include "qspec/models.hpp"
#include "qspec/normal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qspec {

/// Quantile level restricted to [0.01, 0.99].
class QuantileLevel {
 public:
  static constexpr double min_level = 0.01;
  static constexpr double max_level = 0.99;

  explicit QuantileLevel(double tau) : tau_(tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("QuantileLevel: tau must lie strictly inside (0,1)");
    if (tau < min_level || tau > max_level)
      throw std::invalid_argument("QuantileLevel: extreme levels outside [0.01, 0.99] are not supported");
  }
  double value() const { return tau_; }
  operator double() const { return tau_; }

  friend bool operator==(QuantileLevel a, QuantileLevel b) { return a.tau_ == b.tau_; }

 private:
  double tau_;
};

struct TauPair {
  QuantileLevel first;
  QuantileLevel second;

  TauPair(double t1, double t2) : first(t1), second(t2) {}
  TauPair(QuantileLevel t1, QuantileLevel t2) : first(t1), second(t2) {}
  TauPair swapped() const { return {second, first}; }
  friend bool operator==(const TauPair& a, const TauPair& b) { return a.first == b.first && a.second == b.second; }
};

/// All ordered pairs of a level grid.
inline std::vector<TauPair> tau_grid_pairs(std::span<const double> levels) {
  std::vector<TauPair> out;
  out.reserve(levels.size() * levels.size());
  for (double a : levels)
    for (double b : levels) out.emplace_back(a, b);
  return out;
}

/// C_rho(tau1, tau2) - tau1 tau2 for the Gaussian copula, including rho = +-1.
inline double gaussian_copula_cov(double tau1, double tau2, double rho) {
  if (rho >= 1.0) return std::min(tau1, tau2) - tau1 * tau2;
  if (rho <= -1.0) return std::max(tau1 + tau2 - 1.0, 0.0) - tau1 * tau2;
  if (rho == 0.0) return 0.0;
  const double z1 = normal_quantile(tau1);
  const double z2 = normal_quantile(tau2);
  // Phi(Phi^{-1}(tau)) = tau, so the excess over the product is the kernel.
  return bvn_cdf_excess(z1, z2, rho);
}

inline double gamma_stationary(const StationaryFamilyModel& family, std::int64_t h, QuantileLevel tau1,
                               QuantileLevel tau2) {
  return gaussian_copula_cov(tau1, tau2, family.corr(h));
}

inline std::int64_t floor_div2(std::int64_t s) { return s >= 0 ? s / 2 : -((-s + 1) / 2); }

/// Time indices (floor(t0 + s/2), floor(t0 - s/2)) paired with tau1 and tau2.
inline std::pair<std::int64_t, std::int64_t> wv_indices(std::int64_t t0, std::int64_t s) {
  return {t0 + floor_div2(s), t0 + floor_div2(-s)};
}

inline double gamma_array(const TriangularArrayModel& model, std::int64_t t0, std::int64_t s, QuantileLevel tau1,
                          QuantileLevel tau2) {
  const auto [i1, i2] = wv_indices(t0, s);
  const double rho = i1 == i2 ? 1.0 : model.correlation(i1, i2);
  return gaussian_copula_cov(tau1, tau2, rho);
}

/// Gamma values for lags -H..H and a list of tau-pairs.
struct CopulaCovTable {
  enum class Kind { stationary, array };

  Kind kind = Kind::stationary;
  double u_or_t0 = 0.0;
  std::int64_t T = 0;  // 0 for the stationary kind
  std::int64_t H = 0;
  std::vector<TauPair> taus;
  std::vector<double> values;  // values[(lag + H) * taus.size() + pair]

  double at(std::int64_t lag, std::size_t pair) const {
    if (lag < -H || lag > H) throw std::out_of_range("CopulaCovTable: lag outside table");
    return values.at(static_cast<std::size_t>(lag + H) * taus.size() + pair);
  }

  /// Gamma at lags -H..H for one tau-pair.
  std::vector<double> lag_series(std::size_t pair) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(2 * H + 1));
    for (std::int64_t h = -H; h <= H; ++h) out.push_back(at(h, pair));
    return out;
  }
};

inline CopulaCovTable stationary_table(const StationaryFamilyModel& family, std::int64_t H,
                                       std::vector<TauPair> taus) {
  CopulaCovTable table{CopulaCovTable::Kind::stationary, family.u, 0, H, std::move(taus), {}};
  table.values.reserve(static_cast<std::size_t>(2 * H + 1) * table.taus.size());
  for (std::int64_t h = -H; h <= H; ++h)
    for (const auto& p : table.taus) table.values.push_back(gamma_stationary(family, h, p.first, p.second));
  return table;
}

inline CopulaCovTable array_table(const TriangularArrayModel& model, std::int64_t t0, std::int64_t H,
                                  std::vector<TauPair> taus) {
  CopulaCovTable table{CopulaCovTable::Kind::array, static_cast<double>(t0), model.T(), H, std::move(taus), {}};
  table.values.reserve(static_cast<std::size_t>(2 * H + 1) * table.taus.size());
  for (std::int64_t s = -H; s <= H; ++s) {
    const auto [i1, i2] = wv_indices(t0, s);
    const double rho = i1 == i2 ? 1.0 : model.correlation(i1, i2);
    for (const auto& p : table.taus) table.values.push_back(gaussian_copula_cov(p.first, p.second, rho));
  }
  return table;
}

struct SummabilityBudget {
  double K = 0.0;          // max over tau-pairs of sum_{|s|<=H} |gamma|
  std::int64_t H_used = 0;
  bool geometric_tail_ok = true;  // |gamma_h| <= sup_abs^|h| for every h != 0
};

/// Analytic budget 1/4 + 2 sum_{h>=1} c^h for geometric correlation decay at rate c.
inline double geometric_budget(double sup_abs) { return 0.25 + 2.0 * sup_abs / (1.0 - sup_abs); }

inline SummabilityBudget summability_scan(const CopulaCovTable& table, double sup_abs) {
  SummabilityBudget budget{0.0, table.H, true};
  for (std::size_t p = 0; p < table.taus.size(); ++p) {
    double sum = 0.0;
    for (std::int64_t h = -table.H; h <= table.H; ++h) {
      const double g = std::abs(table.at(h, p));
      sum += g;
      if (h != 0 && g > std::pow(sup_abs, static_cast<double>(std::abs(h))) + 1e-15) budget.geometric_tail_ok = false;
    }
    budget.K = std::max(budget.K, sum);
  }
  return budget;
}

enum class ThresholdMode { oracle, rank };

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  bool empirical = false;  // thresholds from ranks rather than the known marginal
};

namespace detail {

// Generalised inverse of the empirical CDF: the ceil(n tau)-th order statistic.
inline double empirical_quantile(std::vector<double> xs, double tau) {
  const auto n = xs.size();
  auto k = static_cast<std::size_t>(std::ceil(tau * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(k - 1), xs.end());
  return xs[k - 1];
}

}  // namespace detail

/**
 * Cross-replicate covariance of the two indicators entering gamma_array,
 * with its delta-method standard error.  Needs at least 1000 replicates.
 */
inline McEstimate gamma_mc(std::span<const SamplePath> paths, const TriangularArrayModel& model, std::int64_t t0,
                           std::int64_t s, QuantileLevel tau1, QuantileLevel tau2,
                           ThresholdMode mode = ThresholdMode::oracle) {
  if (paths.size() < 1000) throw std::invalid_argument("gamma_mc: at least 1000 replicate paths are required");
  const auto [i1, i2] = wv_indices(t0, s);
  const auto n = paths.size();
  std::vector<double> x1(n), x2(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = paths[i].at(i1);
    x2[i] = paths[i].at(i2);
  }
  double thr1, thr2;
  if (mode == ThresholdMode::oracle) {
    thr1 = std::sqrt(model.variance(i1)) * normal_quantile(tau1);
    thr2 = std::sqrt(model.variance(i2)) * normal_quantile(tau2);
  } else {
    thr1 = detail::empirical_quantile(x1, tau1);
    thr2 = detail::empirical_quantile(x2, tau2);
  }
  std::vector<double> b1(n), b2(n);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    b1[i] = x1[i] <= thr1 ? 1.0 : 0.0;
    b2[i] = x2[i] <= thr2 ? 1.0 : 0.0;
    m1 += b1[i];
    m2 += b2[i];
  }
  m1 /= static_cast<double>(n);
  m2 /= static_cast<double>(n);
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (b1[i] - m1) * (b2[i] - m2);
    sum += z;
    sumsq += z * z;
  }
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  const double var = std::max(0.0, (sumsq - nd * mean * mean) / (nd - 1.0));
  return {sum / (nd - 1.0), std::sqrt(var / nd), mode == ThresholdMode::rank};
}

inline const char* to_string(CopulaCovTable::Kind kind) {
  return kind == CopulaCovTable::Kind::stationary ? "stationary" : "array";
}

}  // namespace qspec
