#pragma once

/** @file
 * Numerical certificates for local strict stationarity of the Gaussian tvAR
 * testbed and for the convergence of the Wigner-Ville quantile spectrum to
 * the time-varying copula spectral density.
 */

#include "qspec/copula.hpp"
#include "qspec/models.hpp"
#include "qspec/normal.hpp"
#include "qspec/parallel.hpp"
#include "qspec/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace qspec {

/// Below this level a kernel or distance is indistinguishable from rounding noise.
inline constexpr double numerical_floor = 1e-12;

/// Slack on the lag-level bound 3 L (|h| + 2) / T, covering the grid estimate of L.
inline constexpr double lag_bound_slack = 1.05;

struct LssConfig {
  std::vector<double> us{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::int64_t window = 0;  // half-width of the (r, s) window around floor(uT); 0 means ceil(T^{1/3})
  std::vector<double> lattice_probs = default_lattice();
  bool include_marginals = true;  // add x = +inf / y = +inf, i.e. the marginal CDFs

  static std::vector<double> default_lattice() {
    std::vector<double> p;
    for (int i = 1; i <= 19; ++i) p.push_back(0.05 * i);
    return p;
  }
};

struct LssWorstCase {
  double u = 0.0;
  std::int64_t r = 0, s = 0;
  double x = 0.0, y = 0.0;
  double distance = 0.0;  // |F_{r,s;T}(x,y) - G^u_{r-s}(x,y)|
};

struct LssCertificate {
  double L_hat = 0.0;
  LssWorstCase worst;
  std::int64_t T = 0;
  std::int64_t window = 0;
  std::size_t evaluations = 0;
  LssConfig config;
};

/**
 * Grid estimate of the local-stationarity constant:
 * max ||F_{r,s;T} - G^u_{r-s}||_inf / (max(|r/T - u|, |s/T - u|) + 1/T)
 * over u, (r, s) within the window around floor(uT), and (x, y) on a lattice
 * of G^u quantiles.
 */
inline LssCertificate certify_lss(const TriangularArrayModel& model, const LssConfig& config = {}) {
  const std::int64_t T = model.T();
  const std::int64_t w = config.window > 0 ? config.window : cube_root_H(T);
  std::vector<double> zs;
  for (double p : config.lattice_probs) zs.push_back(normal_quantile(p));
  if (config.include_marginals) zs.push_back(INFINITY);

  std::vector<LssWorstCase> per_u(config.us.size());
  std::vector<double> ratio_u(config.us.size(), 0.0);
  std::vector<std::size_t> count_u(config.us.size(), 0);

  parallel_for(config.us.size(), [&](std::size_t ui) {
    const double u = config.us[ui];
    const auto family = model.family(u);
    const double sd_u = family.marginal_sd();
    const auto centre = static_cast<std::int64_t>(std::floor(u * static_cast<double>(T)));
    const std::int64_t lo = std::max<std::int64_t>(1, centre - w);
    const std::int64_t hi = std::min<std::int64_t>(T, centre + w);
    const auto vars = model.variances(lo, hi);
    std::vector<double> xs;
    for (double z : zs) xs.push_back(std::isinf(z) ? z : sd_u * z);

    LssWorstCase worst;
    double best_ratio = 0.0;
    std::size_t count = 0;
    for (std::int64_t r = lo; r <= hi; ++r) {
      for (std::int64_t s = lo; s <= hi; ++s) {
        const double sd_r = std::sqrt(vars[static_cast<std::size_t>(r - lo)]);
        const double sd_s = std::sqrt(vars[static_cast<std::size_t>(s - lo)]);
        const double rho_rs = model.correlation(r, s);
        const double rho_u = family.corr(r - s);
        const double denom = std::max(std::abs(static_cast<double>(r) / static_cast<double>(T) - u),
                                      std::abs(static_cast<double>(s) / static_cast<double>(T) - u)) +
                             1.0 / static_cast<double>(T);
        for (double x : xs) {
          for (double y : xs) {
            if (std::isinf(x) && std::isinf(y)) continue;  // both CDFs equal 1
            const double f = gaussian_pair_cdf(x, y, sd_r, sd_s, rho_rs);
            const double g = gaussian_pair_cdf(x, y, sd_u, sd_u, rho_u);
            const double d = std::abs(f - g);
            ++count;
            if (d / denom > best_ratio) {
              best_ratio = d / denom;
              worst = {u, r, s, x, y, d};
            }
          }
        }
      }
    }
    per_u[ui] = worst;
    ratio_u[ui] = best_ratio;
    count_u[ui] = count;
  });

  LssCertificate cert;
  cert.T = T;
  cert.window = w;
  cert.config = config;
  for (std::size_t i = 0; i < per_u.size(); ++i) {
    cert.evaluations += count_u[i];
    if (ratio_u[i] > cert.L_hat) {
      cert.L_hat = ratio_u[i];
      cert.worst = per_u[i];
    }
  }
  return cert;
}

struct LagBoundRow {
  std::int64_t T = 0;
  std::int64_t h = 0;
  double tau1 = 0.0, tau2 = 0.0;
  double lhs = 0.0;  // |gamma^u_h - gamma_{t0;T}(h)|
  double rhs = 0.0;  // slack * 3 L_hat (|h| + 2) / T
  bool ok = false;
};

/**
 * Ledger of the lag-level bound at t0 = floor(uT) for |h| <= H and every
 * ordered pair of the level grid.  A row is ok when lhs <= rhs, or when lhs
 * is below the numerical floor.
 */
inline std::vector<LagBoundRow> check_lag_bound(const TriangularArrayModel& model, double u, std::int64_t H,
                                                std::span<const double> tau_levels, double L_hat) {
  const std::int64_t T = model.T();
  const auto family = model.family(u);
  const auto t0 = static_cast<std::int64_t>(std::floor(u * static_cast<double>(T)));
  const auto pairs = tau_grid_pairs(tau_levels);
  std::vector<LagBoundRow> rows;
  rows.reserve(static_cast<std::size_t>(2 * H + 1) * pairs.size());
  for (std::int64_t h = -H; h <= H; ++h) {
    const double rhs = lag_bound_slack * 3.0 * L_hat * static_cast<double>(std::abs(h) + 2) / static_cast<double>(T);
    for (const auto& p : pairs) {
      const double lhs =
          std::abs(gamma_stationary(family, h, p.first, p.second) - gamma_array(model, t0, h, p.first, p.second));
      rows.push_back({T, h, p.first, p.second, lhs, rhs, lhs <= rhs || lhs <= numerical_floor});
    }
  }
  return rows;
}

/// True when each value is below its predecessor or already at the numerical floor.
inline bool strictly_decreasing_to_floor(std::span<const double> xs) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] < xs[i - 1] || xs[i] <= numerical_floor)) return false;
  return true;
}

struct Prop1Row {
  std::int64_t T = 0;
  std::int64_t H = 0;
  std::size_t pair = 0;
  double distance = 0.0;   // sup over omega of |f^u - W_{t0,T}|
  double omega_at = 0.0;   // where the sup is attained
  double reference = 0.0;  // sup over omega of |f^u|
};

struct Prop1Result {
  std::vector<TauPair> taus;
  std::vector<Prop1Row> rows;           // T-major, pair-minor
  std::vector<bool> decreasing;         // per pair
  std::vector<double> final_ratio;      // per pair: distance at the largest T / reference
  std::vector<double> max_step_ratio;   // per pair: max d_{k+1} / d_k
  double reference_tail_bound = 0.0;
};

/**
 * sup-norm distance between the copula spectral density of the family at u
 * and the Wigner-Ville quantile spectrum at t0 = floor(uT), truncated at
 * H = ceil(T^{1/3}), for each T.
 */
inline Prop1Result prop1_sweep(const TriangularArrayModel& model, std::span<const std::int64_t> Ts, double u,
                               std::vector<TauPair> taus, const FrequencyGrid& grid) {
  for (std::size_t i = 0; i < Ts.size(); ++i) {
    if (Ts[i] < 64) throw std::invalid_argument("prop1_sweep: every T must be >= 64");
    if (i && Ts[i] <= Ts[i - 1]) throw std::invalid_argument("prop1_sweep: Ts must be strictly increasing");
  }
  Prop1Result result;
  result.taus = taus;
  const auto family = model.family(u);
  const auto reference = copula_tv_spectrum(family, taus, grid);
  result.reference_tail_bound = reference.tail_bound;

  std::vector<std::vector<Prop1Row>> per_T(Ts.size());
  parallel_for(Ts.size(), [&](std::size_t k) {
    const auto arr = model.with_length(Ts[k]);
    const auto t0 = static_cast<std::int64_t>(std::floor(u * static_cast<double>(Ts[k])));
    const auto H = cube_root_H(Ts[k]);
    const auto wv = wv_quantile_spectrum(arr, t0, taus, grid, H);
    for (std::size_t p = 0; p < taus.size(); ++p) {
      Prop1Row row{Ts[k], H, p, 0.0, 0.0, sup_abs_value(reference, p)};
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const double d = std::abs(reference.at(j, p) - wv.at(j, p));
        if (d > row.distance) {
          row.distance = d;
          row.omega_at = grid.omegas[j];
        }
      }
      per_T[k].push_back(row);
    }
  });
  for (auto& rows : per_T) result.rows.insert(result.rows.end(), rows.begin(), rows.end());

  for (std::size_t p = 0; p < taus.size(); ++p) {
    std::vector<double> d;
    for (std::size_t k = 0; k < Ts.size(); ++k) d.push_back(result.rows[k * taus.size() + p].distance);
    result.decreasing.push_back(strictly_decreasing_to_floor(d));
    double step = 0.0;
    for (std::size_t k = 1; k < d.size(); ++k) step = std::max(step, d[k - 1] > 0.0 ? d[k] / d[k - 1] : 0.0);
    result.max_step_ratio.push_back(step);
    const auto& last = result.rows[(Ts.size() - 1) * taus.size() + p];
    result.final_ratio.push_back(last.reference > 0.0 ? last.distance / last.reference : last.distance);
  }
  return result;
}

struct PartialSumRow {
  CopulaCovTable::Kind kind = CopulaCovTable::Kind::stationary;
  std::int64_t H = 0;
  double tau1 = 0.0, tau2 = 0.0;
  double partial_sum = 0.0;
};

struct SummabilityResult {
  std::vector<PartialSumRow> rows;
  double K_hat = 0.0;
  double budget = 0.0;              // 1/4 + 2 sup_abs / (1 - sup_abs)
  bool within_budget = true;
  double max_increment_ratio = 0.0;  // max over kinds, pairs and lags of inc(h+1) / inc(h)
  double sup_abs = 0.0;
  bool increments_geometric = true;  // max_increment_ratio <= sup_abs
};

/**
 * Partial sums of |gamma| over |h| <= H for the stationary kernel at u and
 * the array kernel at floor(uT), with the geometric-decay certificate of
 * the Gaussian testbed.
 */
inline SummabilityResult summability_check(const TriangularArrayModel& model, double u,
                                           std::span<const std::int64_t> H_list, std::span<const double> tau_levels) {
  SummabilityResult result;
  result.sup_abs = model.curve().sup_abs();
  result.budget = geometric_budget(result.sup_abs);
  if (H_list.empty()) return result;
  const std::int64_t H_max = *std::max_element(H_list.begin(), H_list.end());
  const auto t0 = static_cast<std::int64_t>(std::floor(u * static_cast<double>(model.T())));
  const auto pairs = tau_grid_pairs(tau_levels);
  const CopulaCovTable tables[] = {stationary_table(model.family(u), H_max, pairs),
                                   array_table(model, t0, H_max, pairs)};
  for (const auto& table : tables) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      std::vector<double> cumulative(static_cast<std::size_t>(H_max + 1));
      std::vector<double> increment(static_cast<std::size_t>(H_max + 1));
      increment[0] = std::abs(table.at(0, p));
      cumulative[0] = increment[0];
      for (std::int64_t h = 1; h <= H_max; ++h) {
        increment[static_cast<std::size_t>(h)] = std::abs(table.at(h, p)) + std::abs(table.at(-h, p));
        cumulative[static_cast<std::size_t>(h)] = cumulative[static_cast<std::size_t>(h - 1)] + increment[static_cast<std::size_t>(h)];
      }
      for (std::int64_t h : H_list) {
        const double sum = cumulative[static_cast<std::size_t>(h)];
        result.rows.push_back({table.kind, h, pairs[p].first, pairs[p].second, sum});
        result.K_hat = std::max(result.K_hat, sum);
      }
      for (std::int64_t h = 1; h < H_max; ++h) {
        const double prev = increment[static_cast<std::size_t>(h)];
        const double next = increment[static_cast<std::size_t>(h + 1)];
        if (next <= numerical_floor * 1e-2 || prev <= 0.0) continue;
        result.max_increment_ratio = std::max(result.max_increment_ratio, next / prev);
      }
    }
  }
  result.within_budget = result.K_hat <= result.budget;
  result.increments_geometric = result.max_increment_ratio <= result.sup_abs;
  return result;
}

struct L2Row {
  std::int64_t T = 0;
  std::int64_t H = 0;
  double distance = 0.0;  // integral |f_T - 2 pi f|^2 d omega / (2 pi)^2
};

struct L2Result {
  std::vector<L2Row> rows;
  bool decreasing = false;
  double max_step_ratio = 0.0;
};

/// Classical counterpart of prop1_sweep: L2 distance between f_T(u, .) and 2 pi f(u, .).
inline L2Result l2_sweep(const TriangularArrayModel& model, std::span<const std::int64_t> Ts, double u,
                         const FrequencyGrid& grid) {
  L2Result result;
  const auto target = classical_tv_spectrum(model.family(u), grid).scaled(2.0 * std::numbers::pi);
  result.rows.resize(Ts.size());
  parallel_for(Ts.size(), [&](std::size_t k) {
    const auto H = cube_root_H(Ts[k]);
    const auto fT = classical_wv_spectrum(model.with_length(Ts[k]), u, grid, H);
    result.rows[k] = {Ts[k], H, l2_distance(fT, target) / (4.0 * std::numbers::pi * std::numbers::pi)};
  });
  std::vector<double> d;
  for (const auto& r : result.rows) d.push_back(r.distance);
  result.decreasing = strictly_decreasing_to_floor(d);
  for (std::size_t k = 1; k < d.size(); ++k)
    result.max_step_ratio = std::max(result.max_step_ratio, d[k - 1] > 0.0 ? d[k] / d[k - 1] : 0.0);
  return result;
}

/// Everything a verification run measured.
struct ConvergenceReport {
  std::vector<std::int64_t> Ts;
  std::optional<Prop1Result> prop1;
  std::optional<L2Result> l2;
  std::optional<SummabilityResult> summability;
  std::vector<LssCertificate> certificates;
  std::vector<LagBoundRow> bound_ledger;
  double K_hat = 0.0;
  double L_hat = 0.0;
};

}  // namespace qspec
