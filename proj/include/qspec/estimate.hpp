#pragma once

/** @file
 * Lag-window (weighted covariance) estimator of the Wigner-Ville quantile
 * spectrum from clipped sample paths.
 *
 * For a centre t0 and lag s,
 * \f[ \hat R(t_0; s) = \sum_{|m| \le M} \phi(m, s)\,
 *       \tilde I_1(\lfloor t_0 + m + s/2 \rfloor)\,\tilde I_2(\lfloor t_0 + m - s/2 \rfloor), \f]
 * where the tilde marks indicators centred by their level, and the estimate
 * is \f$ (2\pi)^{-1} \sum_{|s| \le K} \hat R(t_0; s) e^{-i\omega s} \f$.
 */

#include "qspec/copula.hpp"
#include "qspec/models.hpp"
#include "qspec/normal.hpp"
#include "qspec/parallel.hpp"
#include "qspec/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qspec {

/// Product window: a normalised weight profile in m, rectangular in the lag s.
class LagWindow {
 public:
  enum class Shape { point, bartlett, parzen };

  static LagWindow point(std::int64_t Kmax) { return LagWindow(Shape::point, 0, Kmax); }
  static LagWindow bartlett(std::int64_t M, std::int64_t Kmax) { return LagWindow(Shape::bartlett, M, Kmax); }
  static LagWindow parzen(std::int64_t M, std::int64_t Kmax) { return LagWindow(Shape::parzen, M, Kmax); }

  /// Bartlett with M = ceil(T^{0.4}) and K = ceil(T^{1/3}).
  static LagWindow default_for(std::int64_t T) {
    return bartlett(static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(T), 0.4))), cube_root_H(T));
  }

  /// Weight of centre offset m at lag s; zero outside |m| <= M, |s| <= Kmax.
  double phi(std::int64_t m, std::int64_t s) const {
    if (std::abs(m) > M_ || std::abs(s) > Kmax_) return 0.0;
    return weights_[static_cast<std::size_t>(m + M_)];
  }

  Shape shape() const { return shape_; }
  std::int64_t m_support() const { return M_; }
  std::int64_t k_support() const { return Kmax_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  LagWindow(Shape shape, std::int64_t M, std::int64_t Kmax) : shape_(shape), M_(M), Kmax_(Kmax) {
    if (M < 0 || Kmax < 0) throw std::invalid_argument("LagWindow: supports must be non-negative");
    weights_.resize(static_cast<std::size_t>(2 * M + 1));
    for (std::int64_t m = -M; m <= M; ++m) {
      const double x = static_cast<double>(std::abs(m)) / static_cast<double>(M + 1);
      double w = 1.0;
      if (shape == Shape::bartlett) {
        w = 1.0 - x;
      } else if (shape == Shape::parzen) {
        w = x <= 0.5 ? 1.0 - 6.0 * x * x + 6.0 * x * x * x : 2.0 * std::pow(1.0 - x, 3);
      }
      weights_[static_cast<std::size_t>(m + M)] = w;
    }
    double total = 0.0;
    for (double w : weights_) total += w;
    for (double& w : weights_) w /= total;
  }

  Shape shape_;
  std::int64_t M_;
  std::int64_t Kmax_;
  std::vector<double> weights_;
};

inline const char* to_string(LagWindow::Shape s) {
  switch (s) {
    case LagWindow::Shape::point: return "point";
    case LagWindow::Shape::bartlett: return "bartlett";
    case LagWindow::Shape::parzen: return "parzen";
  }
  return "?";
}

/// Indicator sequence 1{X_t <= threshold_t} and the level used to centre it.
struct ClippedPath {
  std::vector<std::uint8_t> bits;
  std::int64_t first_index = 1;
  double tau = 0.5;
  double centre = 0.5;  // tau in oracle mode, the fraction of ones in rank mode
  ThresholdMode mode = ThresholdMode::oracle;

  std::int64_t last_index() const { return first_index + static_cast<std::int64_t>(bits.size()) - 1; }
  double centred(std::int64_t t) const { return bits[static_cast<std::size_t>(t - first_index)] - centre; }
};

namespace detail {

inline ClippedPath clip_with_sds(const SamplePath& path, QuantileLevel tau, const std::vector<double>& sds) {
  ClippedPath out{{}, path.first_index, tau, tau, ThresholdMode::oracle};
  out.bits.resize(path.values.size());
  const double z = normal_quantile(tau);
  for (std::size_t i = 0; i < path.values.size(); ++i) out.bits[i] = path.values[i] <= sds[i] * z ? 1 : 0;
  return out;
}

inline ClippedPath clip_by_rank(const SamplePath& path, QuantileLevel tau) {
  const auto n = path.values.size();
  if (n == 0) throw std::invalid_argument("clip_path: empty path");
  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(tau * static_cast<double>(n))), 1, n);
  std::vector<double> sorted = path.values;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  const double threshold = sorted[k - 1];
  ClippedPath out{{}, path.first_index, tau, 0.0, ThresholdMode::rank};
  out.bits.resize(n);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.bits[i] = path.values[i] <= threshold ? 1 : 0;
    ones += out.bits[i];
  }
  if (ones != k) throw std::invalid_argument("clip_path: tied values at the rank threshold (degenerate ranks)");
  out.centre = static_cast<double>(ones) / static_cast<double>(n);
  return out;
}

}  // namespace detail

/**
 * Clip a path at level tau.  Oracle mode thresholds at the exact marginal
 * quantile of the model; rank mode at the ceil(tau n)-th order statistic of
 * the path and rejects ties there.
 */
inline ClippedPath clip_path(const SamplePath& path, QuantileLevel tau, ThresholdMode mode,
                             const TriangularArrayModel* model = nullptr) {
  if (mode == ThresholdMode::rank) return detail::clip_by_rank(path, tau);
  if (model == nullptr) throw std::invalid_argument("clip_path: oracle mode needs the model's marginal law");
  auto vars = model->variances(path.first_index, path.last_index());
  for (double& v : vars) v = std::sqrt(v);
  return detail::clip_with_sds(path, tau, vars);
}

struct EstimatedSpectrum {
  SpectrumGrid spectrum;  // ensemble mean
  std::vector<double> se_re;
  std::vector<double> se_im;
  std::int64_t replicates = 1;

  double se(std::size_t i) const { return std::hypot(se_re.at(i), se_im.at(i)); }
};

/// Weighted covariance estimate from one pair of clipped sequences.
inline EstimatedSpectrum wv_lag_window_estimate(const ClippedPath& c1, const ClippedPath& c2, std::int64_t t0,
                                                const LagWindow& window, const FrequencyGrid& grid) {
  const std::int64_t M = window.m_support();
  const std::int64_t K = window.k_support();
  const std::int64_t need_lo = t0 - M + floor_div2(-K);
  const std::int64_t need_hi = t0 + M + floor_div2(K);
  const std::int64_t have_lo = std::max(c1.first_index, c2.first_index);
  const std::int64_t have_hi = std::min(c1.last_index(), c2.last_index());
  if (need_lo < have_lo || need_hi > have_hi)
    throw std::out_of_range("wv_lag_window_estimate: t0 too close to the path boundary for this window");

  std::vector<double> R;
  R.reserve(static_cast<std::size_t>(2 * K + 1));
  for (std::int64_t s = -K; s <= K; ++s) {
    double acc = 0.0;
    for (std::int64_t m = -M; m <= M; ++m) {
      const double w = window.phi(m, s);
      acc += w * c1.centred(t0 + m + floor_div2(s)) * c2.centred(t0 + m + floor_div2(-s));
    }
    R.push_back(acc);
  }

  EstimatedSpectrum out;
  auto& sp = out.spectrum;
  sp.provenance = Provenance::estimator;
  sp.u_or_t0 = static_cast<double>(t0);
  sp.T = have_hi;
  sp.H = K;
  sp.grid = grid;
  sp.taus = {TauPair{c1.tau, c2.tau}};
  const double scale = 1.0 / (2.0 * std::numbers::pi);
  for (double w : grid.omegas) sp.values.push_back(detail::lag_fourier(R, w, scale));
  out.se_re.assign(grid.size(), 0.0);
  out.se_im.assign(grid.size(), 0.0);
  return out;
}

/**
 * Mean and cross-replicate standard error of the estimator over n_rep
 * independent paths; path i uses derive_seed(seed, i).
 */
inline EstimatedSpectrum ensemble_estimate(const TriangularArrayModel& model, std::int64_t t0,
                                           std::vector<TauPair> taus, const LagWindow& window,
                                           const FrequencyGrid& grid, std::int64_t n_rep, std::uint64_t seed,
                                           ThresholdMode mode = ThresholdMode::oracle) {
  if (n_rep < 30) throw std::invalid_argument("ensemble_estimate: at least 30 replicates are required");
  if (taus.empty()) throw std::invalid_argument("ensemble_estimate: no tau-pairs");
  const std::size_t cells = taus.size() * grid.size();
  std::vector<double> sds;
  if (mode == ThresholdMode::oracle) {
    sds = model.variances(1, model.T());
    for (double& v : sds) v = std::sqrt(v);
  }

  std::vector<std::vector<cplx>> reps(static_cast<std::size_t>(n_rep));
  parallel_for(reps.size(), [&](std::size_t i) {
    const auto path = simulate_path(model, derive_seed(seed, i));
    auto clip = [&](QuantileLevel tau) {
      return mode == ThresholdMode::oracle ? detail::clip_with_sds(path, tau, sds) : detail::clip_by_rank(path, tau);
    };
    auto& out = reps[i];
    out.reserve(cells);
    for (const auto& p : taus) {
      const auto c1 = clip(p.first);
      const auto c2 = p.second == p.first ? c1 : clip(p.second);
      const auto est = wv_lag_window_estimate(c1, c2, t0, window, grid);
      out.insert(out.end(), est.spectrum.values.begin(), est.spectrum.values.end());
    }
  });

  EstimatedSpectrum result;
  auto& sp = result.spectrum;
  sp.provenance = Provenance::estimator;
  sp.u_or_t0 = static_cast<double>(t0);
  sp.T = model.T();
  sp.H = window.k_support();
  sp.grid = grid;
  sp.taus = std::move(taus);
  sp.values.assign(cells, cplx{0.0, 0.0});
  result.se_re.assign(cells, 0.0);
  result.se_im.assign(cells, 0.0);
  result.replicates = n_rep;
  const double n = static_cast<double>(n_rep);
  for (const auto& r : reps)
    for (std::size_t c = 0; c < cells; ++c) sp.values[c] += r[c];
  for (auto& v : sp.values) v /= n;
  for (const auto& r : reps) {
    for (std::size_t c = 0; c < cells; ++c) {
      const cplx d = r[c] - sp.values[c];
      result.se_re[c] += d.real() * d.real();
      result.se_im[c] += d.imag() * d.imag();
    }
  }
  for (std::size_t c = 0; c < cells; ++c) {
    result.se_re[c] = std::sqrt(result.se_re[c] / (n - 1.0) / n);
    result.se_im[c] = std::sqrt(result.se_im[c] / (n - 1.0) / n);
  }
  return result;
}

}  // namespace qspec
