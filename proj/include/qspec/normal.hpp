#pragma once

/** @file
 * Univariate and bivariate standard normal distribution functions.
 *
 * The bivariate CDF follows Genz's BVND: below |rho| = 0.925 a Gauss-Legendre
 * rule on the Drezner-Wesolowsky single integral
 * \f[
 *   \Phi_2(x,y;\rho) = \Phi(x)\Phi(y)
 *     + \frac{1}{2\pi}\int_0^{\arcsin\rho}
 *       \exp\Big(-\frac{x^2 + y^2 - 2xy\sin\theta}{2\cos^2\theta}\Big)\,d\theta,
 * \f]
 * and above it the asymptotic expansion about the comonotone limit.  Both
 * branches use a 20-node rule; absolute error is below 1e-14 on the
 * tested range.
 */

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qspec {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal quantile; p must lie in (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace detail {

using gauss20 = boost::math::quadrature::gauss<double, 20>;

// Drezner-Wesolowsky integral, i.e. Phi2(x,y;rho) - Phi(x)Phi(y).  Accurate
// for |rho| < 0.925 and free of cancellation when the result is tiny.
inline double bvn_excess_low(double x, double y, double rho) {
  const auto& nodes = gauss20::abscissa();
  const auto& weights = gauss20::weights();
  const double hs = 0.5 * (x * x + y * y);
  const double hk = x * y;
  const double asr = std::asin(rho);
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (double node : {nodes[i], -nodes[i]}) {
      if (nodes[i] == 0.0 && node != 0.0) continue;  // a zero node is counted once
      const double sn = std::sin(0.5 * asr * (node + 1.0));
      sum += weights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
  }
  return sum * asr / (4.0 * std::numbers::pi);
}

// Genz's upper-orthant probability P(X > h, Y > k) for |rho| >= 0.925.
inline double bvn_upper_high(double h, double k, double rho) {
  const auto& nodes = gauss20::abscissa();
  const auto& weights = gauss20::weights();
  const double two_pi = 2.0 * std::numbers::pi;
  double hk = h * k;
  if (rho < 0.0) {
    k = -k;
    hk = -hk;
  }
  double bvn = 0.0;
  if (std::abs(rho) < 1.0) {
    const double as = (1.0 - rho) * (1.0 + rho);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    // gauss<N> stores the non-negative half of the rule on [0,1).
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (double node : {nodes[i], -nodes[i]}) {
        if (nodes[i] == 0.0 && node != 0.0) continue;
        double xs = a * (node + 1.0);
        xs *= xs;
        const double rs = std::sqrt(1.0 - xs);
        bvn += a * weights[i] * std::exp(-(bs / xs + hk) / 2.0) *
               (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
      }
    }
    bvn = -bvn / two_pi;
  }
  if (rho > 0.0) return bvn + normal_cdf(-std::max(h, k));
  return -bvn + std::max(0.0, normal_cdf(-h) - normal_cdf(-k));
}

}  // namespace detail

/**
 * P(Z1 <= x, Z2 <= y) for a standard bivariate normal pair with correlation
 * rho.  Infinite arguments are handled as marginal limits.  |rho| >= 1 is a
 * degenerate law and is rejected.
 */
inline double bvn_cdf(double x, double y, double rho) {
  if (!(std::abs(rho) < 1.0)) throw std::domain_error("bvn_cdf: degenerate correlation |rho| >= 1");
  if (std::isnan(x) || std::isnan(y)) return std::numeric_limits<double>::quiet_NaN();
  if (x == -INFINITY || y == -INFINITY) return 0.0;
  if (x == INFINITY) return normal_cdf(y);
  if (y == INFINITY) return normal_cdf(x);
  if (std::abs(rho) < 0.925) return normal_cdf(x) * normal_cdf(y) + detail::bvn_excess_low(x, y, rho);
  return std::clamp(detail::bvn_upper_high(-x, -y, rho), 0.0, 1.0);
}

/// Phi2(x,y;rho) - Phi(x)Phi(y), computed without cancellation for |rho| < 0.925.
inline double bvn_cdf_excess(double x, double y, double rho) {
  if (!(std::abs(rho) < 1.0)) throw std::domain_error("bvn_cdf_excess: degenerate correlation |rho| >= 1");
  if (std::isinf(x) || std::isinf(y)) return 0.0;
  if (std::abs(rho) < 0.925) return detail::bvn_excess_low(x, y, rho);
  return bvn_cdf(x, y, rho) - normal_cdf(x) * normal_cdf(y);
}

/**
 * Joint CDF of a centred Gaussian pair with standard deviations sd1, sd2 and
 * correlation rho, including the degenerate limits rho = +-1.
 */
inline double gaussian_pair_cdf(double x, double y, double sd1, double sd2, double rho) {
  const double zx = x / sd1;
  const double zy = y / sd2;
  if (rho >= 1.0) return normal_cdf(std::min(zx, zy));
  if (rho <= -1.0) return std::max(0.0, normal_cdf(zx) - normal_cdf(-zy));
  return bvn_cdf(zx, zy, rho);
}

}  // namespace qspec
