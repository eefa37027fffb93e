#pragma once

/** @file
 * Gaussian time-varying AR(1) triangular arrays and their approximating
 * stationary families.
 *
 * The array is
 * \f[ X_{t,T} = a(t/T) X_{t-1,T} + \sigma \varepsilon_t, \qquad t \in \mathbb{Z}, \f]
 * with a(.) clamped to a(0) below u = 0 and to a(1) above u = 1, so the
 * process is defined on all of Z.  The family member at rescaled time u is
 * the stationary AR(1) with coefficient a(u) and the same innovation scale.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qspec {

/// Piecewise-linear AR coefficient curve u -> a(u) on [0,1].
class CoefficientCurve {
 public:
  enum class Kind { constant, linear, knots };

  static CoefficientCurve constant(double a) { return CoefficientCurve(Kind::constant, {{0.0, a}, {1.0, a}}); }

  static CoefficientCurve linear(double intercept, double slope) {
    return CoefficientCurve(Kind::linear, {{0.0, intercept}, {1.0, intercept + slope}});
  }

  /// Linear interpolation between (u, a) knots; flat beyond the first and last knot.
  static CoefficientCurve knots(std::vector<std::pair<double, double>> points) {
    if (points.empty()) throw std::invalid_argument("CoefficientCurve: knot table is empty");
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (!(points[i].first > points[i - 1].first))
        throw std::invalid_argument("CoefficientCurve: knot positions must be strictly increasing");
    }
    return CoefficientCurve(Kind::knots, std::move(points));
  }

  double operator()(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    if (u <= knots_.front().first) return knots_.front().second;
    if (u >= knots_.back().first) return knots_.back().second;
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), u,
                               [](double v, const auto& k) { return v < k.first; });
    auto lo = hi - 1;
    const double w = (u - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
  }

  Kind kind() const { return kind_; }
  const std::vector<std::pair<double, double>>& knot_table() const { return knots_; }
  double lipschitz_const() const { return lipschitz_; }
  double sup_abs() const { return sup_abs_; }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
      case Kind::constant: os << "constant(" << knots_.front().second << ")"; break;
      case Kind::linear:
        os << "linear(" << knots_.front().second << "," << knots_.back().second - knots_.front().second << ")";
        break;
      case Kind::knots:
        os << "knots(";
        for (std::size_t i = 0; i < knots_.size(); ++i)
          os << (i ? ";" : "") << knots_[i].first << ":" << knots_[i].second;
        os << ")";
        break;
    }
    return os.str();
  }

 private:
  CoefficientCurve(Kind kind, std::vector<std::pair<double, double>> knots) : kind_(kind), knots_(std::move(knots)) {
    // Piecewise linear: the extremes of |a| and of the slope sit on the knots.
    for (const auto& [u, a] : knots_) {
      if (!std::isfinite(u) || !std::isfinite(a)) throw std::invalid_argument("CoefficientCurve: non-finite knot");
      sup_abs_ = std::max(sup_abs_, std::abs(a));
    }
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      const double slope = (knots_[i].second - knots_[i - 1].second) / (knots_[i].first - knots_[i - 1].first);
      lipschitz_ = std::max(lipschitz_, std::abs(slope));
    }
    if (!(sup_abs_ < 1.0)) throw std::invalid_argument("CoefficientCurve: unstable, sup |a(u)| must be < 1");
  }

  Kind kind_;
  std::vector<std::pair<double, double>> knots_;
  double lipschitz_ = 0.0;
  double sup_abs_ = 0.0;
};

/// Stationary Gaussian AR(1) approximating the array at rescaled time u.
struct StationaryFamilyModel {
  double u = 0.5;
  double coefficient = 0.0;
  double innovation_sd = 1.0;

  StationaryFamilyModel() = default;
  StationaryFamilyModel(double u_, double a, double sd) : u(u_), coefficient(a), innovation_sd(sd) {
    if (!(std::abs(a) < 1.0)) throw std::invalid_argument("StationaryFamilyModel: |a| must be < 1");
    if (!(sd > 0.0)) throw std::invalid_argument("StationaryFamilyModel: innovation_sd must be positive");
  }

  /// rho_u(h) = a(u)^|h|.
  double corr(std::int64_t h) const {
    const auto lag = h < 0 ? -h : h;
    if (lag == 0) return 1.0;
    return std::pow(coefficient, static_cast<double>(lag));
  }

  double marginal_variance() const { return innovation_sd * innovation_sd / (1.0 - coefficient * coefficient); }
  double marginal_sd() const { return std::sqrt(marginal_variance()); }
};

inline double family_corr(const StationaryFamilyModel& family, std::int64_t h) { return family.corr(h); }

/// Gaussian tvAR(1) triangular array X_{t,T}, t in Z, for a fixed T.
class TriangularArrayModel {
 public:
  TriangularArrayModel(CoefficientCurve curve, double innovation_sd, std::int64_t T)
      : curve_(std::move(curve)), innovation_sd_(innovation_sd), T_(T) {
    if (!(innovation_sd > 0.0)) throw std::invalid_argument("TriangularArrayModel: innovation_sd must be positive");
    if (T < 1) throw std::invalid_argument("TriangularArrayModel: T must be positive");
    const double s = curve_.sup_abs();
    burn_in_ = s > 0.0 ? static_cast<std::int64_t>(std::ceil(std::log(1e-14) / std::log(s))) : 1;
    burn_in_ = std::max<std::int64_t>(burn_in_, 1);
  }

  /// Same curve and innovation scale at a different array length.
  TriangularArrayModel with_length(std::int64_t T) const { return {curve_, innovation_sd_, T}; }

  const CoefficientCurve& curve() const { return curve_; }
  double innovation_sd() const { return innovation_sd_; }
  std::int64_t T() const { return T_; }
  std::int64_t burn_in() const { return burn_in_; }

  double coefficient(std::int64_t t) const { return curve_(static_cast<double>(t) / static_cast<double>(T_)); }

  /**
   * Var(X_{t,T}) by the recursion v_t = sigma^2 + a(t/T)^2 v_{t-1}, started
   * burn_in() steps back at the stationary variance of the coefficient there.
   */
  double variance(std::int64_t t) const {
    const double s2 = innovation_sd_ * innovation_sd_;
    const std::int64_t start = t - burn_in_;
    const double a0 = coefficient(start);
    double v = s2 / (1.0 - a0 * a0);
    for (std::int64_t i = start + 1; i <= t; ++i) {
      const double a = coefficient(i);
      v = s2 + a * a * v;
    }
    return v;
  }

  /// Variances for t = first..last, sharing one recursion.
  std::vector<double> variances(std::int64_t first, std::int64_t last) const {
    std::vector<double> out;
    if (last < first) return out;
    out.reserve(static_cast<std::size_t>(last - first + 1));
    const double s2 = innovation_sd_ * innovation_sd_;
    double v = variance(first);
    out.push_back(v);
    for (std::int64_t t = first + 1; t <= last; ++t) {
      const double a = coefficient(t);
      v = s2 + a * a * v;
      out.push_back(v);
    }
    return out;
  }

  /// Cov(X_{r,T}, X_{s,T}) = (prod_{t=s+1}^{r} a(t/T)) Var(X_{s,T}) for r >= s.
  double cross_cov(std::int64_t r, std::int64_t s) const {
    if (r < s) std::swap(r, s);
    double prod = 1.0;
    for (std::int64_t t = s + 1; t <= r; ++t) prod *= coefficient(t);
    return prod * variance(s);
  }

  double correlation(std::int64_t r, std::int64_t s) const {
    if (r == s) return 1.0;
    if (r < s) std::swap(r, s);
    double prod = 1.0;
    for (std::int64_t t = s + 1; t <= r; ++t) prod *= coefficient(t);
    return prod * std::sqrt(variance(s) / variance(r));
  }

  StationaryFamilyModel family(double u) const { return {u, curve_(u), innovation_sd_}; }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << curve_.describe() << ";sd=" << innovation_sd_ << ";T=" << T_;
    return os.str();
  }

 private:
  CoefficientCurve curve_;
  double innovation_sd_;
  std::int64_t T_;
  std::int64_t burn_in_ = 1;
};

inline double array_cross_cov(const TriangularArrayModel& model, std::int64_t r, std::int64_t s) {
  return model.cross_cov(r, s);
}

/// Simulated segment X_{first..first+n-1, T}; simulate_path() yields first = 1, n = T.
struct SamplePath {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::int64_t first_index = 1;
  std::string model_id;

  std::int64_t last_index() const { return first_index + static_cast<std::int64_t>(values.size()) - 1; }
  double at(std::int64_t t) const { return values.at(static_cast<std::size_t>(t - first_index)); }
};

/// splitmix64 step; used to derive independent per-path seeds from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/**
 * Exact Gaussian draw of X_{first..last, T}: the first value comes from its
 * exact marginal law, the rest from the AR recursion.
 */
inline SamplePath simulate_segment(const TriangularArrayModel& model, std::int64_t first, std::int64_t last,
                                   std::uint64_t seed) {
  if (last < first) throw std::invalid_argument("simulate_segment: empty range");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SamplePath path;
  path.seed = seed;
  path.first_index = first;
  path.model_id = model.describe();
  path.values.resize(static_cast<std::size_t>(last - first + 1));
  double x = std::sqrt(model.variance(first)) * normal(rng);
  path.values[0] = x;
  for (std::int64_t t = first + 1; t <= last; ++t) {
    x = model.coefficient(t) * x + model.innovation_sd() * normal(rng);
    path.values[static_cast<std::size_t>(t - first)] = x;
  }
  return path;
}

inline SamplePath simulate_path(const TriangularArrayModel& model, std::uint64_t seed) {
  return simulate_segment(model, 1, model.T(), seed);
}

}  // namespace qspec
