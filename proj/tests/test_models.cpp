#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "qspec/models.hpp"

using namespace qspec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TriangularArrayModel default_tvar(std::int64_t T) { return {CoefficientCurve::linear(0.3, 0.4), 1.0, T}; }

// Hand-rolled generator for stable piecewise-linear curves.
CoefficientCurve random_curve(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-0.7, 0.7);
  std::uniform_int_distribution<int> n_knots(2, 5);
  const int n = n_knots(rng);
  std::vector<std::pair<double, double>> k;
  for (int i = 0; i < n; ++i) k.emplace_back(static_cast<double>(i) / (n - 1), coef(rng));
  return CoefficientCurve::knots(k);
}

}  // namespace

TEST_CASE("coefficient curve basics") {
  const auto c = CoefficientCurve::linear(0.3, 0.4);
  CHECK_THAT(c(0.5), WithinAbs(0.5, 1e-15));
  CHECK_THAT(c(-1.0), WithinAbs(0.3, 1e-15));  // clamped
  CHECK_THAT(c(2.0), WithinAbs(0.7, 1e-15));
  CHECK_THAT(c.lipschitz_const(), WithinAbs(0.4, 1e-15));
  CHECK_THAT(c.sup_abs(), WithinAbs(0.7, 1e-15));
  CHECK_THROWS(CoefficientCurve::constant(1.0));
  CHECK_THROWS(CoefficientCurve::linear(0.5, 0.6));
}

TEST_CASE("family correlation") {
  const StationaryFamilyModel f{0.5, 0.5, 1.0};
  CHECK(family_corr(f, 0) == 1.0);
  CHECK_THAT(family_corr(f, 2), WithinAbs(0.25, 1e-15));
  CHECK_THAT(family_corr(f, -3), WithinAbs(0.125, 1e-15));
  CHECK_THAT(f.marginal_variance(), WithinAbs(4.0 / 3.0, 1e-15));
}

TEST_CASE("array_cross_cov for a constant curve") {
  const TriangularArrayModel m{CoefficientCurve::constant(0.5), 1.0, 512};
  CHECK_THAT(array_cross_cov(m, 100, 100), WithinAbs(4.0 / 3.0, 1e-12));
  CHECK_THAT(array_cross_cov(m, 101, 100), WithinAbs(2.0 / 3.0, 1e-12));
  const TriangularArrayModel iid{CoefficientCurve::constant(0.0), 1.0, 64};
  CHECK(array_cross_cov(iid, 10, 11) == 0.0);
  CHECK_THAT(array_cross_cov(iid, 10, 10), WithinAbs(1.0, 1e-15));
}

TEST_CASE("array_cross_cov matches the stationary AR(1) covariance for constant curves") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-0.9, 0.9), sd(0.2, 3.0);
  std::uniform_int_distribution<std::int64_t> idx(-50, 600);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = coef(rng), s = sd(rng);
    const TriangularArrayModel m{CoefficientCurve::constant(a), s, 512};
    const auto r = idx(rng), q = idx(rng);
    const double expected = std::pow(a, static_cast<double>(std::abs(r - q))) * s * s / (1.0 - a * a);
    CHECK_THAT(array_cross_cov(m, r, q), WithinRel(expected, 1e-12) || WithinAbs(expected, 1e-300));
  }
}

TEST_CASE("array_cross_cov is symmetric") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::int64_t> idx(1, 300);
  for (int trial = 0; trial < 50; ++trial) {
    const TriangularArrayModel m{random_curve(rng), 1.0, 300};
    const auto r = idx(rng), s = idx(rng);
    CHECK(array_cross_cov(m, r, s) == array_cross_cov(m, s, r));
  }
}

TEST_CASE("array variance satisfies the AR recursion") {
  const auto m = default_tvar(200);
  for (std::int64_t t = 2; t <= 200; t += 17) {
    const double a = m.coefficient(t);
    CHECK_THAT(m.variance(t), WithinRel(a * a * m.variance(t - 1) + 1.0, 1e-13));
  }
}

TEST_CASE("array correlation approaches the family as T doubles") {
  for (double u : {0.25, 0.5, 0.75}) {
    for (std::int64_t h : {1, 3, 7}) {
      double prev = INFINITY;
      for (std::int64_t T = 256; T <= 4096; T *= 2) {
        const auto m = default_tvar(T);
        const auto t0 = static_cast<std::int64_t>(std::floor(u * static_cast<double>(T)));
        const double d = std::abs(m.correlation(t0, t0 - h) - family_corr(m.family(u), h));
        CHECK(d < prev);
        prev = d;
      }
    }
  }
}

TEST_CASE("simulation is deterministic in the seed") {
  const auto m = default_tvar(256);
  const auto a = simulate_path(m, 42);
  const auto b = simulate_path(m, 42);
  const auto c = simulate_path(m, 43);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK(a.first_index == 1);
  CHECK(a.last_index() == 256);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
}

TEST_CASE("iid simulation has no lag-1 correlation") {
  const std::int64_t n = 1'000'000;
  const TriangularArrayModel m{CoefficientCurve::constant(0.0), 1.0, n};
  const auto p = simulate_path(m, 2024);
  const double mean = std::accumulate(p.values.begin(), p.values.end(), 0.0) / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    den += (p.values[i] - mean) * (p.values[i] - mean);
    if (i) num += (p.values[i] - mean) * (p.values[i - 1] - mean);
  }
  CHECK(std::abs(num / den) <= 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("AR(1) sample variance matches the stationary variance") {
  const std::int64_t n = 1'000'000;
  const double a = 0.5;
  const TriangularArrayModel m{CoefficientCurve::constant(a), 1.0, n};
  const auto p = simulate_path(m, 99);
  const double mean = std::accumulate(p.values.begin(), p.values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : p.values) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n - 1);
  const double v = 4.0 / 3.0;
  // For a Gaussian AR(1), Var(s^2) ~ 2 v^2 (1 + a^2) / ((1 - a^2) n).
  const double se = std::sqrt(2.0 * v * v * (1 + a * a) / ((1 - a * a) * static_cast<double>(n)));
  CHECK(std::abs(var - array_cross_cov(m, 1, 1)) <= 3.0 * se);
}

TEST_CASE("segments start from the exact marginal law") {
  // Ensemble variance at the first and last index of short segments.
  const auto m = default_tvar(1024);
  const int n = 40000;
  double s_first = 0.0, s_last = 0.0, s_cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto seg = simulate_segment(m, 600, 602, derive_seed(5, static_cast<std::uint64_t>(i)));
    s_first += seg.at(600) * seg.at(600);
    s_last += seg.at(602) * seg.at(602);
    s_cross += seg.at(600) * seg.at(602);
  }
  const double v0 = m.variance(600), v2 = m.variance(602), c = m.cross_cov(600, 602);
  CHECK(std::abs(s_first / n - v0) <= 3.0 * v0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s_last / n - v2) <= 3.0 * v2 * std::sqrt(2.0 / n));
  CHECK(std::abs(s_cross / n - c) <= 3.0 * std::sqrt((v0 * v2 + c * c) / n));
}
