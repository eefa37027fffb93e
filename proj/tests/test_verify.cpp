#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qspec/verify.hpp"

using namespace qspec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TriangularArrayModel default_tvar(std::int64_t T) { return {CoefficientCurve::linear(0.3, 0.4), 1.0, T}; }
const std::vector<double> tau_levels{0.1, 0.25, 0.5, 0.75, 0.9};

}  // namespace

TEST_CASE("certify_lss on a constant curve") {
  const TriangularArrayModel m{CoefficientCurve::constant(0.6), 1.0, 512};
  LssConfig cfg;
  cfg.us = {0.3, 0.7};
  const auto cert = certify_lss(m, cfg);
  CHECK(cert.L_hat <= 1e-9);
  CHECK(cert.window == cube_root_H(512));
  CHECK(cert.evaluations > 0);
}

TEST_CASE("certify_lss is nondecreasing under lattice refinement") {
  const auto m = default_tvar(256);
  LssConfig coarse;
  coarse.us = {0.2, 0.5};
  coarse.lattice_probs = {0.1, 0.5, 0.9};
  coarse.include_marginals = false;
  LssConfig fine = coarse;
  fine.lattice_probs = {0.1, 0.3, 0.5, 0.7, 0.9};
  LssConfig finer = fine;
  finer.include_marginals = true;
  const double a = certify_lss(m, coarse).L_hat;
  const double b = certify_lss(m, fine).L_hat;
  const double c = certify_lss(m, finer).L_hat;
  CHECK(a <= b);
  CHECK(b <= c);
  CHECK(a > 0.0);
}

TEST_CASE("certify_lss is stable as T doubles") {
  LssConfig cfg;
  cfg.us = {0.3, 0.5, 0.7};
  const double l1 = certify_lss(default_tvar(1024), cfg).L_hat;
  const double l2 = certify_lss(default_tvar(2048), cfg).L_hat;
  CHECK(std::isfinite(l1));
  CHECK(std::abs(l2 - l1) <= 0.2 * l1);
}

TEST_CASE("lag bound ledger") {
  const TriangularArrayModel c{CoefficientCurve::constant(0.5), 1.0, 1024};
  for (const auto& r : check_lag_bound(c, 0.5, 20, tau_levels, 0.0)) {
    CHECK(r.lhs <= 1e-9);
    CHECK(r.ok);
  }

  const auto rows_1024 = check_lag_bound(default_tvar(1024), 0.5, 5, tau_levels, 0.2);
  const auto rows_512 = check_lag_bound(default_tvar(512), 0.5, 5, tau_levels, 0.2);
  REQUIRE(rows_1024.size() == 11 * 25);
  for (std::size_t i = 0; i < rows_1024.size(); ++i) {
    CHECK_THAT(rows_512[i].rhs, WithinRel(2.0 * rows_1024[i].rhs, 1e-14));
    CHECK(rows_1024[i].lhs >= 0.0);
    CHECK(rows_1024[i].ok == (rows_1024[i].lhs <= rows_1024[i].rhs || rows_1024[i].lhs <= numerical_floor));
  }
}

TEST_CASE("decreasing-to-floor rule") {
  CHECK(strictly_decreasing_to_floor(std::vector<double>{3, 2, 1}));
  CHECK_FALSE(strictly_decreasing_to_floor(std::vector<double>{3, 3, 1}));
  CHECK(strictly_decreasing_to_floor(std::vector<double>{1e-13, 2e-13, 0.0}));
  CHECK_FALSE(strictly_decreasing_to_floor(std::vector<double>{1e-3, 2e-3}));
}

TEST_CASE("prop1 sweep on the iid curve") {
  const TriangularArrayModel m{CoefficientCurve::constant(0.0), 1.0, 128};
  const std::vector<std::int64_t> Ts{64, 128, 256};
  const auto r = prop1_sweep(m, Ts, 0.5, {TauPair{0.5, 0.5}, TauPair{0.25, 0.75}}, FrequencyGrid::fourier(128));
  for (const auto& row : r.rows) CHECK(row.distance < 1e-12);
  CHECK(r.decreasing[0]);
  CHECK(r.decreasing[1]);
}

TEST_CASE("prop1 sweep on a constant curve measures truncation only") {
  const TriangularArrayModel m{CoefficientCurve::constant(0.5), 1.0, 128};
  const std::vector<std::int64_t> Ts{64, 512, 4096};
  const auto grid = FrequencyGrid::fourier(256);
  const std::vector<TauPair> taus{TauPair{0.5, 0.5}};
  const auto r = prop1_sweep(m, Ts, 0.5, taus, grid);
  CHECK(r.decreasing[0]);
  for (const auto& row : r.rows) {
    // The difference is exactly the tail sum beyond H, which the bound dominates.
    const double bound = copula_tail_bound(1.0, 0.5, row.H);
    CHECK(row.distance <= bound * (1.0 + 1e-9) + r.reference_tail_bound);
    CHECK(row.distance >= 0.5 * bound);
  }
}

TEST_CASE("prop1 sweep rejects bad T sequences") {
  const auto m = default_tvar(128);
  const auto g = FrequencyGrid::fourier(16);
  CHECK_THROWS(prop1_sweep(m, std::vector<std::int64_t>{32, 128}, 0.5, {TauPair{0.5, 0.5}}, g));
  CHECK_THROWS(prop1_sweep(m, std::vector<std::int64_t>{256, 128}, 0.5, {TauPair{0.5, 0.5}}, g));
}

TEST_CASE("prop1 sweep on the default curve") {
  const auto m = default_tvar(128);
  const std::vector<std::int64_t> Ts{128, 512, 2048};
  const auto r = prop1_sweep(m, Ts, 0.5, {TauPair{0.5, 0.5}}, FrequencyGrid::fourier(256));
  CHECK(r.decreasing[0]);
  CHECK(r.final_ratio[0] < 0.01);
}

TEST_CASE("summability check examples") {
  const std::vector<std::int64_t> H_list{1, 2, 5, 10, 20, 40};
  const TriangularArrayModel iid{CoefficientCurve::constant(0.0), 1.0, 1024};
  const auto r0 = summability_check(iid, 0.5, H_list, std::vector<double>{0.3, 0.7});
  for (const auto& row : r0.rows)
    CHECK_THAT(row.partial_sum, WithinAbs(std::min(row.tau1, row.tau2) - row.tau1 * row.tau2, 1e-12));

  const TriangularArrayModel half{CoefficientCurve::constant(0.5), 1.0, 1024};
  const auto r = summability_check(half, 0.5, H_list, std::vector<double>{0.5});
  double prev = 0.0;
  for (const auto& row : r.rows) {
    if (row.H == 1) prev = 0.0;
    CHECK(row.partial_sum > prev);
    CHECK(row.partial_sum < 1.25);
    prev = row.partial_sum;
  }
  CHECK(r.within_budget);
  CHECK(r.increments_geometric);

  const auto d = summability_check(default_tvar(1024), 0.5, std::vector<std::int64_t>{1, 10, 60}, tau_levels);
  CHECK(d.within_budget);
  CHECK(d.K_hat <= geometric_budget(0.7));
}

TEST_CASE("increment ratios for mixed levels exceed a and tend to it") {
  // gamma is concave in rho when z1 z2 < 0, so gamma(a rho) / gamma(rho) > a.
  const StationaryFamilyModel f{0.5, 0.5, 1.0};
  const QuantileLevel lo(0.1), hi(0.9);
  double prev_gap = INFINITY;
  for (std::int64_t h = 1; h < 30; ++h) {
    const double ratio = gamma_stationary(f, h + 1, lo, hi) / gamma_stationary(f, h, lo, hi);
    CHECK(ratio > 0.5);
    CHECK(ratio - 0.5 < prev_gap);
    prev_gap = ratio - 0.5;
  }
  CHECK(prev_gap < 1e-6);
  // At the medians gamma = arcsin(rho) / (2 pi) is convex, so the ratio stays below a.
  for (std::int64_t h = 1; h < 30; ++h)
    CHECK(gamma_stationary(f, h + 1, QuantileLevel(0.5), QuantileLevel(0.5)) <=
          0.5 * gamma_stationary(f, h, QuantileLevel(0.5), QuantileLevel(0.5)));
}

TEST_CASE("L2 sweep") {
  const auto g = FrequencyGrid::fourier(256);
  const TriangularArrayModel iid{CoefficientCurve::constant(0.0), 1.0, 128};
  const std::vector<std::int64_t> Ts{128, 512, 2048};
  for (const auto& row : l2_sweep(iid, Ts, 0.5, g).rows) CHECK(row.distance < 1e-12);

  const auto r = l2_sweep(default_tvar(128), Ts, 0.5, g);
  CHECK(r.decreasing);

  const TriangularArrayModel c{CoefficientCurve::constant(0.5), 1.0, 128};
  const auto rc = l2_sweep(c, Ts, 0.5, g);
  CHECK(rc.decreasing);
  for (const auto& row : rc.rows) {
    const double tail = 2.0 * std::pow(0.5, row.H + 1) / (0.5 * 0.75);
    CHECK(row.distance <= tail * tail / (2 * std::numbers::pi));
  }
}

TEST_CASE("verification is deterministic") {
  const auto m = default_tvar(128);
  const std::vector<std::int64_t> Ts{128, 512};
  const auto g = FrequencyGrid::fourier(64);
  set_thread_count(1);
  const auto a = prop1_sweep(m, Ts, 0.5, {TauPair{0.5, 0.5}}, g);
  set_thread_count(3);
  const auto b = prop1_sweep(m, Ts, 0.5, {TauPair{0.5, 0.5}}, g);
  set_thread_count(1);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].distance == b.rows[i].distance);
}
