// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "config.hpp"
#include "qspec/qspec.hpp"
#include "runner.hpp"

using namespace qspec;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
const fs::path source_dir = QSPEC_SOURCE_DIR;

TriangularArrayModel default_tvar(std::int64_t T) { return {CoefficientCurve::linear(0.3, 0.4), 1.0, T}; }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome ac1_sup_convergence() {
  Outcome o;
  const auto t_start = std::chrono::steady_clock::now();
  const std::vector<std::int64_t> Ts{128, 512, 2048, 8192};
  const std::vector<TauPair> taus{TauPair{0.5, 0.5}, TauPair{0.25, 0.75}};
  const auto r = prop1_sweep(default_tvar(128), Ts, 0.5, taus, FrequencyGrid::fourier(512));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  for (std::size_t p = 0; p < taus.size(); ++p) {
    std::string seq;
    for (std::size_t k = 0; k < Ts.size(); ++k) seq += fmt(k ? " %.3g" : "%.3g", r.rows[k * taus.size() + p].distance);
    const std::string tag = "tau=(" + fmt("%g", taus[p].first) + "," + fmt("%g", taus[p].second) + ")";
    o.require(r.decreasing[p], tag + " not strictly decreasing: " + seq);
    o.require(r.final_ratio[p] < 0.01, tag + " final ratio " + fmt("%.3g", r.final_ratio[p]) + " >= 0.01");
    if (o.pass) o.detail += (o.detail.empty() ? "" : "; ") + tag + " d=[" + seq + "] final/sup=" + fmt("%.2e", r.final_ratio[p]);
  }
  o.require(secs < 600.0, "runtime " + fmt("%.0f", secs) + " s exceeds 10 min");
  if (o.pass) o.detail += "; " + fmt("%.2f s", secs);
  return o;
}

Outcome ac2_lag_bound() {
  Outcome o;
  const std::vector<double> levels{0.1, 0.25, 0.5, 0.75, 0.9};
  std::size_t rows = 0, bad = 0;
  for (std::int64_t T : {256, 1024}) {
    const auto m = default_tvar(T);
    const auto cert = certify_lss(m);
    double worst = 0.0;
    for (const auto& r : check_lag_bound(m, 0.5, 20, levels, cert.L_hat)) {
      ++rows;
      // Every row must satisfy lhs <= rhs; the numerical floor is not used here.
      if (!(r.lhs <= r.rhs)) ++bad;
      worst = std::max(worst, r.lhs / r.rhs);
    }
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("T=") + std::to_string(T) + " L_hat=" +
                fmt("%.4f", cert.L_hat) + " max lhs/rhs=" + fmt("%.3g", worst);
  }
  o.require(bad == 0, std::to_string(bad) + " of " + std::to_string(rows) + " rows violate the bound");
  return o;
}

Outcome ac3_closed_forms() {
  Outcome o;
  const auto grid = FrequencyGrid::fourier(512);
  const std::vector<double> levels{0.1, 0.25, 0.5, 0.75, 0.9};
  const auto pairs = tau_grid_pairs(levels);
  const auto iid = copula_tv_spectrum(StationaryFamilyModel{0.5, 0.0, 1.0}, pairs, grid);
  const auto iid_wv = wv_quantile_spectrum(TriangularArrayModel{CoefficientCurve::constant(0.0), 1.0, 1024}, 512,
                                           pairs, grid, cube_root_H(1024));
  double worst = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double t1 = pairs[p].first, t2 = pairs[p].second;
    const cplx expected{(std::min(t1, t2) - t1 * t2) / (2 * pi), 0.0};
    for (std::size_t j = 0; j < grid.size(); ++j)
      worst = std::max({worst, std::abs(iid.at(j, p) - expected), std::abs(iid_wv.at(j, p) - expected)});
  }
  o.require(worst <= 1e-12, "iid spectrum off by " + fmt("%.3g", worst));

  const StationaryFamilyModel half{0.5, 0.5, 1.0};
  const double g1 = gamma_stationary(half, 1, QuantileLevel(0.5), QuantileLevel(0.5));
  o.require(std::abs(g1 - 1.0 / 12.0) <= 1e-10, "gamma_1 = " + fmt("%.17g", g1));

  // Direct simulation of (X_t, X_{t+1}) from the stationary AR(1) with a = 0.5.
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::int64_t N = 10'000'000;
  const double sd = std::sqrt(half.marginal_variance());
  double s1 = 0, s2 = 0, s12 = 0;
  for (std::int64_t i = 0; i < N; ++i) {
    const double x0 = sd * n(rng);
    const double x1 = 0.5 * x0 + n(rng);
    const double b0 = x0 <= 0.0, b1 = x1 <= 0.0;
    s1 += b0;
    s2 += b1;
    s12 += b0 * b1;
  }
  const double nd = static_cast<double>(N);
  const double p12 = s12 / nd, p1 = s1 / nd, p2 = s2 / nd;
  const double mc = p12 - p1 * p2;
  // Delta method for p12 - p1 p2 with the multinomial covariance of (b0 b1, b0, b1).
  const double g_a = 1.0, g_b = -p2, g_c = -p1;
  const double v_aa = p12 * (1 - p12), v_bb = p1 * (1 - p1), v_cc = p2 * (1 - p2);
  const double v_ab = p12 * (1 - p1), v_ac = p12 * (1 - p2), v_bc = p12 - p1 * p2;
  const double var = g_a * g_a * v_aa + g_b * g_b * v_bb + g_c * g_c * v_cc + 2 * g_a * g_b * v_ab +
                     2 * g_a * g_c * v_ac + 2 * g_b * g_c * v_bc;
  const double se = std::sqrt(var / nd);
  o.require(std::abs(mc - 1.0 / 12.0) <= 3 * se, "Monte Carlo " + fmt("%.6f", mc) + " outside 3 SE");
  if (o.pass)
    o.detail = "iid max err " + fmt("%.1e", worst) + "; gamma_1 err " + fmt("%.1e", std::abs(g1 - 1.0 / 12.0)) +
               "; MC " + fmt("%.6f", mc) + " (" + fmt("%.2f", (mc - 1.0 / 12.0) / se) + " SE)";
  return o;
}

Outcome ac4_summability() {
  Outcome o;
  std::vector<std::int64_t> H_list;
  for (std::int64_t h = 1; h <= 60; ++h) H_list.push_back(h);
  const auto r = summability_check(default_tvar(1024), 0.5, H_list, std::vector<double>{0.1, 0.25, 0.5, 0.75, 0.9});
  o.require(r.sup_abs == 0.7, "sup_abs is " + fmt("%g", r.sup_abs));
  o.require(r.within_budget, "K_hat " + fmt("%.4f", r.K_hat) + " exceeds budget " + fmt("%.4f", r.budget));
  o.require(r.increments_geometric,
            "increment ratio " + fmt("%.4f", r.max_increment_ratio) + " exceeds " + fmt("%g", r.sup_abs));
  if (o.pass)
    o.detail = "K_hat=" + fmt("%.4f", r.K_hat) + " budget=" + fmt("%.4f", r.budget) +
               " max increment ratio=" + fmt("%.4f", r.max_increment_ratio);
  return o;
}

Outcome ac5_classical() {
  Outcome o;
  const auto f0 = classical_tv_spectrum(StationaryFamilyModel{0.5, 0.5, 1.0}, FrequencyGrid::from({0.0}));
  const double err = std::abs(f0.at(0).real() - 2.0 / pi);
  o.require(err <= 1e-10, "f(0) error " + fmt("%.3g", err));

  const auto l2 = l2_sweep(default_tvar(128), std::vector<std::int64_t>{128, 512, 2048}, 0.5, FrequencyGrid::fourier(512));
  std::string seq;
  for (const auto& r : l2.rows) seq += fmt(seq.empty() ? "%.3g" : " %.3g", r.distance);
  o.require(l2.decreasing, "L2 distances not decreasing: " + seq);

  std::mt19937_64 rng(1001);
  std::normal_distribution<double> n;
  std::uniform_int_distribution<int> len(8, 200);
  const auto grid = FrequencyGrid::fourier(256);
  double worst_im = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<cplx> sig(static_cast<std::size_t>(len(rng)));
    for (auto& z : sig) z = {n(rng), n(rng)};
    std::uniform_int_distribution<std::int64_t> ts(0, static_cast<std::int64_t>(sig.size()) - 1);
    for (const auto& v : discrete_wigner(sig, ts(rng), grid).values) worst_im = std::max(worst_im, std::abs(v.imag()));
  }
  o.require(worst_im <= 1e-12, "Wigner imaginary part " + fmt("%.3g", worst_im));

  std::uniform_real_distribution<double> w(-pi, pi);
  int misplaced = 0;
  for (int i = 0; i < 10; ++i) {
    const double w0 = w(rng);
    std::vector<cplx> tone(129);
    for (std::size_t t = 0; t < tone.size(); ++t) tone[t] = std::polar(1.0, w0 * static_cast<double>(t));
    const auto wd = discrete_wigner(tone, 64, grid);
    double peak = -INFINITY;
    for (const auto& v : wd.values) peak = std::max(peak, v.real());
    // e^{-2i tau omega} has period pi, so the mirror at w0 +- pi ties; the nearest point must attain the max.
    if (wd.at(grid.nearest(w0)).real() < peak * (1.0 - 1e-12)) ++misplaced;
  }
  o.require(misplaced == 0, std::to_string(misplaced) + " of 10 tone peaks misplaced");
  if (o.pass)
    o.detail = "f(0) err " + fmt("%.1e", err) + "; L2 [" + seq + "]; Wigner max |im| " + fmt("%.1e", worst_im) +
               "; 10/10 peaks";
  return o;
}

Outcome ac6_symmetries() {
  Outcome o;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> coef(-0.7, 0.7), tau(0.01, 0.99), uu(0.05, 0.95);
  std::uniform_int_distribution<int> knots(2, 4);
  const auto grid = FrequencyGrid::fourier(512);
  double worst_conj = 0.0, worst_norm = 0.0;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::pair<double, double>> k;
    const int nk = knots(rng);
    for (int j = 0; j < nk; ++j) k.emplace_back(static_cast<double>(j) / (nk - 1), coef(rng));
    const TriangularArrayModel m{CoefficientCurve::knots(k), 1.0, 1024};
    const auto family = m.family(uu(rng));
    const TauPair p{tau(rng), tau(rng)};
    const auto f = copula_tv_spectrum(family, {p, p.swapped()}, grid, 60);
    for (std::size_t j = 0; j < grid.size(); ++j)
      worst_conj = std::max(worst_conj, std::abs(f.at(j, 0) - std::conj(f.at(j, 1))));
    const double g0 = gamma_stationary(family, 0, p.first, p.second);
    worst_norm = std::max(worst_norm, std::abs(integrate(f, 0) - cplx(g0, 0.0)));
  }
  o.require(worst_conj <= 1e-12, "conjugation error " + fmt("%.3g", worst_conj));
  o.require(worst_norm <= 1e-6, "normalization error " + fmt("%.3g", worst_norm));
  if (o.pass) o.detail = "20 models: conj err " + fmt("%.1e", worst_conj) + ", norm err " + fmt("%.1e", worst_norm);
  return o;
}

Outcome ac7_estimator() {
  Outcome o;
  const auto t_start = std::chrono::steady_clock::now();
  const std::int64_t T = 2048;
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> w(-pi, pi);
  std::vector<double> omegas;
  for (int i = 0; i < 10; ++i) omegas.push_back(w(rng));
  std::sort(omegas.begin(), omegas.end());
  const auto grid = FrequencyGrid::from(omegas);
  const auto window = LagWindow::default_for(T);
  const std::vector<TauPair> taus{TauPair{0.5, 0.5}};

  double worst_z = 0.0;
  auto compare = [&](const EstimatedSpectrum& e, const std::vector<double>& truth, const std::string& tag) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double z = std::abs(e.spectrum.at(j).real() - truth[j]) / e.se_re[j];
      worst_z = std::max(worst_z, z);
      o.require(z <= 3.0, tag + " at omega=" + fmt("%.3f", grid.omegas[j]) + " is " + fmt("%.2f", z) + " SE off");
    }
  };

  const TriangularArrayModel iid{CoefficientCurve::constant(0.0), 1.0, T};
  compare(ensemble_estimate(iid, T / 2, taus, window, grid, 100, 0xA7),
          std::vector<double>(grid.size(), 1.0 / (8 * pi)), "iid");

  const TriangularArrayModel half{CoefficientCurve::constant(0.5), 1.0, T};
  const auto truth = copula_tv_spectrum(half.family(0.5), taus, grid);
  std::vector<double> t;
  for (const auto& v : truth.values) t.push_back(v.real());
  compare(ensemble_estimate(half, T / 2, taus, window, grid, 100, 0xA8), t, "a=0.5");

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  o.require(secs < 300.0, "runtime " + fmt("%.0f", secs) + " s exceeds 5 min");
  if (o.pass) o.detail = "20 cells, max |z| = " + fmt("%.2f", worst_z) + "; " + fmt("%.2f s", secs);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome ac8_determinism() {
  Outcome o;
  std::size_t compared = 0;
  for (const char* name : {"configs/verify_acceptance.yaml", "configs/estimate_tvar.yaml", "configs/spectrum_iid.yaml",
                           "configs/wv_tvar.yaml"}) {
    const auto cfg = cli::load_config((source_dir / name).string());
    const auto a = fs::temp_directory_path() / "qspec_acceptance_a";
    const auto b = fs::temp_directory_path() / "qspec_acceptance_b";
    fs::remove_all(a);
    fs::remove_all(b);
    const auto ra = cli::run(cfg, {a.string(), 1, {}});
    const auto rb = cli::run(cfg, {b.string(), 1, {}});
    o.require(ra.artifacts == rb.artifacts, std::string(name) + ": artifact lists differ");
    for (const auto& f : ra.artifacts) {
      ++compared;
      o.require(slurp(a / f) == slurp(b / f), std::string(name) + ": " + f + " differs");
    }
    if (std::string(name) == "configs/verify_acceptance.yaml") {
      o.require(ra.exit_code == 0, "verify acceptance config exited " + std::to_string(ra.exit_code));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
  if (o.pass) o.detail = std::to_string(compared) + " artifacts byte-identical across reruns";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<Outcome()> fn;
  };
  const Criterion criteria[] = {
      {"AC1", "sup-norm convergence of the Wigner-Ville quantile spectrum", ac1_sup_convergence},
      {"AC2", "lag-level bound with certified L", ac2_lag_bound},
      {"AC3", "closed forms (iid spectrum, median lag-1 kernel, Monte Carlo)", ac3_closed_forms},
      {"AC4", "absolute summability within the geometric budget", ac4_summability},
      {"AC5", "classical spectra, L2 convergence, discrete Wigner", ac5_classical},
      {"AC6", "conjugation and normalization on random models", ac6_symmetries},
      {"AC7", "lag-window estimator ensembles", ac7_estimator},
      {"AC8", "byte-identical reruns", ac8_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s %s: %s\n", out.pass ? "PASS" : "FAIL", c.id, c.title, out.detail.c_str());
    std::fflush(stdout);
    failed += !out.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed ? 1 : 0;
}
