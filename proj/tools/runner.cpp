#include "runner.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "qspec/qspec.hpp"

namespace qspec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

constexpr double normalization_tol = 1e-6;
constexpr double symmetry_tol = 1e-12;

std::string label(double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "[%g,%g]", a, b);
  return buf;
}

std::string label_T(std::int64_t T) { return "[T=" + std::to_string(T) + "]"; }

std::vector<TauPair> tau_pairs(const ExperimentConfig& cfg) {
  std::vector<TauPair> out;
  for (const auto& [a, b] : cfg.taus) out.emplace_back(a, b);
  return out;
}

std::int64_t centre_index(const ExperimentConfig& cfg, std::int64_t T) {
  return cfg.t0 ? *cfg.t0 : static_cast<std::int64_t>(std::floor(cfg.u * static_cast<double>(T)));
}

LagWindow make_window(const ExperimentConfig& cfg) {
  const auto T = cfg.model.T;
  const auto M = cfg.M > 0 ? cfg.M : static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(T), 0.4)));
  const auto K = cfg.Kmax > 0 ? cfg.Kmax : cube_root_H(T);
  if (cfg.window == "parzen") return LagWindow::parzen(M, K);
  if (cfg.window == "point") return LagWindow::point(K);
  return LagWindow::bartlett(M, K);
}

// H for a closed-form classical cross-check: covariance tail below 1e-13.
std::int64_t classical_check_H(const StationaryFamilyModel& f) {
  const double a = std::abs(f.coefficient);
  std::int64_t H = 1;
  auto tail = [&](std::int64_t h) {
    return a > 0.0 ? 2.0 * f.marginal_variance() * std::pow(a, double(h + 1)) / ((1.0 - a) * 2.0 * std::numbers::pi)
                   : 0.0;
  };
  while (tail(H) >= 1e-13) ++H;
  return H;
}

std::vector<cplx> make_signal(const ExperimentConfig& cfg, std::uint64_t seed) {
  std::vector<cplx> s(static_cast<std::size_t>(cfg.length));
  if (cfg.signal == "tone") {
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::polar(1.0, cfg.omega0 * static_cast<double>(i));
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& v : s) {
      const double re = n(rng);
      v = {re, n(rng)};
    }
  }
  return s;
}

json config_json(const ExperimentConfig& cfg) {
  json m;
  m["command"] = cfg.command;
  m["models"] = {{"curve", cfg.model.curve},
                 {"a", cfg.model.a},
                 {"intercept", cfg.model.intercept},
                 {"slope", cfg.model.slope},
                 {"knots", cfg.model.knots},
                 {"innovation_sd", cfg.model.innovation_sd},
                 {"seed", cfg.model.seed},
                 {"T", cfg.model.T},
                 {"resolved_curve", cfg.model.make_curve().describe()}};
  m["copula"] = {{"taus", cfg.taus}, {"tau_grid", cfg.tau_grid}};
  m["spectra"] = {{"N", cfg.N}, {"u", cfg.u}, {"t0", cfg.t0 ? json(*cfg.t0) : json(nullptr)}, {"H", cfg.H}};
  m["verify"] = {{"Ts", cfg.Ts},
                 {"lag_bound_Ts", cfg.lag_bound_Ts},
                 {"lag_bound_H", cfg.lag_bound_H},
                 {"summability_H", cfg.summability_H},
                 {"l2_Ts", cfg.l2_Ts},
                 {"lss_stability", cfg.lss_stability}};
  m["estimate"] = {{"n_rep", cfg.n_rep}, {"window", cfg.window}, {"M", cfg.M}, {"Kmax", cfg.Kmax}, {"mode", cfg.mode}};
  m["wigner"] = {{"signal", cfg.signal},
                 {"length", cfg.length},
                 {"omega0", cfg.omega0},
                 {"t", cfg.t ? json(*cfg.t) : json(nullptr)}};
  return m;
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    const auto target = dir_ / name;
    const auto tmp = dir_ / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
      out << content;
      if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
    written_.push_back(name);
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

void add(std::vector<Check>& checks, std::string name, double value, double bound, bool pass,
         std::vector<std::string> failures = {}) {
  checks.push_back({std::move(name), value, bound, pass, std::move(failures)});
}

// ---- spectrum -------------------------------------------------------------

void run_spectrum(const ExperimentConfig& cfg, ArtifactWriter& out, std::vector<Check>& checks) {
  const auto family = cfg.model.make_model().family(cfg.u);
  const auto grid = FrequencyGrid::fourier(cfg.N);
  const auto H = cfg.H > 0 ? cfg.H : default_stationary_H(family);
  const auto pairs = tau_pairs(cfg);
  const auto f = copula_tv_spectrum(family, pairs, grid, H);
  std::vector<TauPair> swapped;
  for (const auto& p : pairs) swapped.push_back(p.swapped());
  const auto fs = copula_tv_spectrum(family, swapped, grid, H);

  std::ostringstream s, t;
  csv::write_spectrum(s, f);
  csv::write_table(t, stationary_table(family, H, pairs));
  out.write("spectrum.csv", s.str());
  out.write("gamma_table.csv", t.str());

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double g0 = gamma_stationary(family, 0, pairs[p].first, pairs[p].second);
    const double err = std::abs(integrate(f, p) - cplx(g0, 0.0));
    add(checks, "normalization" + label(pairs[p].first, pairs[p].second), err, normalization_tol,
        err <= normalization_tol);
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    double d = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) d = std::max(d, std::abs(f.at(j, p) - std::conj(fs.at(j, p))));
    add(checks, "conjugation" + label(pairs[p].first, pairs[p].second), d, symmetry_tol, d <= symmetry_tol);
  }
}

// ---- wv -------------------------------------------------------------------

void run_wv(const ExperimentConfig& cfg, ArtifactWriter& out, std::vector<Check>& checks) {
  const auto model = cfg.model.make_model();
  const auto grid = FrequencyGrid::fourier(cfg.N);
  const auto t0 = centre_index(cfg, model.T());
  const auto H = cfg.H > 0 ? cfg.H : cube_root_H(model.T());
  const auto pairs = tau_pairs(cfg);
  const auto w = wv_quantile_spectrum(model, t0, pairs, grid, H);
  const auto table = array_table(model, t0, H, pairs);

  std::ostringstream s, t;
  csv::write_spectrum(s, w);
  csv::write_table(t, table);
  out.write("wv.csv", s.str());
  out.write("gamma_table.csv", t.str());

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double err = std::abs(integrate(w, p) - cplx(table.at(0, p), 0.0));
    add(checks, "wv_normalization" + label(pairs[p].first, pairs[p].second), err, normalization_tol,
        err <= normalization_tol);
  }
  double worst = 0.0;
  for (double g : table.values) worst = std::max(worst, std::abs(g));
  add(checks, "kernel_range", worst, 0.25, worst <= 0.25);
}

// ---- classical ------------------------------------------------------------

void run_classical(const ExperimentConfig& cfg, ArtifactWriter& out, std::vector<Check>& checks) {
  const auto model = cfg.model.make_model();
  const auto family = model.family(cfg.u);
  const auto grid = FrequencyGrid::fourier(cfg.N);
  const auto H = cfg.H > 0 ? cfg.H : cube_root_H(model.T());
  const auto closed = classical_tv_spectrum(family, grid);
  const auto summed = classical_tv_spectrum_sum(family, grid, classical_check_H(family));
  const auto fT = classical_wv_spectrum(model, cfg.u, grid, H);

  std::ostringstream a, b;
  csv::write_spectrum(a, closed);
  csv::write_spectrum(b, fT);
  out.write("classical_tv.csv", a.str());
  out.write("classical_wv.csv", b.str());

  const double d = sup_distance(closed, summed);
  const double bound = summed.tail_bound + 1e-12;
  add(checks, "closed_form_vs_sum", d, bound, d <= bound);
  double im = 0.0;
  for (const auto& v : fT.values) im = std::max(im, std::abs(v.imag()));
  add(checks, "wv_real", im, symmetry_tol, im <= symmetry_tol);
}

// ---- wigner ---------------------------------------------------------------

void run_wigner(const ExperimentConfig& cfg, std::uint64_t seed, ArtifactWriter& out, std::vector<Check>& checks) {
  const auto signal = make_signal(cfg, seed);
  const auto grid = FrequencyGrid::fourier(cfg.N);
  const auto t = cfg.t ? *cfg.t : cfg.length / 2;
  const auto w = discrete_wigner(signal, t, grid);
  std::ostringstream s;
  csv::write_spectrum(s, w);
  out.write("wigner.csv", s.str());

  double im = 0.0, peak = 0.0;
  for (const auto& v : w.values) {
    im = std::max(im, std::abs(v.imag()));
    peak = std::max(peak, v.real());
  }
  add(checks, "wigner_real", im, symmetry_tol, im <= symmetry_tol);
  if (cfg.signal == "tone") {
    const double at = w.at(grid.nearest(cfg.omega0)).real();
    const double gap = peak > 0.0 ? (peak - at) / peak : 0.0;
    add(checks, "wigner_peak", gap, 1e-9, gap <= 1e-9);
  }
}

// ---- verify ---------------------------------------------------------------

void run_verify(const ExperimentConfig& cfg, ArtifactWriter& out, std::vector<Check>& checks) {
  const auto model = cfg.model.make_model();
  const auto grid = FrequencyGrid::fourier(cfg.N);
  const auto pairs = tau_pairs(cfg);
  ConvergenceReport report;
  report.Ts = cfg.Ts;

  if (!cfg.Ts.empty()) {
    report.prop1 = prop1_sweep(model, cfg.Ts, cfg.u, pairs, grid);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto name = label(pairs[p].first, pairs[p].second);
      add(checks, "prop1_decreasing" + name, report.prop1->max_step_ratio[p], 1.0, report.prop1->decreasing[p]);
      add(checks, "prop1_final" + name, report.prop1->final_ratio[p], 0.01, report.prop1->final_ratio[p] < 0.01);
    }
  }

  for (std::int64_t T : cfg.lag_bound_Ts) {
    const auto arr = model.with_length(T);
    const auto cert = certify_lss(arr);
    report.certificates.push_back(cert);
    report.L_hat = std::max(report.L_hat, cert.L_hat);
    const auto rows = check_lag_bound(arr, cfg.u, cfg.lag_bound_H, cfg.tau_grid, cert.L_hat);
    double worst = 0.0;
    std::vector<std::string> failures;
    for (const auto& r : rows) {
      if (r.lhs > numerical_floor) worst = std::max(worst, r.rhs > 0.0 ? r.lhs / r.rhs : INFINITY);
      if (!r.ok) {
        std::ostringstream os;
        os << "lag_bound T=" << r.T << " h=" << r.h << " tau=" << label(r.tau1, r.tau2) << " lhs=" << csv::num(r.lhs)
           << " rhs=" << csv::num(r.rhs);
        failures.push_back(os.str());
      }
    }
    report.bound_ledger.insert(report.bound_ledger.end(), rows.begin(), rows.end());
    add(checks, "lag_bound" + label_T(T), worst, 1.0, failures.empty(), failures);
    if (cfg.lss_stability) {
      const auto doubled = certify_lss(model.with_length(2 * T));
      report.certificates.push_back(doubled);
      const double drift = cert.L_hat > 0.0 ? std::abs(doubled.L_hat / cert.L_hat - 1.0) : 0.0;
      add(checks, "lss_stability" + label_T(T), drift, 0.2, drift <= 0.2);
    }
  }

  if (!cfg.summability_H.empty()) {
    report.summability = summability_check(model, cfg.u, cfg.summability_H, cfg.tau_grid);
    report.K_hat = report.summability->K_hat;
    add(checks, "summability_budget", report.summability->K_hat, report.summability->budget,
        report.summability->within_budget);
    add(checks, "summability_increments", report.summability->max_increment_ratio, report.summability->sup_abs,
        report.summability->increments_geometric);
  }

  if (!cfg.l2_Ts.empty()) {
    report.l2 = l2_sweep(model, cfg.l2_Ts, cfg.u, grid);
    add(checks, "l2_decreasing", report.l2->max_step_ratio, 1.0, report.l2->decreasing);
  }

  std::ostringstream s;
  csv::write_report(s, report, cfg.u);
  out.write("report.csv", s.str());
}

// ---- estimate -------------------------------------------------------------

void run_estimate(const ExperimentConfig& cfg, std::uint64_t seed, ArtifactWriter& out, std::vector<Check>& checks) {
  const auto model = cfg.model.make_model();
  const auto grid = FrequencyGrid::fourier(cfg.N);
  const auto window = make_window(cfg);
  const auto t0 = centre_index(cfg, model.T());
  const auto mode = cfg.mode == "rank" ? ThresholdMode::rank : ThresholdMode::oracle;
  const auto est = ensemble_estimate(model, t0, tau_pairs(cfg), window, grid, cfg.n_rep, seed, mode);

  std::ostringstream s;
  csv::write_spectrum(s, est.spectrum, &est);
  out.write("estimate.csv", s.str());

  double norm_err = 0.0;
  for (std::int64_t k = -window.k_support(); k <= window.k_support(); ++k) {
    double total = 0.0;
    for (std::int64_t m = -window.m_support(); m <= window.m_support(); ++m) total += window.phi(m, k);
    norm_err = std::max(norm_err, std::abs(total - 1.0));
  }
  add(checks, "window_normalization", norm_err, 1e-12, norm_err <= 1e-12);
  double min_se = INFINITY;
  bool finite = true;
  for (std::size_t i = 0; i < est.se_re.size(); ++i) {
    const double se = est.se(i);
    finite = finite && std::isfinite(se);
    min_se = std::min(min_se, se);
  }
  add(checks, "se_finite_nonnegative", min_se, 0.0, finite && min_se >= 0.0);
}

}  // namespace

std::vector<Check> list_checks(const ExperimentConfig& cfg) {
  std::vector<Check> out;
  auto plan = [&](std::string name, double bound) { out.push_back({std::move(name), 0.0, bound, false, {}}); };
  const auto& c = cfg.command;
  if (c == "spectrum") {
    for (const auto& [a, b] : cfg.taus) plan("normalization" + label(a, b), normalization_tol);
    for (const auto& [a, b] : cfg.taus) plan("conjugation" + label(a, b), symmetry_tol);
  } else if (c == "wv") {
    for (const auto& [a, b] : cfg.taus) plan("wv_normalization" + label(a, b), normalization_tol);
    plan("kernel_range", 0.25);
  } else if (c == "classical") {
    const auto family = cfg.model.make_model().family(cfg.u);
    const auto summed = classical_tv_spectrum_sum(family, FrequencyGrid::fourier(2), classical_check_H(family));
    plan("closed_form_vs_sum", summed.tail_bound + 1e-12);
    plan("wv_real", symmetry_tol);
  } else if (c == "wigner") {
    plan("wigner_real", symmetry_tol);
    if (cfg.signal == "tone") plan("wigner_peak", 1e-9);
  } else if (c == "verify") {
    if (!cfg.Ts.empty()) {
      for (const auto& [a, b] : cfg.taus) {
        plan("prop1_decreasing" + label(a, b), 1.0);
        plan("prop1_final" + label(a, b), 0.01);
      }
    }
    for (std::int64_t T : cfg.lag_bound_Ts) {
      plan("lag_bound" + label_T(T), 1.0);
      if (cfg.lss_stability) plan("lss_stability" + label_T(T), 0.2);
    }
    if (!cfg.summability_H.empty()) {
      const double sup = cfg.model.make_curve().sup_abs();
      plan("summability_budget", geometric_budget(sup));
      plan("summability_increments", sup);
    }
    if (!cfg.l2_Ts.empty()) plan("l2_decreasing", 1.0);
  } else if (c == "estimate") {
    plan("window_normalization", 1e-12);
    plan("se_finite_nonnegative", 0.0);
  }
  return out;
}

RunResult run(ExperimentConfig cfg, const RunOptions& options) {
  if (cfg.command.empty()) throw ConfigError(cfg.source + ": no command given");
  if (options.out_dir) cfg.out_dir = *options.out_dir;
  if (options.seed) cfg.model.seed = *options.seed;
  if (options.threads) set_thread_count(*options.threads);

  ArtifactWriter out(cfg.out_dir);
  RunResult result;
  const std::string manifest = config_json(cfg).dump(2) + "\n";
  out.write("manifest.json", manifest);

  const auto seed = cfg.model.seed;
  const auto& c = cfg.command;
  if (c == "spectrum") run_spectrum(cfg, out, result.checks);
  else if (c == "wv") run_wv(cfg, out, result.checks);
  else if (c == "classical") run_classical(cfg, out, result.checks);
  else if (c == "wigner") run_wigner(cfg, seed, out, result.checks);
  else if (c == "verify") run_verify(cfg, out, result.checks);
  else if (c == "estimate") run_estimate(cfg, seed, out, result.checks);
  else throw ConfigError(cfg.source + ": unknown command '" + c + "'");

  bool all = true;
  json checks = json::array();
  for (const auto& ch : result.checks) {
    all = all && ch.pass;
    checks.push_back({{"check", ch.name}, {"value", ch.value}, {"bound", ch.bound}, {"pass", ch.pass}});
  }
  json summary = {{"command", c}, {"checks", checks}, {"pass", all}, {"manifest_hash", fnv1a_hex(manifest)}};
  out.write("summary.json", summary.dump(2) + "\n");
  result.artifacts = out.written();
  result.exit_code = all ? 0 : 1;
  return result;
}

}  // namespace qspec::cli
