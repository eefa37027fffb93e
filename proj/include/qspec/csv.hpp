#pragma once

/** @file
 * CSV serialisation of kernel tables, spectra and verification reports.
 * Reals are written with 17 significant digits so a read reproduces them
 * exactly.
 */

#include "qspec/copula.hpp"
#include "qspec/estimate.hpp"
#include "qspec/spectra.hpp"
#include "qspec/verify.hpp"

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qspec::csv {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string num(std::int64_t x) { return std::to_string(x); }

inline constexpr const char* table_header = "kind,u_or_t0,T,lag,tau1,tau2,gamma";
inline constexpr const char* quantile_spectrum_header = "provenance,u_or_t0,T,H,omega,tau1,tau2,re,im";
inline constexpr const char* classical_spectrum_header = "provenance,u_or_t0,T,H,omega,re,im";
inline constexpr const char* report_header = "report_type,T,u,tau1,tau2,h,omega_or_blank,value,bound,ok";

inline void write_table(std::ostream& os, const CopulaCovTable& table) {
  os << table_header << '\n';
  for (std::int64_t h = -table.H; h <= table.H; ++h) {
    for (std::size_t p = 0; p < table.taus.size(); ++p) {
      os << to_string(table.kind) << ',' << num(table.u_or_t0) << ',' << (table.T ? num(table.T) : "") << ','
         << h << ',' << num(double(table.taus[p].first)) << ',' << num(double(table.taus[p].second)) << ','
         << num(table.at(h, p)) << '\n';
    }
  }
}

/// One row per (column, omega), column-major; an `se` column is appended when given.
inline void write_spectrum(std::ostream& os, const SpectrumGrid& s, const EstimatedSpectrum* est = nullptr) {
  const bool quantile = !s.taus.empty();
  os << (quantile ? quantile_spectrum_header : classical_spectrum_header) << (est ? ",se" : "") << '\n';
  for (std::size_t p = 0; p < s.n_columns(); ++p) {
    for (std::size_t j = 0; j < s.grid.size(); ++j) {
      const auto& v = s.at(j, p);
      os << to_string(s.provenance) << ',' << num(s.u_or_t0) << ',' << (s.T ? num(s.T) : "") << ',' << s.H << ','
         << num(s.grid.omegas[j]);
      if (quantile) os << ',' << num(double(s.taus[p].first)) << ',' << num(double(s.taus[p].second));
      os << ',' << num(v.real()) << ',' << num(v.imag());
      if (est) os << ',' << num(est->se(p * s.grid.size() + j));
      os << '\n';
    }
  }
}

namespace detail {

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("csv: malformed number '" + s + "'");
  return v;
}

}  // namespace detail

/// Inverse of write_spectrum (without the se column).
inline SpectrumGrid read_spectrum(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("csv: empty spectrum file");
  const bool quantile = line == quantile_spectrum_header;
  if (!quantile && line != classical_spectrum_header) throw std::invalid_argument("csv: unexpected header '" + line + "'");
  SpectrumGrid s;
  std::vector<double> omegas;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split(line);
    if (f.size() != (quantile ? 9u : 7u)) throw std::invalid_argument("csv: wrong field count in '" + line + "'");
    if (first) {
      s.provenance = provenance_from_string(f[0]);
      s.u_or_t0 = detail::to_double(f[1]);
      s.T = f[2].empty() ? 0 : std::stoll(f[2]);
      s.H = std::stoll(f[3]);
      first = false;
    }
    const double w = detail::to_double(f[4]);
    if (quantile) {
      TauPair p{detail::to_double(f[5]), detail::to_double(f[6])};
      if (s.taus.empty() || !(s.taus.back() == p)) {
        s.taus.push_back(p);
        if (s.taus.size() > 1 && omegas.size() != s.values.size() / (s.taus.size() - 1))
          throw std::invalid_argument("csv: ragged spectrum");
      }
      if (s.taus.size() == 1) omegas.push_back(w);
    } else {
      omegas.push_back(w);
    }
    s.values.emplace_back(detail::to_double(f[quantile ? 7 : 5]), detail::to_double(f[quantile ? 8 : 6]));
  }
  s.grid = FrequencyGrid{std::move(omegas)};
  if (s.values.size() != s.grid.size() * s.n_columns()) throw std::invalid_argument("csv: ragged spectrum");
  return s;
}

struct ReportRow {
  std::string report_type;
  std::optional<std::int64_t> T;
  std::optional<double> u, tau1, tau2;
  std::optional<std::int64_t> h;
  std::optional<double> omega;
  double value = 0.0;
  std::optional<double> bound;
  std::optional<bool> ok;
};

inline void write_report_row(std::ostream& os, const ReportRow& r) {
  auto opt = [](const auto& o) { return o ? num(*o) : std::string{}; };
  os << r.report_type << ',' << opt(r.T) << ',' << opt(r.u) << ',' << opt(r.tau1) << ',' << opt(r.tau2) << ','
     << opt(r.h) << ',' << opt(r.omega) << ',' << num(r.value) << ',' << opt(r.bound) << ','
     << (r.ok ? (*r.ok ? "true" : "false") : "") << '\n';
}

/// Flattens a convergence report into report rows.
inline std::vector<ReportRow> report_rows(const ConvergenceReport& rep, double u) {
  std::vector<ReportRow> rows;
  if (rep.prop1) {
    const auto& p1 = *rep.prop1;
    const auto n_pairs = p1.taus.size();
    for (std::size_t i = 0; i < p1.rows.size(); ++i) {
      const auto& r = p1.rows[i];
      const bool last = i + n_pairs >= p1.rows.size();
      std::optional<double> bound;
      bool ok = true;
      if (i >= n_pairs) {
        bound = p1.rows[i - n_pairs].distance;
        ok = r.distance < *bound || r.distance <= numerical_floor;
      }
      if (last) {
        bound = 0.01 * r.reference;
        ok = ok && r.distance < *bound;
      }
      rows.push_back({"prop1_sup", r.T, u, double(p1.taus[r.pair].first), double(p1.taus[r.pair].second), r.H,
                      r.omega_at, r.distance, bound, ok});
    }
  }
  for (const auto& c : rep.certificates)
    rows.push_back({"lss_L_hat", c.T, c.worst.u, {}, {}, c.window, {}, c.L_hat, {}, {}});
  for (const auto& r : rep.bound_ledger)
    rows.push_back({"lag_bound", r.T, u, r.tau1, r.tau2, r.h, {}, r.lhs, r.rhs, r.ok});
  if (rep.summability) {
    for (const auto& r : rep.summability->rows)
      rows.push_back({std::string("partial_sum_") + to_string(r.kind), {}, u, r.tau1, r.tau2, r.H, {}, r.partial_sum,
                      rep.summability->budget, r.partial_sum <= rep.summability->budget});
  }
  if (rep.l2) {
    for (std::size_t i = 0; i < rep.l2->rows.size(); ++i) {
      const auto& r = rep.l2->rows[i];
      std::optional<double> bound;
      std::optional<bool> ok;
      if (i) {
        bound = rep.l2->rows[i - 1].distance;
        ok = r.distance < *bound || r.distance <= numerical_floor;
      }
      rows.push_back({"l2", r.T, u, {}, {}, r.H, {}, r.distance, bound, ok});
    }
  }
  return rows;
}

inline void write_report(std::ostream& os, const ConvergenceReport& rep, double u) {
  os << report_header << '\n';
  for (const auto& r : report_rows(rep, u)) write_report_row(os, r);
}

}  // namespace qspec::csv
