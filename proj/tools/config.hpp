#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qspec/models.hpp"

namespace qspec::cli {

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"spectrum", "wv", "classical", "wigner", "verify", "estimate"};
  return names;
}

/// Invalid configuration; the message carries "file:line:column:" when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelBlock {
  std::string curve = "linear";  // constant | linear | knots
  double a = 0.0;                // constant
  double intercept = 0.3;        // linear
  double slope = 0.4;
  std::vector<std::pair<double, double>> knots;
  double innovation_sd = 1.0;
  std::uint64_t seed = 0;
  std::int64_t T = 1024;

  CoefficientCurve make_curve() const;
  TriangularArrayModel make_model() const { return {make_curve(), innovation_sd, T}; }
};

struct ExperimentConfig {
  std::string source = "<config>";
  std::string command;  // empty when the file does not name one

  ModelBlock model;

  // copula
  std::vector<std::pair<double, double>> taus{{0.5, 0.5}};

  // spectra
  std::int64_t N = 512;
  double u = 0.5;
  std::optional<std::int64_t> t0;
  std::int64_t H = 0;  // 0: ceil(T^{1/3}) for array spectra, tail < 1e-10 for stationary ones

  // verify
  std::vector<std::int64_t> Ts{128, 512, 2048, 8192};
  std::vector<std::int64_t> lag_bound_Ts{256, 1024};
  std::int64_t lag_bound_H = 20;
  std::vector<double> tau_grid{0.1, 0.25, 0.5, 0.75, 0.9};
  std::vector<std::int64_t> summability_H{1, 2, 5, 10, 20, 40, 60};
  std::vector<std::int64_t> l2_Ts{128, 512, 2048};
  bool lss_stability = false;

  // estimate
  std::int64_t n_rep = 100;
  std::string window = "bartlett";  // bartlett | parzen | point
  std::int64_t M = 0;               // 0: ceil(T^{0.4})
  std::int64_t Kmax = 0;            // 0: ceil(T^{1/3})
  std::string mode = "oracle";      // oracle | rank

  // wigner
  std::string signal = "tone";  // tone | noise
  std::int64_t length = 64;
  double omega0 = 1.0;
  std::optional<std::int64_t> t;

  std::string out_dir = "qspec_out";
};

/// Parses and validates a YAML experiment file.  Throws ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");

}  // namespace qspec::cli
