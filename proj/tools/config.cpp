#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace qspec::cli {

CoefficientCurve ModelBlock::make_curve() const {
  if (curve == "constant") return CoefficientCurve::constant(a);
  if (curve == "linear") return CoefficientCurve::linear(intercept, slope);
  return CoefficientCurve::knots(knots);
}

namespace {

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const auto mark = node.Mark();
    std::ostringstream os;
    os << source_;
    if (!mark.is_null()) os << ':' << mark.line + 1 << ':' << mark.column + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, "'" + key + "' must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
    }
  }

  template <class T>
  std::vector<T> list(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence()) fail(node, "'" + key + "' must be a list");
    std::vector<T> out;
    for (const auto& item : node) out.push_back(scalar<T>(item, key));
    return out;
  }

  std::vector<std::pair<double, double>> pairs(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence()) fail(node, "'" + key + "' must be a list of [a, b] pairs");
    std::vector<std::pair<double, double>> out;
    for (const auto& item : node) {
      if (!item.IsSequence() || item.size() != 2) fail(item, "'" + key + "' entries must be [a, b] pairs");
      out.emplace_back(scalar<double>(item[0], key), scalar<double>(item[1], key));
    }
    return out;
  }

  // Walks a mapping, rejecting keys outside `allowed`.
  template <class Fn>
  void section(const YAML::Node& node, const std::string& name, const std::set<std::string>& allowed, Fn&& fn) const {
    if (!node.IsMap()) fail(node, "section '" + name + "' must be a mapping");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in section '" + name + "'");
      fn(key, kv.second);
    }
  }

  void tau_check(const YAML::Node& node, double tau) const {
    if (!(tau >= 0.01 && tau <= 0.99)) fail(node, "quantile level must lie in [0.01, 0.99]");
  }

  ExperimentConfig parse(const YAML::Node& root) const {
    ExperimentConfig cfg;
    cfg.source = source_;
    if (!root || root.IsNull()) return cfg;
    if (!root.IsMap()) fail(root, "top level must be a mapping");
    for (const auto& kv : root) {
      const auto key = kv.first.as<std::string>();
      const auto& v = kv.second;
      if (key == "command") {
        cfg.command = scalar<std::string>(v, key);
        if (std::find(commands().begin(), commands().end(), cfg.command) == commands().end())
          fail(v, "unknown command '" + cfg.command + "'");
      } else if (key == "models") {
        section(v, key, {"curve", "a", "intercept", "slope", "knots", "innovation_sd", "seed", "T"},
                [&](const std::string& k, const YAML::Node& n) {
                  auto& m = cfg.model;
                  if (k == "curve") {
                    m.curve = scalar<std::string>(n, k);
                    if (m.curve != "constant" && m.curve != "linear" && m.curve != "knots")
                      fail(n, "curve must be constant, linear or knots");
                  } else if (k == "a") m.a = scalar<double>(n, k);
                  else if (k == "intercept") m.intercept = scalar<double>(n, k);
                  else if (k == "slope") m.slope = scalar<double>(n, k);
                  else if (k == "knots") m.knots = pairs(n, k);
                  else if (k == "innovation_sd") {
                    m.innovation_sd = scalar<double>(n, k);
                    if (!(m.innovation_sd > 0.0)) fail(n, "innovation_sd must be positive");
                  } else if (k == "seed") m.seed = scalar<std::uint64_t>(n, k);
                  else if (k == "T") {
                    m.T = scalar<std::int64_t>(n, k);
                    if (m.T < 1) fail(n, "T must be positive");
                  }
                });
        try {
          (void)cfg.model.make_curve();
        } catch (const std::invalid_argument& e) {
          fail(v, e.what());
        }
      } else if (key == "copula") {
        section(v, key, {"taus", "tau_grid"}, [&](const std::string& k, const YAML::Node& n) {
          if (k == "taus") {
            cfg.taus = pairs(n, k);
            for (const auto& [a, b] : cfg.taus) {
              tau_check(n, a);
              tau_check(n, b);
            }
          } else {
            cfg.tau_grid = list<double>(n, k);
            for (double t : cfg.tau_grid) tau_check(n, t);
          }
        });
      } else if (key == "spectra") {
        section(v, key, {"N", "u", "t0", "H"}, [&](const std::string& k, const YAML::Node& n) {
          if (k == "N") {
            cfg.N = scalar<std::int64_t>(n, k);
            if (cfg.N < 2) fail(n, "N must be at least 2");
          } else if (k == "u") {
            cfg.u = scalar<double>(n, k);
            if (!(cfg.u > 0.0 && cfg.u < 1.0)) fail(n, "u must lie in (0, 1)");
          } else if (k == "t0") cfg.t0 = scalar<std::int64_t>(n, k);
          else if (k == "H") {
            cfg.H = scalar<std::int64_t>(n, k);
            if (cfg.H < 0) fail(n, "H must be non-negative");
          }
        });
      } else if (key == "verify") {
        section(v, key, {"Ts", "lag_bound_Ts", "lag_bound_H", "summability_H", "l2_Ts", "lss_stability"},
                [&](const std::string& k, const YAML::Node& n) {
                  if (k == "Ts") {
                    cfg.Ts = list<std::int64_t>(n, k);
                    for (std::size_t i = 0; i < cfg.Ts.size(); ++i) {
                      if (cfg.Ts[i] < 64) fail(n, "every T must be >= 64");
                      if (i && cfg.Ts[i] <= cfg.Ts[i - 1]) fail(n, "Ts must be strictly increasing");
                    }
                  } else if (k == "lag_bound_Ts") cfg.lag_bound_Ts = list<std::int64_t>(n, k);
                  else if (k == "lag_bound_H") cfg.lag_bound_H = scalar<std::int64_t>(n, k);
                  else if (k == "summability_H") cfg.summability_H = list<std::int64_t>(n, k);
                  else if (k == "l2_Ts") cfg.l2_Ts = list<std::int64_t>(n, k);
                  else if (k == "lss_stability") cfg.lss_stability = scalar<bool>(n, k);
                });
      } else if (key == "estimate") {
        section(v, key, {"n_rep", "window", "M", "Kmax", "mode"}, [&](const std::string& k, const YAML::Node& n) {
          if (k == "n_rep") {
            cfg.n_rep = scalar<std::int64_t>(n, k);
            if (cfg.n_rep < 30) fail(n, "n_rep must be at least 30");
          } else if (k == "window") {
            cfg.window = scalar<std::string>(n, k);
            if (cfg.window != "bartlett" && cfg.window != "parzen" && cfg.window != "point")
              fail(n, "window must be bartlett, parzen or point");
          } else if (k == "M") cfg.M = scalar<std::int64_t>(n, k);
          else if (k == "Kmax") cfg.Kmax = scalar<std::int64_t>(n, k);
          else if (k == "mode") {
            cfg.mode = scalar<std::string>(n, k);
            if (cfg.mode != "oracle" && cfg.mode != "rank") fail(n, "mode must be oracle or rank");
          }
        });
      } else if (key == "wigner") {
        section(v, key, {"signal", "length", "omega0", "t"}, [&](const std::string& k, const YAML::Node& n) {
          if (k == "signal") {
            cfg.signal = scalar<std::string>(n, k);
            if (cfg.signal != "tone" && cfg.signal != "noise") fail(n, "signal must be tone or noise");
          } else if (k == "length") {
            cfg.length = scalar<std::int64_t>(n, k);
            if (cfg.length < 1) fail(n, "length must be positive");
          } else if (k == "omega0") cfg.omega0 = scalar<double>(n, k);
          else if (k == "t") cfg.t = scalar<std::int64_t>(n, k);
        });
      } else if (key == "output") {
        section(v, key, {"dir"}, [&](const std::string& k, const YAML::Node& n) { cfg.out_dir = scalar<std::string>(n, k); });
      } else {
        fail(kv.first, "unknown key '" + key + "'");
      }
    }
    return cfg;
  }

 private:
  std::string source_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << source << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  return Parser(source).parse(root);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot read config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace qspec::cli
