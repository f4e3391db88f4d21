#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypscatter/errors.hpp"
#include "hypscatter/halfplane.hpp"
#include "hypscatter/quadrature.hpp"

namespace hypscatter::cli {

using Json = nlohmann::ordered_json;

struct KeySpec {
  const char* name;
  const char* default_value;
  const char* help;
};

inline const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"group", "modular", "modular, or a path to a generator file with one 'a b c d' matrix per line"},
      {"z0_x", "0.3", "real part of the base point z0"},
      {"z0_y", "1.3", "imaginary part of the base point z0 (> 0)"},
      {"alpha", "", "physical coupling alpha (nonzero); give alpha or beta"},
      {"beta", "", "renormalized coupling beta (nonzero); give alpha or beta"},
      {"radius", "8", "orbit ball radius R (> 0)"},
      {"max_elements", "5000000", "orbit ball element cap"},
      {"rc_tail_tol", "1", "accepted tail estimate for the regularization constant c(t)"},
      {"abs_tol", "1e-10", "absolute quadrature tolerance (> 0)"},
      {"width", "2", "Gaussian test-function width a (> 0)"},
      {"k_max", "20", "number of diffractive terms (>= 1)"},
      {"representation", "orbit", "relative zeta representation: orbit, spectral or sphere"},
      {"spectral_file", "", "CSV with header lambda,weight for the spectral representation"},
      {"s_re", "2", "real part of the spectral parameter s"},
      {"s_im", "0", "imaginary part of the spectral parameter s"},
      {"lo", "0.5", "lower end of the root search interval"},
      {"hi", "6", "upper end of the root search interval"},
      {"J", "60", "number of sphere eigenvalues in the spectral side (>= 0)"},
      {"delta", "0.25", "sphere contour depth, 0 < delta < 1/2"},
      {"delta_alt", "0.1", "second sphere contour depth for the contour-shift check"},
      {"x", "0.1", "real part of the evaluation point"},
      {"y", "1.5", "imaginary part of the evaluation point (> 0)"},
      {"csv", "orbit_ball.csv", "orbit ball CSV output path"},
      {"output", "", "JSON output path (stdout when empty)"},
  };
  return keys;
}

inline bool is_known_key(const std::string& k) {
  for (const auto& spec : config_keys()) {
    if (k == spec.name) return true;
  }
  return false;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Parses flat key=value lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raise(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!is_known_key(key)) raise(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

/// Resolved configuration: defaults, then the config file, then command-line overrides.
class RunConfig {
 public:
  RunConfig() {
    for (const auto& spec : config_keys()) values_[spec.name] = spec.default_value;
  }

  void merge(const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) {
      if (!is_known_key(k)) raise(ErrorKind::ConfigError, "unknown key '" + k + "'");
      values_[k] = v;
    }
  }

  const std::string& str(const std::string& key) const { return values_.at(key); }
  bool has(const std::string& key) const { return !values_.at(key).empty(); }

  double real(const std::string& key) const {
    const std::string& v = str(key);
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      raise(ErrorKind::ConfigError, key + ": expected a finite number, got '" + v + "'");
    }
  }

  double positive(const std::string& key) const {
    const double d = real(key);
    if (!(d > 0.0)) raise(ErrorKind::ConfigError, key + " must be positive");
    return d;
  }

  double nonzero(const std::string& key) const {
    const double d = real(key);
    if (d == 0.0) raise(ErrorKind::ConfigError, key + " must be nonzero");
    return d;
  }

  long long integer(const std::string& key, long long min_value) const {
    const std::string& v = str(key);
    long long n = 0;
    try {
      std::size_t used = 0;
      n = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      raise(ErrorKind::ConfigError, key + ": expected an integer, got '" + v + "'");
    }
    if (n < min_value) raise(ErrorKind::ConfigError, key + " must be at least " + std::to_string(min_value));
    return n;
  }

  QuadratureSpec quadrature() const {
    QuadratureSpec q;
    q.abs_tol = positive("abs_tol");
    return q;
  }

  HPoint base_point() const { return point("z0_x", "z0_y"); }

  HPoint point(const std::string& kx, const std::string& ky) const {
    const double x = real(kx);
    const double y = positive(ky);
    return HPoint(x, y);
  }

  Json to_json() const {
    Json j = Json::object();
    for (const auto& spec : config_keys()) j[spec.name] = values_.at(spec.name);
    return j;
  }

 private:
  std::map<std::string, std::string> values_;
};

/// Reads a generator file: one 'a b c d' matrix per non-comment line.
inline FuchsianGroup read_generator_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::ConfigError, "group: cannot open generator file '" + path + "'");
  std::vector<MoebiusMap> gens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    double a = 0, b = 0, c = 0, d = 0;
    if (!(ls >> a >> b >> c >> d)) raise(ErrorKind::ConfigError, "group: malformed generator line '" + line + "'");
    gens.push_back(MoebiusMap::make(a, b, c, d));
  }
  if (gens.empty()) raise(ErrorKind::ConfigError, "group: generator file has no generators");
  return FuchsianGroup::generic(std::move(gens));
}

inline FuchsianGroup group_from_config(const RunConfig& cfg) {
  const std::string& g = cfg.str("group");
  if (g == "modular") return FuchsianGroup::modular();
  return read_generator_file(g);
}

/// Process exit status for a library error.
inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError: return 2;
    case ErrorKind::BallOverflow: return 3;
    case ErrorKind::DomainError:
    case ErrorKind::DomainViolation:
    case ErrorKind::ConvergenceDomain:
    case ErrorKind::OutOfComputableRegion:
    case ErrorKind::NonModularGroup:
    case ErrorKind::InsufficientRadius:
    case ErrorKind::ZeroCoupling:
    case ErrorKind::SingularReparametrization:
    case ErrorKind::GroupTooCoarse:
    case ErrorKind::RepresentationUnavailable: return 4;
    case ErrorKind::NoContraction: return 5;
    case ErrorKind::PoleAtNonpositiveInteger:
    case ErrorKind::PoleAtOne:
    case ErrorKind::NearPole:
    case ErrorKind::PoleOnBoundary:
    case ErrorKind::PoleOfEisenstein:
    case ErrorKind::ScatteringPole:
    case ErrorKind::ZeroOfRelativeZeta:
    case ErrorKind::SingularPair: return 6;
    default: return 1;
  }
}

inline Json complex_json(std::complex<double> z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

/// Serializes JSON with every floating-point number at 17 significant digits.
inline void write_json(std::ostream& os, const Json& j, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::number_float: {
      const double d = j.get<double>();
      if (!std::isfinite(d)) {
        os << "null";
      } else {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", d);
        os << buf;
      }
      break;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      os << "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ",\n";
        first = false;
        os << pad;
        write_json(os, v, indent + 2);
      }
      os << "\n" << close << "]";
      break;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(k).dump() << ": ";
        write_json(os, v, indent + 2);
      }
      os << "\n" << close << "}";
      break;
    }
    default: os << j.dump(); break;
  }
}

}  // namespace hypscatter::cli
