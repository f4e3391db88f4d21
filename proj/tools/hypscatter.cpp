#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cli_support.hpp"
#include "hypscatter/hypscatter.hpp"

namespace hs = hypscatter;
using hs::cli::complex_json;
using hs::cli::Json;
using hs::cli::RunConfig;

namespace {

std::shared_ptr<const hs::OrbitBall> build_ball(const RunConfig& cfg) {
  const double R = cfg.positive("radius");
  hs::OrbitBallOptions opt;
  opt.max_elements = static_cast<std::size_t>(cfg.integer("max_elements", 1));
  const hs::FuchsianGroup g = hs::cli::group_from_config(cfg);
  return std::make_shared<const hs::OrbitBall>(hs::enumerate_orbit_ball(g, cfg.base_point(), R, opt));
}

/// Validates that exactly one of alpha and beta is set.
void require_coupling_keys(const RunConfig& cfg) {
  if (cfg.has("alpha") == cfg.has("beta")) raise(hs::ErrorKind::ConfigError, "set exactly one of alpha and beta");
  if (cfg.has("alpha")) cfg.nonzero("alpha");
  if (cfg.has("beta")) cfg.nonzero("beta");
}

hs::Coupling build_coupling(const RunConfig& cfg, const hs::OrbitBall& ball) {
  const auto rc = hs::regularization_constants(ball, cfg.positive("rc_tail_tol"));
  if (cfg.has("alpha")) return hs::coupling_from_alpha(cfg.nonzero("alpha"), rc);
  return hs::coupling_from_beta(cfg.nonzero("beta"), rc);
}

Json coupling_json(const hs::Coupling& c) {
  return Json{{"alpha", c.alpha}, {"beta", c.beta}, {"phi", c.phi}, {"c_of_t", c.c_of_t}, {"a_t_tbar", c.a_t_tbar}};
}

Json ball_json(const hs::OrbitBall& b) {
  Json j{{"radius", b.radius},
         {"count", b.elements.size()},
         {"stabilizer_order", b.stabilizer_order},
         {"completeness_margin", b.completeness_margin}};
  j["min_length"] = b.elements.empty() ? Json(nullptr) : Json(b.elements.front().length);
  j["max_length"] = b.elements.empty() ? Json(nullptr) : Json(b.elements.back().length);
  return j;
}

hs::cplx spectral_parameter(const RunConfig& cfg) { return {cfg.real("s_re"), cfg.real("s_im")}; }

Json cmd_orbit_ball(const RunConfig& cfg) {
  const auto ball = build_ball(cfg);
  const std::string path = cfg.str("csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(hs::ErrorKind::ConfigError, "csv: cannot open '" + path + "' for writing");
  hs::write_orbit_ball_csv(out, *ball);
  Json r = ball_json(*ball);
  r["csv"] = path;
  return r;
}

struct RepBundle {
  hs::RelZetaRep rep;
  std::string name;
  Json info;
};

RepBundle build_rep(const RunConfig& cfg) {
  const std::string kind = cfg.str("representation");
  if (kind == "sphere") {
    return {hs::make_sphere_rep(cfg.nonzero("beta")), "sphere", Json::object()};
  }
  if (kind == "spectral") {
    if (!cfg.has("spectral_file")) raise(hs::ErrorKind::ConfigError, "spectral_file is required for spectral data");
    std::ifstream in(cfg.str("spectral_file"));
    if (!in) raise(hs::ErrorKind::ConfigError, "spectral_file: cannot open '" + cfg.str("spectral_file") + "'");
    auto data = hs::read_spectral_data_csv(in, cfg.str("spectral_file"));
    Json info{{"entries", data.entries.size()}};
    return {hs::make_spectral_rep(std::move(data), cfg.nonzero("alpha")), "spectral", info};
  }
  if (kind == "orbit") {
    require_coupling_keys(cfg);
    const auto ball = build_ball(cfg);
    const hs::Coupling c = build_coupling(cfg, *ball);
    Json info{{"ball", ball_json(*ball)}, {"coupling", coupling_json(c)}};
    return {hs::make_orbit_sum_rep(ball, c), "orbit", info};
  }
  raise(hs::ErrorKind::ConfigError, "representation must be orbit, spectral or sphere");
}

Json cmd_relzeta_eval(const RunConfig& cfg) {
  const hs::cplx s = spectral_parameter(cfg);
  RepBundle b = build_rep(cfg);
  const hs::SumValue v = hs::relzeta_eval_detailed(b.rep, s);
  Json r{{"representation", b.name}, {"representation_info", b.info}, {"s", complex_json(s)},
         {"value", complex_json(v.value)}, {"tail_estimate", v.tail_estimate}};
  if (s.imag() == 0.0) r["im_residue"] = std::abs(v.value.imag());
  try {
    r["classification"] = hs::to_string(hs::classify_point(b.rep, s));
  } catch (const hs::Error& e) {
    if (e.kind() != hs::ErrorKind::OutOfComputableRegion) throw;
    r["classification"] = nullptr;
  }
  return r;
}

Json cmd_relzeta_roots(const RunConfig& cfg) {
  const double lo = cfg.real("lo");
  const double hi = cfg.real("hi");
  if (!(lo < hi)) raise(hs::ErrorKind::ConfigError, "lo must be below hi");
  RepBundle b = build_rep(cfg);
  const char* variable = b.name == "orbit" ? "s" : (b.name == "spectral" ? "lambda" : "w");
  const auto roots = hs::find_real_zeros(b.rep, lo, hi);
  Json list = Json::array();
  for (const auto& rt : roots) {
    hs::cplx s;
    if (b.name == "spectral") {
      s = hs::SpectralPoint::from_lambda(rt.x).s();
    } else {
      s = rt.x;
    }
    Json e{{"x", rt.x}, {"residual", rt.residual}};
    if (b.name == "orbit") e["lambda"] = rt.x * (1.0 - rt.x);
    e["classification"] = hs::to_string(hs::classify_point(b.rep, s));
    list.push_back(e);
  }
  return Json{{"representation", b.name}, {"representation_info", b.info}, {"variable", variable},
              {"interval", Json::array({lo, hi})}, {"roots", list}};
}

hs::TestFunction test_function(const RunConfig& cfg) { return hs::TestFunction::gaussian(cfg.positive("width")); }

Json cmd_trace_sphere(const RunConfig& cfg) {
  const double beta = cfg.nonzero("beta");
  const auto J = cfg.integer("J", 0);
  const double delta = cfg.positive("delta");
  const double delta_alt = cfg.positive("delta_alt");
  if (!(delta < 0.5)) raise(hs::ErrorKind::ConfigError, "delta must lie in (0, 1/2)");
  if (!(delta_alt < 0.5)) raise(hs::ErrorKind::ConfigError, "delta_alt must lie in (0, 1/2)");
  const auto q = cfg.quadrature();
  const auto h = test_function(cfg);
  const auto spec = hs::sphere_spectral_side(h, beta, static_cast<int>(J));
  const auto c1 = hs::sphere_contour_side(h, beta, delta, q);
  const auto c2 = hs::sphere_contour_side(h, beta, delta_alt, q);
  return Json{{"spectral_side", spec.value},
              {"spectral_tail_bound", spec.tail_bound},
              {"contour_side", c1.value},
              {"contour_error", c1.error},
              {"contour_imag_residue", c1.imag_residue},
              {"difference", std::abs(spec.value - c1.value)},
              {"contour_side_alt", c2.value},
              {"contour_shift_residual", std::abs(c1.value - c2.value)},
              {"zeros_omega", spec.zeros},
              {"J", J},
              {"delta", delta},
              {"delta_alt", delta_alt},
              {"abs_tol", q.abs_tol}};
}

Json report_json(const hs::TraceReport& r) {
  Json j{{"identity", r.identity},
         {"diffractive", r.diffractive},
         {"scattering", r.scattering ? Json(*r.scattering) : Json(nullptr)},
         {"total", r.total},
         {"quadrature_error", r.quadrature_error},
         {"series_tail_bound", r.series_tail_bound},
         {"imag_residue", r.imag_residue},
         {"k_max", r.k_max},
         {"ball_radius", r.ball_radius},
         {"sigma_tilde", r.sigma_tilde},
         {"q_hat", r.q_hat},
         {"abs_tol", r.abs_tol}};
  j["direct"] = r.direct ? Json(*r.direct) : Json(nullptr);
  j["cross_check_residual"] = r.cross_check_residual ? Json(*r.cross_check_residual) : Json(nullptr);
  return j;
}

Json cmd_trace_geometric(const RunConfig& cfg) {
  require_coupling_keys(cfg);
  const auto q = cfg.quadrature();
  const auto h = test_function(cfg);
  const int k_max = static_cast<int>(cfg.integer("k_max", 1));
  const auto ball = build_ball(cfg);
  const hs::Coupling c = build_coupling(cfg, *ball);
  const hs::SigmaChoice sc = hs::choose_sigma_tilde(c, *ball);
  hs::TraceReport rep = hs::geometric_side_series(h, c, *ball, k_max, q, sc);
  const hs::DirectSide d = hs::geometric_side_direct(h, c, *ball, q, sc);
  rep.direct = d.value;
  rep.cross_check_residual = std::abs(rep.total - d.value);
  Json j{{"report", report_json(rep)},
         {"direct_error", d.error},
         {"combined_error", rep.quadrature_error + d.error + rep.series_tail_bound},
         {"coupling", coupling_json(c)},
         {"ball", ball_json(*ball)}};
  return j;
}

Json cmd_trace_zeta_identity(const RunConfig& cfg) {
  require_coupling_keys(cfg);
  const double s = cfg.real("s_re");
  const int k_max = static_cast<int>(cfg.integer("k_max", 1));
  const auto ball = build_ball(cfg);
  const hs::Coupling c = build_coupling(cfg, *ball);
  const auto chk = hs::zeta_relative_identity_check(s, c, *ball, k_max);
  return Json{{"s", s},
              {"k_max", k_max},
              {"residual", chk.residual},
              {"envelope", chk.envelope},
              {"contraction", chk.contraction},
              {"below_envelope", chk.residual <= chk.envelope},
              {"coupling", coupling_json(c)},
              {"ball", ball_json(*ball)}};
}

Json cmd_eisenstein_eval(const RunConfig& cfg) {
  const hs::HPoint z = cfg.point("x", "y");
  const hs::cplx s = spectral_parameter(cfg);
  const hs::cplx e = hs::eisenstein_fourier(z, s);
  return Json{{"z", complex_json(z.z())}, {"s", complex_json(s)}, {"value", complex_json(e)},
              {"phi", complex_json(hs::scattering_phi(s))}};
}

Json cmd_eisenstein_check(const RunConfig& cfg) {
  const hs::HPoint z = cfg.point("x", "y");
  const hs::cplx s = spectral_parameter(cfg);
  const hs::cplx f = hs::eisenstein_fourier(z, s);
  const hs::SumValue c = hs::eisenstein_coset_oracle(z, s);
  const hs::cplx phi = hs::scattering_phi(s);
  Json unitarity = Json::array();
  for (double t : {1.0, 5.0, 10.0}) {
    unitarity.push_back(Json{{"t", t}, {"residual", std::abs(std::abs(hs::scattering_phi(hs::cplx(0.5, t))) - 1.0)}});
  }
  return Json{{"z", complex_json(z.z())},
              {"s", complex_json(s)},
              {"fourier", complex_json(f)},
              {"coset", complex_json(c.value)},
              {"coset_tail_estimate", c.tail_estimate},
              {"relative_error", std::abs(f - c.value) / std::abs(f)},
              {"phi", complex_json(phi)},
              {"phi_involution_residual", std::abs(phi * hs::scattering_phi(1.0 - s) - 1.0)},
              {"unitarity", unitarity}};
}

Json cmd_eisenstein_perturbed(const RunConfig& cfg) {
  require_coupling_keys(cfg);
  const hs::HPoint z = cfg.point("x", "y");
  const hs::cplx s = spectral_parameter(cfg);
  const auto ball = build_ball(cfg);
  const hs::Coupling c = build_coupling(cfg, *ball);
  const auto ps = hs::perturbed_scattering(s, c, *ball);
  const hs::cplx ea = hs::perturbed_eisenstein(z, s, c, *ball);
  return Json{{"z", complex_json(z.z())},
              {"s", complex_json(s)},
              {"perturbed_eisenstein", complex_json(ea)},
              {"phi", complex_json(hs::scattering_phi(s))},
              {"phi_alpha", complex_json(ps.phi_alpha)},
              {"theta", complex_json(ps.theta)},
              {"S_s", complex_json(ps.S_s)},
              {"S_1ms", complex_json(ps.S_1ms)},
              {"involution_residual", ps.involution_residual},
              {"coupling", coupling_json(c)},
              {"ball", ball_json(*ball)}};
}

void emit(const RunConfig& cfg, const Json& doc) {
  std::ostringstream os;
  hs::cli::write_json(os, doc);
  os << "\n";
  if (cfg.has("output")) {
    std::ofstream out(cfg.str("output"), std::ios::binary);
    if (!out) {
      std::cerr << "cannot write output file '" << cfg.str("output") << "'\n";
      std::cout << os.str();
      return;
    }
    out << os.str();
  } else {
    std::cout << os.str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point scatterers on hyperbolic surfaces: orbit balls, relative zeta functions, trace formulas"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hs::kVersion));

  std::string config_file;
  app.add_option("--config", config_file, "key=value configuration file ('#' starts a comment)");
  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> override_opts;
  for (const auto& spec : hs::cli::config_keys()) {
    std::string help = spec.help;
    if (spec.default_value[0] != '\0') help += " [default: " + std::string(spec.default_value) + "]";
    override_opts[spec.name] = app.add_option(std::string("--") + spec.name, overrides[spec.name], help);
  }

  auto* orbit = app.add_subcommand("orbit-ball", "enumerate the orbit ball and write it as CSV");
  auto* relzeta = app.add_subcommand("relzeta", "evaluate the relative zeta function or find its real zeros");
  auto* rz_eval = relzeta->add_subcommand("eval", "value and classification at s");
  auto* rz_roots = relzeta->add_subcommand("roots", "real zeros on [lo, hi]");
  auto* trace = app.add_subcommand("trace", "trace-formula sides");
  auto* tr_sphere = trace->add_subcommand("sphere", "sphere trace formula: spectral vs contour side");
  auto* tr_geom = trace->add_subcommand("geometric", "geometric side: series vs direct");
  auto* tr_zeta = trace->add_subcommand("zeta-identity", "perturbed zeta product identity at real s");
  auto* eis = app.add_subcommand("eisenstein", "Eisenstein series of the modular surface");
  auto* e_eval = eis->add_subcommand("eval", "E(z, s) from the Fourier expansion");
  auto* e_check = eis->add_subcommand("check", "Fourier vs coset sum and scattering-coefficient identities");
  auto* e_pert = eis->add_subcommand("perturbed", "perturbed Eisenstein series and scattering coefficient");
  for (auto* sc : {orbit, relzeta, rz_eval, rz_roots, trace, tr_sphere, tr_geom, tr_zeta, eis, e_eval, e_check, e_pert}) {
    sc->fallthrough();
  }
  for (auto* sc : {relzeta, trace, eis}) sc->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string command;
  for (const auto* sc : app.get_subcommands()) {
    command = sc->get_name();
    for (const auto* sub : sc->get_subcommands()) command += " " + sub->get_name();
  }

  RunConfig cfg;
  Json doc{{"command", command}, {"config", nullptr}, {"results", nullptr}, {"errors", Json::array()},
           {"version", hs::kVersion}};
  int status = 0;
  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) raise(hs::ErrorKind::ConfigError, "config: cannot open '" + config_file + "'");
      cfg.merge(hs::cli::parse_config(in));
    }
    std::map<std::string, std::string> set;
    for (const auto& [k, opt] : override_opts) {
      if (opt->count() > 0) set[k] = overrides[k];
    }
    cfg.merge(set);
    doc["config"] = cfg.to_json();
    cfg.quadrature();

    Json results;
    if (orbit->parsed()) {
      results = cmd_orbit_ball(cfg);
    } else if (rz_eval->parsed()) {
      results = cmd_relzeta_eval(cfg);
    } else if (rz_roots->parsed()) {
      results = cmd_relzeta_roots(cfg);
    } else if (tr_sphere->parsed()) {
      results = cmd_trace_sphere(cfg);
    } else if (tr_geom->parsed()) {
      results = cmd_trace_geometric(cfg);
    } else if (tr_zeta->parsed()) {
      results = cmd_trace_zeta_identity(cfg);
    } else if (e_eval->parsed()) {
      results = cmd_eisenstein_eval(cfg);
    } else if (e_check->parsed()) {
      results = cmd_eisenstein_check(cfg);
    } else if (e_pert->parsed()) {
      results = cmd_eisenstein_perturbed(cfg);
    }
    doc["results"] = results;
  } catch (const hs::Error& e) {
    doc["errors"].push_back(Json{{"kind", std::string(hs::to_string(e.kind()))}, {"message", e.what()}});
    std::cerr << e.what() << "\n";
    status = hs::cli::exit_code(e.kind());
  } catch (const std::exception& e) {
    doc["errors"].push_back(Json{{"kind", "Internal"}, {"message", e.what()}});
    std::cerr << e.what() << "\n";
    status = 1;
  }
  emit(cfg, doc);
  return status;
}
