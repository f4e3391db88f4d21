// Acceptance run: one PASS/FAIL line per criterion, nonzero exit status on any failure.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hypscatter/hypscatter.hpp"
#include "oracles.hpp"

using namespace hypscatter;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

QuadratureSpec tol(double abs_tol) {
  QuadratureSpec q;
  q.abs_tol = abs_tol;
  return q;
}

std::shared_ptr<const OrbitBall> modular_ball(double R) {
  static std::map<double, std::shared_ptr<const OrbitBall>> cache;
  auto& slot = cache[R];
  if (!slot) slot = std::make_shared<OrbitBall>(enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(0.3, 1.3), R));
  return slot;
}

oracle::IntMat as_int(const MoebiusMap& m) {
  return oracle::projective({std::llround(m.a()), std::llround(m.b()), std::llround(m.c()), std::llround(m.d())});
}

Outcome geometry() {
  const double d0 = std::abs(hyp_distance(HPoint(0.0, 1.0), HPoint(0.0, 2.0)) - std::log(2.0));
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  std::uniform_real_distribution<double> uy(0.1, 4.0);
  std::uniform_real_distribution<double> ue(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const HPoint z(ux(rng), uy(rng));
    const HPoint w(ux(rng), uy(rng));
    double a = ue(rng);
    while (std::abs(a) < 0.2) a = ue(rng);
    const double b = ue(rng);
    const double c = ue(rng);
    const MoebiusMap g = MoebiusMap::make(a, b, c, (1.0 + b * c) / a);
    const double d = hyp_distance(z, w);
    worst = std::max(worst, std::abs(hyp_distance(apply_moebius(g, z), apply_moebius(g, w)) - d) / std::max(1.0, d));
  }
  return {d0 <= 1e-12 && worst <= 1e-10, fmt("|d(i,2i)-ln2| = %.1e, isometry defect %.1e over 100 triples", d0, worst)};
}

Outcome free_green_paths() {
  double worst = 0.0;
  for (double s : {1.6, 2.0, 3.0}) {
    for (double d : {0.5, 1.0, 2.0}) {
      const cplx rho = cplx(0.0, -1.0) * (s - 0.5);
      worst = std::max(worst, rel(free_green(s, d), free_green_oracle(rho, d, tol(1e-14))));
    }
  }
  return {worst <= 1e-8, fmt("max relative deviation %.2e on the 3x3 grid", worst)};
}

Outcome regularization_identity() {
  const cplx t = t_root();
  const double d = 1e-4;
  double worst = 0.0;
  for (double s : {1.6, 2.4}) {
    const cplx lhs = free_green(s, d) - free_green(t, d);
    worst = std::max(worst, std::abs(lhs - (psi_scaled(s) - psi_scaled(t))));
  }
  return {worst <= 1e-6, fmt("max |G_s - G_t - (psi(s) - psi(t))| = %.2e at d = 1e-4", worst)};
}

Outcome orbit_completeness() {
  const double x = 0.3;
  const double y = 1.3;
  const double R = 3.0;
  std::set<oracle::IntMat> expected;
  for (const auto& w : oracle::modular_words(12)) {
    const double c = oracle::cosh_displacement(w, x, y);
    if (c - 1.0 > 1e-12 && c <= std::cosh(R)) expected.insert(w);
  }
  const OrbitBall b = enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(x, y), R);
  std::set<oracle::IntMat> got;
  for (const auto& e : b.elements) got.insert(as_int(e.g));
  const bool ok = got == expected && got.size() == b.elements.size();
  return {ok, fmt("BFS %zu elements, depth-12 words %zu elements, sets %s", got.size(), expected.size(),
                  got == expected ? "equal" : "differ")};
}

Outcome eisenstein_oracles() {
  const cplx s(2.3, 0.0);
  double worst_fc = 0.0;
  for (const HPoint& z : {HPoint(0.3, 1.1), HPoint(-0.2, 1.4), HPoint(0.45, 0.95)}) {
    worst_fc = std::max(worst_fc, rel(eisenstein_fourier(z, s), eisenstein_coset_oracle(z, s).value));
  }
  double worst_inv = 0.0;
  for (cplx p : {cplx(0.7, 3.0), cplx(2.3, 0.0), cplx(1.4, -6.5)}) {
    worst_inv = std::max(worst_inv, std::abs(scattering_phi(p) * scattering_phi(1.0 - p) - 1.0));
  }
  double worst_unit = 0.0;
  for (double t : {1.0, 5.0, 10.0}) worst_unit = std::max(worst_unit, std::abs(std::abs(scattering_phi(cplx(0.5, t))) - 1.0));
  return {worst_fc <= 1e-6 && worst_inv <= 1e-9 && worst_unit <= 1e-9,
          fmt("Fourier vs coset %.2e, phi involution %.2e, |phi| on critical line %.2e", worst_fc, worst_inv,
              worst_unit)};
}

Outcome cusp_asymptotics() {
  const auto b = modular_ball(10.0);
  const cplx s(2.3, 0.0);
  const double y = 6.0;
  cplx avg = 0.0;
  for (int j = 0; j < 64; ++j) avg += automorphic_green(*b, s, HPoint(j / 64.0, y), b->base).value;
  avg /= 64.0;
  const cplx expected = eisenstein_fourier(b->base, s) / (1.0 - 2.0 * s) * std::pow(y, 1.0 - s.real());
  const double r = rel(avg, expected);
  return {r <= 1e-4, fmt("relative deviation %.2e (R = 10, 64 samples at y = 6)", r)};
}

Outcome perturbed_pde() {
  const auto b = modular_ball(5.0);
  const Coupling c = coupling_from_alpha(-0.5, regularization_constants(*b, 10.0));
  const cplx s(2.3, 0.0);
  auto f = [&](double x, double y) { return perturbed_eisenstein(HPoint(x, y), s, c, *b); };
  auto residual = [&](const HPoint& z, double h) {
    const cplx c0 = f(z.x, z.y);
    const cplx lap = (f(z.x + h, z.y) + f(z.x - h, z.y) + f(z.x, z.y + h) + f(z.x, z.y - h) - 4.0 * c0) / (h * h);
    return std::abs(z.y * z.y * lap + s * (1.0 - s) * c0);
  };
  std::vector<double> ratios;
  for (const HPoint& z : {HPoint(0.1, 1.6), HPoint(-0.2, 2.2)}) ratios.push_back(residual(z, 0.02) / residual(z, 0.01));
  bool ok = true;
  for (double r : ratios) ok = ok && r >= 3.3 && r <= 4.8;
  return {ok, fmt("residual ratios under step halving %.4f and %.4f", ratios[0], ratios[1])};
}

Outcome perturbed_scattering_consistency() {
  const auto b = modular_ball(12.0);
  const Coupling c = coupling_from_alpha(-0.5, regularization_constants(*b));
  const cplx s(2.3, 0.0);
  const PerturbedScattering ps = perturbed_scattering(s, c, *b);
  const auto [A, B] =
      cusp_zero_mode([&](const HPoint& z) { return perturbed_eisenstein(z, s, c, *b); }, 2.0, s, 64);
  const double r = rel(B, ps.phi_alpha);
  return {r <= 1e-5 && ps.involution_residual <= 1e-8,
          fmt("phi_alpha = %.12f, cusp extraction deviation %.2e, involution residual %.2e", ps.phi_alpha.real(), r,
              ps.involution_residual)};
}

Outcome sphere_trace() {
  const TestFunction h = TestFunction::gaussian(2.0);
  const QuadratureSpec q = tol(1e-12);
  double worst = 0.0;
  double worst_shift = 0.0;
  for (double beta : {0.6 * kPi, -0.6 * kPi}) {
    const double spec = sphere_spectral_side(h, beta, 60).value;
    const double cont = sphere_contour_side(h, beta, 0.25, q).value;
    worst = std::max(worst, std::abs(spec - cont));
    const double a = sphere_contour_side(h, beta, 0.1, q).value;
    const double b = sphere_contour_side(h, beta, 0.3, q).value;
    worst_shift = std::max(worst_shift, std::abs(a - b));
  }
  return {worst <= 1e-6 && worst_shift <= 2.0 * q.abs_tol,
          fmt("|spectral - contour| = %.2e, contour shift %.2e (abs_tol %.0e)", worst, worst_shift, q.abs_tol)};
}

Outcome geometric_expansion() {
  const auto b = modular_ball(8.0);
  const Coupling c = coupling_from_alpha(0.2, *b);
  const TestFunction h = TestFunction::gaussian(2.0);
  const QuadratureSpec q = tol(1e-10);
  const SigmaChoice sc = choose_sigma_tilde(c, *b);
  const int k_max = 20;
  const TraceReport series = geometric_side_series(h, c, *b, k_max, q, sc);
  const DirectSide direct = geometric_side_direct(h, c, *b, q, sc);
  const double r = std::abs(series.total - direct.value) / std::abs(direct.value);
  bool tail_ok = true;
  for (int k : {2, 4, 6}) {
    const double a = geometric_side_series(h, c, *b, k, q, sc).total;
    const double e = geometric_side_series(h, c, *b, k + 2, q, sc).total;
    tail_ok = tail_ok && std::abs(a - e) <= geometric_side_series(h, c, *b, k, q, sc).series_tail_bound;
  }
  return {sc.q_hat <= 0.3 && r <= 1e-6 && tail_ok,
          fmt("beta = %.6f, q = %.4f, sigma = %.1f, series %.15f, direct %.15f, relative %.2e, tail bounds %s", c.beta,
              sc.q_hat, sc.sigma_tilde, series.total, direct.value, r, tail_ok ? "honored" : "violated")};
}

Outcome time_domain() {
  const TestFunction h = TestFunction::gaussian(2.0);
  const QuadratureSpec q = tol(1e-10);
  const auto b = modular_ball(8.0);
  const Coupling c = coupling_from_alpha(0.2, *b);
  const double nodal1 = geometric_side_series(h, c, *b, 2, q).diffractive[0];
  const double r1 = std::abs(diffractive_term_timedomain(h, c, *b, 1, q) - nodal1) / std::abs(nodal1);
  const OrbitBall small = enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(0.0, 2.0), 0.6);
  const Coupling c2 = coupling_from_beta(0.5, regularization_constants(small, 1e9));
  const double nodal2 = geometric_side_series(h, c2, small, 4, q).diffractive[1];
  const double r2 = std::abs(diffractive_term_timedomain(h, c2, small, 2, q) - nodal2) / std::abs(nodal2);
  return {r1 <= 1e-5 && r2 <= 1e-4 && small.elements.size() == 2,
          fmt("k = 1 relative %.2e (R = 8), k = 2 relative %.2e (%zu-element ball)", r1, r2, small.elements.size())};
}

Outcome lowest_eigenvalue() {
  const auto b = modular_ball(8.0);
  const RelZetaRep rep = make_orbit_sum_rep(b, coupling_from_beta(-0.2, regularization_constants(*b)));
  const auto roots = find_real_zeros(rep, 1.5, 1e15);
  if (roots.empty()) return {false, "no real zero found on (1.5, 1e15)"};
  const double s = roots.front().x;
  const double val = std::abs(relzeta_eval(rep, s));
  return {s > 1.0 && val <= 1e-10 && s * (1.0 - s) < 0.0,
          fmt("s* = %.13e, |S(s*)| = %.1e, lambda* = %.3e", s, val, s * (1.0 - s))};
}

Outcome interlacing() {
  int configs = 0;
  int bad = 0;
  // Sphere: poles at w = 0, -1, ..., -6 in the variable w.
  for (double beta : {-8.0, -3.0, -1.0, -0.3, -0.05, 0.05, 0.3, 1.0, 3.0, 8.0}) {
    ++configs;
    const RelZetaRep rep = make_sphere_rep(beta);
    const auto roots = find_real_zeros(rep, -6.5, -1e-7);
    for (int j = -6; j < 0; ++j) {
      int n = 0;
      for (const auto& r : roots) n += (r.x > j && r.x < j + 1);
      // Independent sign count inside the gap.
      int changes = 0;
      double prev = 1.0 + beta * psi_scaled(j + 1e-6).real();
      for (int i = 1; i <= 4000; ++i) {
        const double w = j + 1e-6 + (1.0 - 2e-6) * i / 4000.0;
        const double v = 1.0 + beta * psi_scaled(w).real();
        changes += (v < 0.0) != (prev < 0.0);
        prev = v;
      }
      if (n != 1 || changes != 1) ++bad;
    }
  }
  // Synthetic spectral data: poles at lambda = 0, 2, 5, 9 in the variable lambda.
  for (double alpha : {-4.0, -1.0, -0.3, -0.1, -0.02, 0.02, 0.1, 0.3, 1.0, 4.0}) {
    ++configs;
    SpectralData d;
    for (double l : {0.0, 2.0, 5.0, 9.0}) d.entries.push_back({l, 1.0});
    const RelZetaRep rep = make_spectral_rep(d, alpha);
    const auto roots = find_real_zeros(rep, 1e-4, 9.0 - 1e-4);
    const double poles[] = {0.0, 2.0, 5.0, 9.0};
    for (int g = 0; g < 3; ++g) {
      int n = 0;
      for (const auto& r : roots) n += (r.x > poles[g] && r.x < poles[g + 1]);
      if (n != 1) ++bad;
    }
  }
  return {bad == 0, fmt("%d configurations, %d gaps without exactly one zero", configs, bad)};
}

Outcome zeta_identity() {
  const auto b = modular_ball(8.0);
  const Coupling c = coupling_from_alpha(0.2, *b);
  bool ok = true;
  std::string detail;
  for (int k : {2, 4, 8}) {
    const ZetaIdentityCheck z = zeta_relative_identity_check(3.0, c, *b, k);
    ok = ok && z.residual <= z.envelope;
    detail += fmt("k_max = %d: residual %.2e <= envelope %.2e; ", k, z.residual, z.envelope);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome coupling_dictionary() {
  const RegularizationConstants rc = regularization_constants(*modular_ball(8.0));
  double worst_rt = 0.0;
  double worst_ext = 0.0;
  for (double alpha : {-3.0, -0.5, -1e-3, 1e-3, 0.2, 0.7, 2.5}) {
    const Coupling c = coupling_from_alpha(alpha, rc);
    worst_rt = std::max(worst_rt, std::abs(coupling_from_beta(c.beta, rc).alpha - alpha) / std::abs(alpha));
    const double cot_half = 1.0 / std::tan(0.5 * c.phi);
    worst_ext = std::max(worst_ext, std::abs(cot_half - 2.0 * alpha * rc.a_t_tbar) / std::max(1.0, std::abs(cot_half)));
  }
  return {worst_rt <= 1e-12 && worst_ext <= 1e-10 && rc.re_a_residual <= 1e-9,
          fmt("roundtrip %.1e, extension-angle consistency %.1e, |Re A(t, conj t)| = %.1e", worst_rt, worst_ext,
              rc.re_a_residual)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"geometry", geometry},
      {"free Green's function closed form vs integral representation", free_green_paths},
      {"regularization identity", regularization_identity},
      {"orbit ball completeness", orbit_completeness},
      {"Eisenstein cross-oracle", eisenstein_oracles},
      {"cusp asymptotics of the automorphic Green's function", cusp_asymptotics},
      {"perturbed Eisenstein PDE residual", perturbed_pde},
      {"perturbed scattering consistency", perturbed_scattering_consistency},
      {"sphere trace formula", sphere_trace},
      {"geometric-side expansion", geometric_expansion},
      {"time-domain vs nodal diffractive terms", time_domain},
      {"lowest perturbed eigenvalue", lowest_eigenvalue},
      {"interlacing", interlacing},
      {"perturbed-zeta product identity", zeta_identity},
      {"coupling dictionary", coupling_dictionary},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", index - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
