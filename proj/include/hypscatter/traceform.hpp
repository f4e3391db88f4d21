#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "hypscatter/errors.hpp"
#include "hypscatter/green.hpp"
#include "hypscatter/halfplane.hpp"
#include "hypscatter/quadrature.hpp"
#include "hypscatter/relzeta.hpp"
#include "hypscatter/specfun.hpp"

namespace hypscatter {

/// Even Gaussian test function h(rho) = exp(-rho^2/a^2).
struct TestFunction {
  double a = 1.0;

  static TestFunction gaussian(double width) {
    if (!(width > 0.0)) raise(ErrorKind::DomainError, "test function width must be positive");
    return {width};
  }
};

/// (h(rho), h'(rho)) with h'(rho) = -2 rho/a^2 h(rho).
inline std::pair<cplx, cplx> testfn_eval(const TestFunction& h, cplx rho) {
  const cplx v = std::exp(-rho * rho / (h.a * h.a));
  return {v, -2.0 * rho / (h.a * h.a) * v};
}

namespace detail {

/// Half-width P of the integration window on Im rho = -shift beyond which the
/// Gaussian factor keeps the tail below abs_tol/10 (with headroom for
/// logarithmically growing cofactors).
inline double gaussian_cutoff(const TestFunction& h, double shift, double abs_tol) {
  return std::sqrt(shift * shift + h.a * h.a * std::log(100.0 / abs_tol)) + 1.0;
}

/// Logarithm continuous along a line Re s = const: 1 + m beta psi(s) only
/// meets the real axis at Im s = 0, so the cut is placed on the side it never
/// touches.
inline cplx log_along_line(cplx z, double sign) { return sign > 0.0 ? std::log(z) : std::log(-z); }

/// On Im rho = -nu the Gaussian reaches e^{nu^2/a^2}, and the integral's
/// O(1) value emerges by cancellation; raise once that growth times the
/// rounding unit exceeds abs_tol.
inline void check_line_height(const TestFunction& h, double nu, double abs_tol) {
  const double growth = nu * nu / (h.a * h.a);
  if (growth > std::log(abs_tol / std::numeric_limits<double>::epsilon())) {
    raise(ErrorKind::OutOfComputableRegion,
          "integration line Im rho = -" + std::to_string(nu) + " lies below the zero of 1 + m beta psi, where the " +
              "Gaussian grows like e^" + std::to_string(growth) + " and cancellation exceeds abs_tol");
  }
}

inline double line_sign(double mb, double sigma) {
  const double r0 = 1.0 + mb * psi_scaled(cplx(0.5 + sigma, 0.0)).real();
  return r0 >= 0.0 ? 1.0 : -1.0;
}

}  // namespace detail

/// Height nu of the integration line Im rho = -nu: it passes 0.1 below the
/// zero rho = -i v_beta of 1 + m beta psi(1/2 + i rho) whenever that zero is
/// within 0.1 of the real axis or below it, and is the real axis otherwise.
inline double contour_nu(int m, double beta) {
  const auto v = vbeta_root(m, beta);
  if (v && *v > -0.1) return *v + 0.1;
  return 0.0;
}

/// g_{beta,k}(t) = ((-1)^k/(2 pi i k)) int_{Im rho = -nu} h'(rho) e^{-i rho t}/(1 + m beta psi(1/2 + i rho))^k d rho.
inline cplx g_transform(const TestFunction& h, double beta, int m, int k, double t, const QuadratureSpec& q,
                        std::optional<double> nu_override = std::nullopt) {
  if (beta == 0.0) raise(ErrorKind::ZeroCoupling, "beta must be nonzero");
  if (k < 1) raise(ErrorKind::DomainError, "g_transform needs k >= 1");
  if (!(t > 0.0)) raise(ErrorKind::DomainError, "g_transform needs t > 0");
  const double nu = nu_override.value_or(contour_nu(m, beta));
  const double mb = static_cast<double>(m) * beta;
  detail::check_line_height(h, nu, q.abs_tol);
  const double P = detail::gaussian_cutoff(h, nu, q.abs_tol);
  const cplx i(0.0, 1.0);
  auto f = [&](double x) -> cplx {
    const cplx rho(x, -nu);
    const cplx hp = testfn_eval(h, rho).second;
    const cplx den = 1.0 + mb * psi_scaled(0.5 + i * rho);
    return hp * std::exp(-i * rho * t) / std::pow(den, k);
  };
  QuadratureSpec inner = q;
  inner.abs_tol = q.abs_tol * 2.0 * kPi * k;
  const auto r = integrate(f, -P, P, inner);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * r.value / (2.0 * kPi * i * static_cast<double>(k));
}

struct IdentityTerm {
  /// (1/2 pi) int h m beta psi'/(1 + m beta psi) on Im rho = -nu.
  cplx value;
  /// -(1/2 pi i) int h' log(1 + m beta psi) on the same line.
  cplx log_form;
  double nu = 0.0;
  double error = 0.0;
};

inline IdentityTerm identity_term_on_line(const TestFunction& h, double beta, int m, double nu, const QuadratureSpec& q) {
  const double mb = static_cast<double>(m) * beta;
  detail::check_line_height(h, nu, q.abs_tol);
  const double P = detail::gaussian_cutoff(h, nu, q.abs_tol);
  const double sign = detail::line_sign(mb, nu);
  const cplx i(0.0, 1.0);
  auto f = [&](double x) -> std::vector<cplx> {
    const cplx rho(x, -nu);
    const auto [hv, hp] = testfn_eval(h, rho);
    const cplx s = 0.5 + i * rho;
    const cplx den = 1.0 + mb * psi_scaled(s);
    return {hv * mb * psi_scaled_deriv(s) / den, hp * detail::log_along_line(den, sign)};
  };
  const auto r = integrate_composite<std::vector<cplx>>(f, -P, P, q);
  IdentityTerm out;
  out.value = r.value[0] / (2.0 * kPi);
  out.log_form = -r.value[1] / (2.0 * kPi * i);
  out.nu = nu;
  out.error = r.error;
  return out;
}

/// Identity term of the geometric side on the line Im rho = -nu.
inline IdentityTerm identity_term(const TestFunction& h, double beta, int m, const QuadratureSpec& q) {
  if (beta == 0.0) raise(ErrorKind::ZeroCoupling, "beta must be nonzero");
  return identity_term_on_line(h, beta, m, contour_nu(m, beta), q);
}

struct SigmaChoice {
  double sigma_tilde = 1.0;
  /// Measured sup over the t-grid of |beta J|/|1 + m beta psi| on Re s = 1/2 + sigma_tilde.
  double q_hat = 0.0;
};

/// Smallest sigma in {1, 1.5, 2, ...} (and above the line height nu) at which
/// the measured contraction ratio is at most 1/2.
inline SigmaChoice choose_sigma_tilde(const Coupling& coupling, const OrbitBall& ball, double t_max = 40.0,
                                      int t_points = 161) {
  if (coupling.beta == 0.0) raise(ErrorKind::ZeroCoupling, "beta must be nonzero");
  const int m = ball.stabilizer_order;
  const double mb = static_cast<double>(m) * coupling.beta;
  const double nu = contour_nu(m, coupling.beta);
  if (nu > 50.0) {
    raise(ErrorKind::NoContraction, "the zero of 1 + m beta psi lies at Re s = " + std::to_string(0.5 + nu - 0.1) +
                                        ", beyond the admissible lines Re s <= 50.5");
  }
  double last_q = 0.0;
  for (double sigma = 1.0; sigma <= 50.0; sigma += 0.5) {
    if (sigma < nu) continue;
    double qmax = 0.0;
    if (!ball.elements.empty()) {
      for (int j = 0; j < t_points; ++j) {
        const double t = t_max * j / (t_points - 1);
        const cplx s(0.5 + sigma, t);
        const cplx J = diffractive_green_sum(ball, s).value;
        qmax = std::max(qmax, std::abs(coupling.beta * J) / std::abs(1.0 + mb * psi_scaled(s)));
      }
    }
    last_q = qmax;
    if (qmax <= 0.5) return {sigma, qmax};
  }
  raise(ErrorKind::NoContraction, "no sigma <= 50 gives contraction; last measured q = " + std::to_string(last_q));
}

/// Terms of the geometric side with their error budget. `total` is the exact
/// sum of `identity` and the entries of `diffractive`.
struct TraceReport {
  double identity = 0.0;
  std::vector<double> diffractive;
  std::optional<double> scattering;
  double total = 0.0;
  double quadrature_error = 0.0;
  /// Bound on the omitted k > k_max terms.
  double series_tail_bound = 0.0;
  /// Largest imaginary part over all terms (zero in exact arithmetic).
  double imag_residue = 0.0;
  int k_max = 0;
  double ball_radius = 0.0;
  double sigma_tilde = 0.0;
  double q_hat = 0.0;
  double abs_tol = 0.0;
  /// Independent direct evaluation of the same geometric side, when computed.
  std::optional<double> direct;
  /// |total - direct|.
  std::optional<double> cross_check_residual;
};

/// Identity term plus the diffractive terms
/// ((-beta)^k/k)(1/2 pi i) int h'(rho) J(rho)^k/(1 + m beta psi)^k d rho, k = 1..k_max,
/// on Im rho = -sigma_tilde, with J(rho) the diffractive Green's sum at s = 1/2 + i rho
/// evaluated once per quadrature node.
inline TraceReport geometric_side_series(const TestFunction& h, const Coupling& coupling, const OrbitBall& ball,
                                         int k_max, const QuadratureSpec& q,
                                         std::optional<SigmaChoice> sigma = std::nullopt) {
  if (k_max < 1) raise(ErrorKind::DomainError, "k_max must be at least 1");
  const SigmaChoice sc = sigma ? *sigma : choose_sigma_tilde(coupling, ball);
  if (!(sc.q_hat < 1.0)) raise(ErrorKind::NoContraction, "measured q = " + std::to_string(sc.q_hat));
  const double beta = coupling.beta;
  const double mb = static_cast<double>(ball.stabilizer_order) * beta;
  const double st = sc.sigma_tilde;
  const double P = detail::gaussian_cutoff(h, st, q.abs_tol);
  const cplx i(0.0, 1.0);
  auto f = [&](double x) -> std::vector<cplx> {
    const cplx rho(x, -st);
    const auto [hv, hp] = testfn_eval(h, rho);
    const cplx s = 0.5 + i * rho;
    const cplx den = 1.0 + mb * psi_scaled(s);
    std::vector<cplx> out(static_cast<std::size_t>(k_max) + 1);
    out[0] = hv * mb * psi_scaled_deriv(s) / den / (2.0 * kPi);
    const cplx X = -beta * diffractive_green_sum(ball, s).value / den;
    cplx p = 1.0;
    for (int k = 1; k <= k_max; ++k) {
      p *= X;
      out[static_cast<std::size_t>(k)] = hp * p / static_cast<double>(k) / (2.0 * kPi * i);
    }
    return out;
  };
  const auto r = integrate_composite<std::vector<cplx>>(f, -P, P, q);
  TraceReport rep;
  rep.identity = r.value[0].real();
  rep.imag_residue = std::abs(r.value[0].imag());
  for (int k = 1; k <= k_max; ++k) {
    const cplx v = r.value[static_cast<std::size_t>(k)];
    rep.diffractive.push_back(v.real());
    rep.imag_residue = std::max(rep.imag_residue, std::abs(v.imag()));
  }
  rep.total = rep.identity;
  for (double d : rep.diffractive) rep.total += d;
  rep.quadrature_error = r.error;
  const double k1 = rep.diffractive.empty() ? 0.0 : std::abs(rep.diffractive[0]);
  rep.series_tail_bound = k1 * std::pow(sc.q_hat, k_max) / (1.0 - sc.q_hat);
  rep.k_max = k_max;
  rep.ball_radius = ball.radius;
  rep.sigma_tilde = st;
  rep.q_hat = sc.q_hat;
  rep.abs_tol = q.abs_tol;
  return rep;
}

struct DirectSide {
  double value = 0.0;
  double imag_residue = 0.0;
  double error = 0.0;
  double sigma_tilde = 0.0;
};

/// -(1/2 pi i) int h'(rho) log(beta S(1/2 + i rho)) d rho on Im rho = -sigma_tilde
/// with S from the orbit sum. The logarithm is log(1 + m beta psi) on a
/// branch continuous along the line plus the principal log(beta S/(1 + m beta psi)),
/// whose argument stays within q_hat of 1.
inline DirectSide geometric_side_direct(const TestFunction& h, const Coupling& coupling, const OrbitBall& ball,
                                        const QuadratureSpec& q, std::optional<SigmaChoice> sigma = std::nullopt) {
  const SigmaChoice sc = sigma ? *sigma : choose_sigma_tilde(coupling, ball);
  if (!(sc.q_hat < 1.0)) raise(ErrorKind::NoContraction, "measured q = " + std::to_string(sc.q_hat));
  const std::shared_ptr<const OrbitBall> view(std::shared_ptr<const OrbitBall>{}, &ball);
  const RelZetaRep rep = make_orbit_sum_rep(view, coupling);
  const double beta = coupling.beta;
  const double mb = static_cast<double>(ball.stabilizer_order) * beta;
  const double st = sc.sigma_tilde;
  const double sign = detail::line_sign(mb, st);
  const double P = detail::gaussian_cutoff(h, st, q.abs_tol);
  const cplx i(0.0, 1.0);
  auto f = [&](double x) -> cplx {
    const cplx rho(x, -st);
    const cplx hp = testfn_eval(h, rho).second;
    const cplx s = 0.5 + i * rho;
    const cplx base = 1.0 + mb * psi_scaled(s);
    const cplx bs = beta * relzeta_eval(rep, s);
    return hp * (detail::log_along_line(base, sign) + std::log(bs / base));
  };
  QuadratureSpec inner = q;
  inner.rule = QuadratureRule::GaussLegendreComposite;
  const auto r = integrate(f, -P, P, inner);
  const cplx v = -r.value / (2.0 * kPi * i);
  return {v.real(), std::abs(v.imag()), r.error / (2.0 * kPi), st};
}

namespace detail {

/// Chebyshev interpolant of a smooth function on [lo, hi] (barycentric form).
class ChebInterp {
 public:
  ChebInterp(const std::function<cplx(double)>& f, double lo, double hi, int n) : lo_(lo), hi_(hi) {
    nodes_.resize(static_cast<std::size_t>(n) + 1);
    values_.resize(nodes_.size());
    for (int j = 0; j <= n; ++j) {
      const double c = std::cos(kPi * j / n);
      nodes_[static_cast<std::size_t>(j)] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * c;
      values_[static_cast<std::size_t>(j)] = f(nodes_[static_cast<std::size_t>(j)]);
    }
  }

  cplx operator()(double x) const {
    const std::size_t n = nodes_.size() - 1;
    cplx num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
      const double dx = x - nodes_[j];
      if (dx == 0.0) return values_[j];
      double w = (j % 2 == 0) ? 1.0 : -1.0;
      if (j == 0 || j == n) w *= 0.5;
      num += w / dx * values_[j];
      den += w / dx;
    }
    return num / den;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
  std::vector<double> nodes_;
  std::vector<cplx> values_;
};

/// Weight 2u/sqrt(cosh(l + u^2) - cosh l) of the substitution t = l + u^2.
inline double desingularized_weight(double l, double u) {
  if (u == 0.0) return 2.0 / std::sqrt(std::sinh(l));
  const double u2 = u * u;
  return 2.0 * u / std::sqrt(2.0 * std::sinh(l + 0.5 * u2) * std::sinh(0.5 * u2));
}

}  // namespace detail

/// Literal time-domain form of the k-th diffractive term (k = 1, 2):
/// (-beta/(2 pi sqrt 2))^k sum over k-tuples of ball elements of
/// int...int g_{beta,k}(t_1 + ... + t_k) prod dt_n/sqrt(cosh t_n - cosh l_n).
/// The prefactor carries the normalization of the free Green's function's
/// integral representation, so the result equals the nodal k-th term.
inline double diffractive_term_timedomain(const TestFunction& h, const Coupling& coupling, const OrbitBall& ball,
                                          int k, const QuadratureSpec& q, double tuple_cap = 1e6) {
  if (k != 1 && k != 2) raise(ErrorKind::DomainError, "time-domain form is implemented for k = 1 and k = 2");
  const double beta = coupling.beta;
  const int m = ball.stabilizer_order;
  const double n = static_cast<double>(ball.elements.size());
  if (std::pow(n, k) > tuple_cap) raise(ErrorKind::TupleExplosion, "too many k-tuples for the time-domain form");
  if (ball.elements.empty()) return 0.0;
  const double nu = contour_nu(m, beta);
  const double mb = static_cast<double>(m) * beta;

  // |g_k(t)| <= C(sigma) e^{-sigma t} for every line Im rho = -sigma below the zero of the denominator.
  std::vector<std::pair<double, double>> bounds;
  for (double sigma = nu; sigma <= nu + 20.0; sigma += 0.5) {
    const double P = detail::gaussian_cutoff(h, sigma, 1e-16);
    // Trapezoid sum: the integrand is a smooth Gaussian-dominated bump.
    const int nodes = 4000;
    const double dx = 2.0 * P / nodes;
    double acc = 0.0;
    for (int j = 0; j <= nodes; ++j) {
      const cplx rho(-P + j * dx, -sigma);
      const double v = std::abs(testfn_eval(h, rho).second) /
                       std::pow(std::abs(1.0 + mb * psi_scaled(0.5 + cplx(0.0, 1.0) * rho)), k);
      acc += (j == 0 || j == nodes) ? 0.5 * v : v;
    }
    const double c = 1.1 * acc * dx / (2.0 * kPi * k);
    bounds.emplace_back(sigma, c);
  }
  auto g_bound = [&](double t) {
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [sigma, c] : bounds) b = std::min(b, c * std::exp(-sigma * t));
    return b;
  };
  const double cut_tol = q.abs_tol * 1e-3 / std::pow(n, k);
  double t_hi = k * ball.elements.front().length + 1.0;
  while (g_bound(t_hi) > cut_tol) t_hi += 0.5;
  const double t_lo = k * ball.elements.front().length;

  auto g = [&](double t) { return g_transform(h, beta, m, k, t, q, nu); };
  int npts = 64;
  std::optional<detail::ChebInterp> gi;
  for (;; npts *= 2) {
    gi.emplace(g, t_lo, t_hi, npts);
    double worst = 0.0;
    for (double frac : {0.013, 0.31, 0.577, 0.89}) {
      const double x = t_lo + frac * (t_hi - t_lo);
      worst = std::max(worst, std::abs((*gi)(x) - g(x)));
    }
    if (worst <= q.abs_tol || npts >= 1024) break;
  }
  auto geval = [&](double t) -> cplx { return t >= t_hi ? cplx(0.0) : (*gi)(t); };

  QuadratureSpec tq = q;
  tq.rule = QuadratureRule::GaussLegendreComposite;
  cplx total = 0.0;
  if (k == 1) {
    for (const auto& e : ball.elements) {
      const double l = e.length;
      if (l >= t_hi) break;
      const double U = std::sqrt(t_hi - l);
      auto f = [&](double u) -> cplx { return detail::desingularized_weight(l, u) * geval(l + u * u); };
      total += integrate_composite<cplx>(f, 0.0, U, tq).value;
    }
  } else {
    for (const auto& e1 : ball.elements) {
      for (const auto& e2 : ball.elements) {
        const double l1 = e1.length;
        const double l2 = e2.length;
        if (l1 + l2 >= t_hi) continue;
        const double U1 = std::sqrt(t_hi - l1 - l2);
        auto outer = [&](double u1) -> cplx {
          const double t1 = l1 + u1 * u1;
          const double rem = t_hi - t1 - l2;
          if (rem <= 0.0) return 0.0;
          auto inner = [&](double u2) -> cplx {
            return detail::desingularized_weight(l2, u2) * geval(t1 + l2 + u2 * u2);
          };
          return detail::desingularized_weight(l1, u1) * integrate_composite<cplx>(inner, 0.0, std::sqrt(rem), tq).value;
        };
        total += integrate_composite<cplx>(outer, 0.0, U1, tq).value;
      }
    }
  }
  const double pref = std::pow(-beta / (2.0 * kPi * std::sqrt(2.0)), k);
  return (pref * total).real();
}

namespace detail {

/// 1 + beta psi(w) for real w, written as psi(w + n + 1) - sum_{j<=n} 1/(w + j)
/// so that it stays accurate next to the poles at w = -j.
inline double sphere_real(double beta, double w) {
  double shift = 0.0;
  double x = w;
  while (x < 1.0) {
    shift += 1.0 / x;
    x += 1.0;
  }
  return 1.0 + beta * (digamma(cplx(x, 0.0)).real() - shift) / (2.0 * kPi);
}

inline std::optional<double> sphere_root_in(double beta, double a, double b) {
  auto f = [&](double w) { return sphere_real(beta, w); };
  const double fa = f(a);
  const double fb = f(b);
  if ((fa < 0.0) == (fb < 0.0)) return std::nullopt;
  std::uintmax_t iters = 300;
  const auto br =
      boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (br.first + br.second);
}

}  // namespace detail

struct SphereSpectralSide {
  double value = 0.0;
  double tail_bound = 0.0;
  /// Interlaced zeros in the variable omega = w - 1/2; entry 0 is the zero with w > 0
  /// (absent, i.e. pushed to infinity, when beta is too small and negative).
  std::vector<double> zeros;
  std::vector<double> poles;
};

/// sum_{j=0}^{J} [h(omega_j^alpha) - h(omega_j)] for the sphere, with poles at
/// w = -j and one zero of 1 + beta psi(w) in w > 0 and in each gap (-j-1, -j).
inline SphereSpectralSide sphere_spectral_side(const TestFunction& h, double beta, int J) {
  if (beta == 0.0) raise(ErrorKind::ZeroCoupling, "beta must be nonzero");
  if (J < 0) raise(ErrorKind::DomainError, "J must be nonnegative");
  auto hv = [&](double omega) { return std::exp(-omega * omega / (h.a * h.a)); };
  SphereSpectralSide out;
  const auto v0 = vbeta_root(1, beta);
  double sum = 0.0;
  if (v0) {
    out.zeros.push_back(*v0);
    sum += hv(*v0);
  }
  for (int j = 0; j < J; ++j) {
    const double a = -j - 1.0;
    const double b = -static_cast<double>(j);
    const double eps = 1e-13 * std::max(1.0, std::abs(a));
    const auto w = detail::sphere_root_in(beta, a + eps, b - eps);
    if (!w) raise(ErrorKind::RootMissed, "no zero found between the poles at " + std::to_string(a) + " and " +
                                              std::to_string(b));
    out.zeros.push_back(*w - 0.5);
    sum += hv(*w - 0.5);
  }
  for (int j = 0; j <= J; ++j) {
    const double omega = -j - 0.5;
    out.poles.push_back(omega);
    sum -= hv(omega);
  }
  out.value = sum;
  // Remaining zeros and poles lie below omega = -J - 1/2.
  double tail = 0.0;
  for (int j = J; j < J + 200; ++j) tail += 2.0 * hv(j + 0.5);
  out.tail_bound = tail;
  return out;
}

struct ContourSide {
  double value = 0.0;
  double imag_residue = 0.0;
  double error = 0.0;
};

/// (1/2 pi i) int_{Im omega = -delta} h(omega) d/d omega log[(1 + beta psi(1/2 + omega))(1 + beta psi(1/2 - omega))] d omega.
/// The log-derivative is even-symmetric, so the line below the real axis
/// carries half of the closed contour around the real zeros and poles; the
/// closed contour's 1/(4 pi i) becomes 1/(2 pi i) on a single line.
inline ContourSide sphere_contour_side(const TestFunction& h, double beta, double delta, const QuadratureSpec& q) {
  if (beta == 0.0) raise(ErrorKind::ZeroCoupling, "beta must be nonzero");
  if (!(delta > 0.0 && delta < 0.5)) raise(ErrorKind::DomainError, "sphere contour needs 0 < delta < 1/2");
  const double P = detail::gaussian_cutoff(h, delta, q.abs_tol);
  auto f = [&](double x) -> cplx {
    const cplx omega(x, -delta);
    const cplx hv = testfn_eval(h, omega).first;
    const cplx wp = 0.5 + omega;
    const cplx wm = 0.5 - omega;
    const cplx dlog = beta * psi_scaled_deriv(wp) / (1.0 + beta * psi_scaled(wp)) -
                      beta * psi_scaled_deriv(wm) / (1.0 + beta * psi_scaled(wm));
    return hv * dlog;
  };
  const auto r = integrate(f, -P, P, q);
  const cplx v = r.value / (2.0 * kPi * cplx(0.0, 1.0));
  return {v.real(), std::abs(v.imag()), r.error / (2.0 * kPi)};
}

struct ScatteringTerm {
  double value = 0.0;
  /// Largest |log[S(1/2 - i rho)/S(1/2 + i rho)]| = 2|arg S| met by the quadrature.
  double max_abs_log_ratio = 0.0;
  double error = 0.0;
};

/// (1/4 pi) int h(rho) [phi_alpha'/phi_alpha - phi'/phi](1/2 + i rho) d rho in
/// the integrated-by-parts form -(1/4 pi i) int h'(rho) log[S(1/2 - i rho)/S(1/2 + i rho)] d rho,
/// where on the critical line the log equals -2i arg S(1/2 + i rho).
inline ScatteringTerm scattering_term(const TestFunction& h, const std::function<cplx(double)>& S_line,
                                      const QuadratureSpec& q) {
  const double P = detail::gaussian_cutoff(h, 0.0, q.abs_tol);
  double worst = 0.0;
  auto f = [&](double x) -> cplx {
    const double hp = testfn_eval(h, cplx(x, 0.0)).second.real();
    const double arg = std::arg(S_line(x));
    worst = std::max(worst, 2.0 * std::abs(arg));
    return hp * arg;
  };
  const auto r = integrate(f, -P, P, q);
  // -(1/4 pi i) * (-2i) = 1/(2 pi).
  return {r.value.real() / (2.0 * kPi), worst, r.error / (2.0 * kPi)};
}

/// Scattering term from a relative zeta representation that reaches the
/// critical line; the orbit sum converges only for Re s > 1 and is rejected.
inline ScatteringTerm scattering_term(const TestFunction& h, const RelZetaRep& rep, const QuadratureSpec& q) {
  if (std::holds_alternative<OrbitSumRep>(rep)) {
    raise(ErrorKind::RepresentationUnavailable, "the orbit-sum representation cannot reach the critical line");
  }
  return scattering_term(h, [&](double t) { return relzeta_eval(rep, cplx(0.5, t)); }, q);
}

struct ZetaIdentityCheck {
  double residual = 0.0;
  /// |X|^{k_max+1}/(1 - |X|), X = beta J(s)/(1 + m beta psi(s)).
  double envelope = 0.0;
  double contraction = 0.0;
};

/// |log(beta S(s)) - log(1 + m beta psi(s)) + sum_{k<=k_max} ((-1)^k/k) X^k| at real s.
inline ZetaIdentityCheck zeta_relative_identity_check(double s, const Coupling& coupling, const OrbitBall& ball,
                                                      int k_max) {
  if (!(s > 1.0)) raise(ErrorKind::ConvergenceDomain, "zeta identity check requires s > 1");
  const double beta = coupling.beta;
  if (beta == 0.0) raise(ErrorKind::ZeroCoupling, "beta must be nonzero");
  const double mb = static_cast<double>(ball.stabilizer_order) * beta;
  const cplx base = 1.0 + mb * psi_scaled(cplx(s, 0.0));
  const cplx J = diffractive_green_sum(ball, cplx(s, 0.0)).value;
  const cplx X = beta * J / base;
  const double qx = std::abs(X);
  if (!(qx < 1.0)) raise(ErrorKind::NoContraction, "|beta J/(1 + m beta psi)| = " + std::to_string(qx));
  const cplx bs = base + beta * J;
  cplx acc = std::log(bs / base);
  cplx p = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    p *= -X;
    acc += p / static_cast<double>(k);
  }
  return {std::abs(acc), std::pow(qx, k_max + 1) / (1.0 - qx), qx};
}

}  // namespace hypscatter
