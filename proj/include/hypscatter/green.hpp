#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "hypscatter/errors.hpp"
#include "hypscatter/halfplane.hpp"
#include "hypscatter/specfun.hpp"

namespace hypscatter {

/// A value together with a bound on the omitted part of an infinite sum.
struct SumValue {
  cplx value;
  double tail_estimate = 0.0;
};

/// Root t of t(1 - t) = i with Re t > 1/2.
inline cplx t_root() {
  const cplx disc = std::sqrt(cplx(1.0, -4.0));
  const cplx t1 = 0.5 * (1.0 + disc);
  return t1.real() > 0.5 ? t1 : 0.5 * (1.0 - disc);
}

namespace detail {

/// Orbit-count constant A with #{gamma : l_gamma <= l} <= A e^l, fitted on the
/// outer half of the ball where the exponential growth has set in.
inline double orbit_count_constant(const OrbitBall& ball) {
  double a = 1.0;
  const double m = static_cast<double>(ball.stabilizer_order);
  std::size_t n = 0;
  for (const auto& e : ball.elements) {
    ++n;
    if (e.length >= 0.5 * ball.radius) a = std::max(a, 2.0 * (static_cast<double>(n) + m) * std::exp(-e.length));
  }
  return a;
}

/// Bound on sum over gamma with l_gamma > R of |G_s(l_gamma - shift)|, using
/// |G_s(d)| <= |c_s| e^{-Re(s) d} / sqrt(1 - e^{-2d}) and the fitted count.
inline double green_tail(const OrbitBall& ball, const FreeGreen& g, double shift) {
  const double sigma = g.s().real();
  const double r = ball.radius;
  const double a = orbit_count_constant(ball);
  const double reff = std::max(r - shift, 0.1);
  return a * std::abs(g.prefactor()) * std::exp(sigma * shift + (1.0 - sigma) * r) /
         ((sigma - 1.0) * std::sqrt(-std::expm1(-2.0 * reff)));
}

inline void require_convergent(cplx s, const char* who) {
  if (!(s.real() > 1.0)) raise(ErrorKind::ConvergenceDomain, std::string(who) + " requires Re s > 1");
}

}  // namespace detail

/// Automorphic Green's function sum_gamma G_s(d(z, gamma w)) over the ball
/// elements and the stabilizer. The ball must be centred at w; if it is
/// centred at z instead the arguments are swapped (the kernel is symmetric).
inline SumValue automorphic_green(const OrbitBall& ball, cplx s, const HPoint& z, const HPoint& w) {
  detail::require_convergent(s, "automorphic_green");
  HPoint zz = z;
  HPoint ww = w;
  if (hyp_distance(ball.base, ww) > 1e-12) {
    if (hyp_distance(ball.base, zz) > 1e-12) {
      raise(ErrorKind::DomainError, "automorphic_green needs the ball centred at one of its arguments");
    }
    std::swap(zz, ww);
  }
  const FreeGreen g(s);
  cplx sum = 0.0;
  auto add = [&](const MoebiusMap& m) {
    const double d = hyp_distance(zz, apply_moebius(m, ww));
    if (d < 1e-8) raise(ErrorKind::SingularPair, "automorphic_green evaluated at an orbit point of the base");
    sum += g(d);
  };
  for (const auto& m : ball.stabilizer) add(m);
  for (const auto& e : ball.elements) add(e.g);
  return {sum, detail::green_tail(ball, g, hyp_distance(zz, ww))};
}

/// sum over gamma outside the stabilizer of G_s(l_gamma).
inline SumValue diffractive_green_sum(const OrbitBall& ball, cplx s) {
  detail::require_convergent(s, "diffractive_green_sum");
  const FreeGreen g(s);
  cplx sum = 0.0;
  const std::size_t n = ball.elements.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double l = ball.elements[i].length;
    // Lengths are sorted, so the envelope at l bounds every remaining term.
    if (i % 64 == 0 && i > 0 && static_cast<double>(n - i) * g.envelope(l) <= 1e-17 * std::abs(sum)) break;
    sum += g(l);
  }
  return {sum, detail::green_tail(ball, g, 0.0)};
}

struct RegularizationConstants {
  cplx t;
  /// c(t) = Re K(t), K(s) = m psi(s) + sum_gamma G_s(l_gamma).
  double c_of_t = 0.0;
  /// A(t, conj t) = (K(t) - K(conj t))/2 = i * a_t_tbar.
  double a_t_tbar = 0.0;
  /// |Re A(t, conj t)|, zero up to rounding.
  double re_a_residual = 0.0;
  double tail_estimate = 0.0;
  int stabilizer_order = 1;
};

/// Regularization constants of the ball's base point. `tail_tolerance` bounds
/// the accepted tail estimate of the t-sum.
inline RegularizationConstants regularization_constants(const OrbitBall& ball, double tail_tolerance = 1.0) {
  const cplx t = t_root();
  const double m = static_cast<double>(ball.stabilizer_order);
  const SumValue dt = diffractive_green_sum(ball, t);
  const SumValue dtb = diffractive_green_sum(ball, std::conj(t));
  const cplx k_t = m * psi_scaled(t) + dt.value;
  const cplx k_tb = m * psi_scaled(std::conj(t)) + dtb.value;
  const cplx a = 0.5 * (k_t - k_tb);
  RegularizationConstants rc;
  rc.t = t;
  rc.c_of_t = k_t.real();
  rc.a_t_tbar = a.imag();
  rc.re_a_residual = std::abs(a.real());
  rc.tail_estimate = dt.tail_estimate;
  rc.stabilizer_order = ball.stabilizer_order;
  if (rc.re_a_residual > 1e-9) {
    raise(ErrorKind::DomainError, "A(t, conj t) is not purely imaginary (real part " +
                                      std::to_string(rc.re_a_residual) + ")");
  }
  if (rc.tail_estimate > tail_tolerance) {
    raise(ErrorKind::InsufficientRadius, "t-sum tail estimate " + std::to_string(rc.tail_estimate) +
                                             " exceeds tolerance " + std::to_string(tail_tolerance));
  }
  return rc;
}

/// The three parametrizations of the coupling: alpha (physical strength),
/// phi (extension angle) and beta = alpha/(1 - alpha c(t)).
struct Coupling {
  double alpha = 0.0;
  double beta = 0.0;
  double phi = 0.0;
  double c_of_t = 0.0;
  double a_t_tbar = 0.0;
};

namespace detail {

inline double extension_angle(double alpha, double a_t_tbar) {
  // cot(phi/2) = -2 i alpha A(t, conj t) = 2 alpha a_t_tbar.
  return 2.0 * std::atan(1.0 / (2.0 * alpha * a_t_tbar));
}

}  // namespace detail

inline Coupling coupling_from_alpha(double alpha, const RegularizationConstants& rc) {
  if (alpha == 0.0) raise(ErrorKind::ZeroCoupling, "alpha must be nonzero");
  const double den = 1.0 - alpha * rc.c_of_t;
  if (std::abs(den) < 1e-12) raise(ErrorKind::SingularReparametrization, "1 - alpha c(t) vanishes");
  return {alpha, alpha / den, detail::extension_angle(alpha, rc.a_t_tbar), rc.c_of_t, rc.a_t_tbar};
}

inline Coupling coupling_from_alpha(double alpha, const OrbitBall& ball) {
  return coupling_from_alpha(alpha, regularization_constants(ball));
}

/// Inverse reparametrization alpha = beta/(1 + beta c(t)).
inline Coupling coupling_from_beta(double beta, const RegularizationConstants& rc) {
  if (beta == 0.0) raise(ErrorKind::ZeroCoupling, "beta must be nonzero");
  const double den = 1.0 + beta * rc.c_of_t;
  if (std::abs(den) < 1e-12) raise(ErrorKind::SingularReparametrization, "1 + beta c(t) vanishes");
  const double alpha = beta / den;
  return {alpha, beta, detail::extension_angle(alpha, rc.a_t_tbar), rc.c_of_t, rc.a_t_tbar};
}

}  // namespace hypscatter
