#pragma once

#include <cmath>
#include <complex>

#include "hypscatter/eisenstein.hpp"
#include "hypscatter/errors.hpp"
#include "hypscatter/green.hpp"
#include "hypscatter/halfplane.hpp"
#include "hypscatter/relzeta.hpp"

namespace hypscatter {

namespace detail {

inline cplx checked_relzeta(const OrbitBall& ball, const Coupling& coupling, cplx s) {
  if (!(s.real() > 1.0)) raise(ErrorKind::ConvergenceDomain, "perturbed Eisenstein quantities require Re s > 1");
  if (coupling.beta == 0.0) raise(ErrorKind::ZeroCoupling, "beta must be nonzero");
  const double m = static_cast<double>(ball.stabilizer_order);
  const cplx S = 1.0 / coupling.beta + m * psi_scaled(s) + diffractive_green_sum(ball, s).value;
  if (std::abs(S) < 1e-12) raise(ErrorKind::ZeroOfRelativeZeta, "S(s) vanishes: s is a perturbed eigenvalue");
  return S;
}

}  // namespace detail

/// Coefficient E(z0, s)/S(s) of the automorphic Green's function in the
/// perturbed Eisenstein series.
inline cplx perturbed_eisenstein_coefficient(cplx s, const Coupling& coupling, const OrbitBall& ball,
                                             const EisensteinContext& ctx = {}) {
  const cplx S = detail::checked_relzeta(ball, coupling, s);
  return eisenstein_fourier(ball.base, s, ctx) / S;
}

/// E^alpha(z, s) = E(z, s) - E(z0, s)/S(s) G^Gamma_s(z, z0) for Re s > 1,
/// with the automorphic Green's function summed over the ball around z0.
inline cplx perturbed_eisenstein(const HPoint& z, cplx s, const Coupling& coupling, const OrbitBall& ball,
                                 const EisensteinContext& ctx = {}) {
  const cplx coef = perturbed_eisenstein_coefficient(s, coupling, ball, ctx);
  return eisenstein_fourier(z, s, ctx) - coef * automorphic_green(ball, s, z, ball.base).value;
}

struct PerturbedScattering {
  cplx phi_alpha;
  /// theta(s) = S(1 - s)/S(s).
  cplx theta;
  cplx S_s;
  cplx S_1ms;
  /// phi_alpha(1 - s) = phi(1 - s) S(s)/S(1 - s), with phi(1 - s) evaluated directly.
  cplx phi_alpha_reflected;
  /// |phi_alpha(s) phi_alpha(1 - s) - 1|.
  double involution_residual = 0.0;
};

/// phi_alpha(s) = phi(s) S(1 - s)/S(s) with S(1 - s) from the functional equation.
inline PerturbedScattering perturbed_scattering(cplx s, const Coupling& coupling, const OrbitBall& ball,
                                                const EisensteinContext& ctx = {}) {
  PerturbedScattering r;
  r.S_s = detail::checked_relzeta(ball, coupling, s);
  r.S_1ms = r.S_s - relzeta_fe_correction(ball.base, s, ctx);
  if (std::abs(r.S_1ms) < 1e-12) raise(ErrorKind::ZeroOfRelativeZeta, "S(1 - s) vanishes");
  r.theta = r.S_1ms / r.S_s;
  r.phi_alpha = scattering_phi(s) * r.theta;
  r.phi_alpha_reflected = scattering_phi(1.0 - s) / r.theta;
  r.involution_residual = std::abs(r.phi_alpha * r.phi_alpha_reflected - 1.0);
  return r;
}

}  // namespace hypscatter
