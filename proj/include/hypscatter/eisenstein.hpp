#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <utility>

#include "hypscatter/errors.hpp"
#include "hypscatter/green.hpp"
#include "hypscatter/halfplane.hpp"
#include "hypscatter/specfun.hpp"

namespace hypscatter {

/// Truncation parameters for Eisenstein series of the modular surface.
struct EisensteinContext {
  /// Number of Fourier modes; zero selects it from the evaluation height so
  /// that the K-Bessel tail e^{-2 pi N y} stays below 1e-12 relative.
  int nterms_fourier = 0;
  /// Radius of the coprime-pair disc of the coset-sum oracle.
  int coset_cmax = 200;
  /// Trapezoidal nodes for the angular tail integral of the coset oracle.
  int tail_nodes = 1024;
};

/// phi(s) = sqrt(pi) Gamma(s - 1/2) zeta(2s - 1) / (Gamma(s) zeta(2s)).
inline cplx scattering_phi(cplx s) {
  if (std::abs(s - 1.0) < kPoleRadius) raise(ErrorKind::NearPole, "scattering_phi has a pole at s = 1");
  const cplx h = s - 0.5;
  if (h.real() <= 0.5 && std::abs(h - std::round(h.real())) < kPoleRadius && std::round(h.real()) <= 0.0) {
    raise(ErrorKind::NearPole, "scattering_phi evaluated at a pole of Gamma(s - 1/2)");
  }
  if (std::abs(s - std::round(s.real())) < kPoleRadius && std::round(s.real()) <= 0.0) {
    raise(ErrorKind::NearPole, "scattering_phi evaluated at a pole of Gamma(s)");
  }
  const cplx z2s = riemann_zeta(2.0 * s);
  if (std::abs(z2s) < kPoleRadius) raise(ErrorKind::NearPole, "scattering_phi evaluated near a zero of zeta(2s)");
  return std::sqrt(kPi) * std::exp(log_gamma(h) - log_gamma(s)) * riemann_zeta(2.0 * s - 1.0) / z2s;
}

namespace detail {

/// sigma_{1-2s}(n) = sum_{d | n} d^{1-2s}.
inline cplx divisor_sigma(int n, cplx e) {
  cplx sum = 0.0;
  for (int d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    sum += std::exp(e * std::log(static_cast<double>(d)));
    const int q = n / d;
    if (q != d) sum += std::exp(e * std::log(static_cast<double>(q)));
  }
  return sum;
}

inline void check_eisenstein_pole(cplx s) {
  if (std::abs(s - 1.0) < kPoleRadius) raise(ErrorKind::PoleOfEisenstein, "Eisenstein series has a pole at s = 1");
}

}  // namespace detail

/// E(z, s) from its Fourier expansion in the cusp,
/// y^s + phi(s) y^{1-s} + (2 pi^s sqrt(y)/(Gamma(s) zeta(2s))) sum_{n>=1} 2 cos(2 pi n x) n^{s-1/2} sigma_{1-2s}(n) K_{s-1/2}(2 pi n y),
/// after reducing z to the fundamental domain.
inline cplx eisenstein_fourier(const HPoint& z, cplx s, const EisensteinContext& ctx = {}) {
  detail::check_eisenstein_pole(s);
  const HPoint w = reduce_to_fundamental_domain(z).first;
  const cplx phi = scattering_phi(s);
  const cplx ls = std::log(w.y);
  cplx value = std::exp(s * ls) + phi * std::exp((1.0 - s) * ls);
  int n_max = ctx.nterms_fourier;
  if (n_max <= 0) n_max = static_cast<int>(std::ceil(40.0 / (2.0 * kPi * w.y))) + static_cast<int>(std::abs(s)) + 5;
  const cplx nu = s - 0.5;
  const cplx e = 1.0 - 2.0 * s;
  const cplx pref = 2.0 * std::exp(s * std::log(kPi) - log_gamma(s)) * std::sqrt(w.y) / riemann_zeta(2.0 * s);
  cplx tail = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const double nn = static_cast<double>(n);
    const cplx coef = std::exp(nu * std::log(nn)) * detail::divisor_sigma(n, e);
    tail += 2.0 * std::cos(2.0 * kPi * nn * w.x) * coef * bessel_k(nu, 2.0 * kPi * nn * w.y);
  }
  return value + pref * tail;
}

/// Independent evaluation E(z, s) = (1/2) sum over coprime (c, d) of y^s/|cz + d|^{2s}
/// on the disc c^2 + d^2 <= C^2, plus the integral approximation of the
/// remainder (density 6/pi^2 of coprime pairs). The tail estimate is the
/// size of that correction scaled by the lattice boundary factor 4/C.
inline SumValue eisenstein_coset_oracle(const HPoint& z, cplx s, const EisensteinContext& ctx = {}) {
  if (!(s.real() > 1.0)) raise(ErrorKind::ConvergenceDomain, "coset sum requires Re s > 1");
  const int C = ctx.coset_cmax;
  const long long C2 = static_cast<long long>(C) * C;
  cplx sum = 0.0;
  for (int c = -C; c <= C; ++c) {
    for (int d = -C; d <= C; ++d) {
      if (static_cast<long long>(c) * c + static_cast<long long>(d) * d > C2) continue;
      if (std::gcd(c, d) != 1) continue;
      const double q = std::norm(cplx(c * z.x + d, c * z.y));
      sum += std::exp(-s * std::log(q));
    }
  }
  const cplx ys = std::exp(s * std::log(z.y));
  cplx angular = 0.0;
  const int M = ctx.tail_nodes;
  for (int k = 0; k < M; ++k) {
    const double th = 2.0 * kPi * k / M;
    const double a = z.y * std::cos(th);
    const double b = z.x * std::cos(th) + std::sin(th);
    angular += std::exp(-s * std::log(a * a + b * b));
  }
  angular *= 2.0 * kPi / M;
  const double cd = static_cast<double>(C);
  const cplx correction = 0.5 * ys * (6.0 / (kPi * kPi)) * std::exp((2.0 - 2.0 * s) * std::log(cd)) /
                          (2.0 * s - 2.0) * angular;
  return {0.5 * ys * sum + correction, std::abs(correction) * 4.0 / cd};
}

/// Coefficients (A, B) of A y^s + B y^{1-s} fitted to the x-average of `field`
/// over one period at the heights y and 1.25 y.
inline std::pair<cplx, cplx> cusp_zero_mode(const std::function<cplx(const HPoint&)>& field, double y, cplx s,
                                            int nx) {
  if (std::abs(s - 0.5) < 1e-3) raise(ErrorKind::IllConditionedFit, "exponents s and 1-s collide near s = 1/2");
  if (nx < 1 || !(y > 0.0)) raise(ErrorKind::DomainError, "cusp_zero_mode needs nx >= 1 and y > 0");
  auto average = [&](double h) {
    cplx acc = 0.0;
    for (int j = 0; j < nx; ++j) acc += field(HPoint(static_cast<double>(j) / nx, h));
    return acc / static_cast<double>(nx);
  };
  const double y2 = 1.25 * y;
  const cplx m1 = average(y);
  const cplx m2 = average(y2);
  const cplx a11 = std::exp(s * std::log(y));
  const cplx a12 = std::exp((1.0 - s) * std::log(y));
  const cplx a21 = std::exp(s * std::log(y2));
  const cplx a22 = std::exp((1.0 - s) * std::log(y2));
  const cplx det = a11 * a22 - a12 * a21;
  return {(m1 * a22 - a12 * m2) / det, (a11 * m2 - a21 * m1) / det};
}

}  // namespace hypscatter
