#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "hypscatter/errors.hpp"
#include "hypscatter/quadrature.hpp"

namespace hypscatter {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kEulerGamma = std::numbers::egamma;

/// Exclusion radius around poles of the special functions.
inline constexpr double kPoleRadius = 1e-8;

namespace detail {

inline void check_gamma_pole(cplx s, const char* who) {
  if (s.real() <= 0.5) {
    const double n = std::round(s.real());
    if (n <= 0.0 && std::abs(s - cplx(n, 0.0)) < kPoleRadius) {
      raise(ErrorKind::PoleAtNonpositiveInteger,
            std::string(who) + " evaluated within 1e-8 of the pole at " + std::to_string(static_cast<long>(n)));
    }
  }
}

/// log sin(pi s), evaluated so that neither large imaginary parts overflow nor
/// the result loses conjugate symmetry.
inline cplx log_sin_pi(cplx s) {
  if (s.imag() < 0.0) return std::conj(log_sin_pi(std::conj(s)));
  const cplx z = kPi * s;
  if (s.imag() < 5.0) return std::log(std::sin(z));
  // sin z = e^{-iz} (e^{2iz} - 1) / (2i) with |e^{2iz}| < 1 for Im z > 0.
  const cplx i(0.0, 1.0);
  const cplx v = -i * z + std::log(std::exp(2.0 * i * z) - 1.0) - std::log(2.0 * i);
  return {v.real(), std::remainder(v.imag(), 2.0 * kPi)};
}

inline constexpr double kShiftRadius = 15.0;

inline int shift_count(cplx s) {
  int n = 0;
  while (std::abs(s + static_cast<double>(n)) < kShiftRadius) ++n;
  return n;
}

}  // namespace detail

/// Analytic continuation of log Gamma from the positive real axis.
inline cplx log_gamma(cplx s) {
  detail::check_gamma_pole(s, "log_gamma");
  if (s.real() < 0.5) {
    // The 2 pi i multiple keeps the result continuous away from the negative real axis.
    const double branch = std::copysign(2.0 * kPi, s.imag()) * std::floor(0.5 * s.real() + 0.25);
    return std::log(kPi) - detail::log_sin_pi(s) - log_gamma(1.0 - s) + cplx(0.0, branch);
  }
  const int n = detail::shift_count(s);
  cplx shift_sum = 0.0;
  for (int k = 0; k < n; ++k) shift_sum += std::log(s + static_cast<double>(k));
  const cplx z = s + static_cast<double>(n);
  static constexpr std::array<double, 8> c = {1.0 / 12.0,    -1.0 / 360.0,        1.0 / 1260.0, -1.0 / 1680.0,
                                              1.0 / 1188.0,  -691.0 / 360360.0,   1.0 / 156.0,  -3617.0 / 122400.0};
  const cplx zi = 1.0 / z;
  const cplx zi2 = zi * zi;
  cplx series = 0.0;
  cplx p = zi;
  for (double ck : c) {
    series += ck * p;
    p *= zi2;
  }
  const cplx stirling = (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi) + series;
  return stirling - shift_sum;
}

inline cplx gamma_fn(cplx s) { return std::exp(log_gamma(s)); }

/// Standard digamma function Gamma'/Gamma.
inline cplx digamma(cplx s) {
  detail::check_gamma_pole(s, "digamma");
  if (s.real() < 0.5) {
    return digamma(1.0 - s) - kPi / std::tan(kPi * s);
  }
  const int n = detail::shift_count(s);
  cplx shift_sum = 0.0;
  for (int k = 0; k < n; ++k) shift_sum += 1.0 / (s + static_cast<double>(k));
  const cplx z = s + static_cast<double>(n);
  static constexpr std::array<double, 7> c = {1.0 / 12.0,  -1.0 / 120.0, 1.0 / 252.0,         -1.0 / 240.0,
                                              1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0};
  const cplx zi2 = 1.0 / (z * z);
  cplx series = 0.0;
  cplx p = zi2;
  for (double ck : c) {
    series += ck * p;
    p *= zi2;
  }
  return std::log(z) - 0.5 / z - series - shift_sum;
}

/// Standard trigamma function, the derivative of digamma.
inline cplx trigamma(cplx s) {
  detail::check_gamma_pole(s, "trigamma");
  if (s.real() < 0.5) {
    const cplx sn = std::sin(kPi * s);
    return kPi * kPi / (sn * sn) - trigamma(1.0 - s);
  }
  const int n = detail::shift_count(s);
  cplx shift_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const cplx u = s + static_cast<double>(k);
    shift_sum += 1.0 / (u * u);
  }
  const cplx z = s + static_cast<double>(n);
  static constexpr std::array<double, 7> c = {1.0 / 6.0,  -1.0 / 30.0,    1.0 / 42.0, -1.0 / 30.0,
                                              5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0};
  const cplx zi = 1.0 / z;
  const cplx zi2 = zi * zi;
  cplx series = 0.0;
  cplx p = zi2 * zi;
  for (double ck : c) {
    series += ck * p;
    p *= zi2;
  }
  return zi + 0.5 * zi2 + series + shift_sum;
}

/// The digamma function carrying the factor 1/(2 pi) used throughout the theory.
inline cplx psi_scaled(cplx s) { return digamma(s) / (2.0 * kPi); }

/// Derivative of psi_scaled, i.e. trigamma/(2 pi).
inline cplx psi_scaled_deriv(cplx s) { return trigamma(s) / (2.0 * kPi); }

/// Riemann zeta function by Euler-Maclaurin summation.
inline cplx riemann_zeta(cplx s) {
  if (std::abs(s - 1.0) < kPoleRadius) raise(ErrorKind::PoleAtOne, "riemann_zeta evaluated within 1e-8 of s=1");
  if (s.real() < -1.0) {
    // zeta(s) = 2^s pi^{s-1} sin(pi s/2) Gamma(1-s) zeta(1-s).
    const cplx lg = s * std::log(2.0) + (s - 1.0) * std::log(kPi) + log_gamma(1.0 - s);
    return std::exp(lg) * std::sin(0.5 * kPi * s) * riemann_zeta(1.0 - s);
  }
  static constexpr std::array<double, 15> bern = {
      1.0 / 6.0,          -1.0 / 30.0,        1.0 / 42.0,          -1.0 / 30.0,          5.0 / 66.0,
      -691.0 / 2730.0,    7.0 / 6.0,          -3617.0 / 510.0,     43867.0 / 798.0,      -174611.0 / 330.0,
      854513.0 / 138.0,   -236364091.0 / 2730.0, 8553103.0 / 6.0, -23749461029.0 / 870.0, 8615841276005.0 / 14322.0};
  const int N = 20 + static_cast<int>(std::ceil(std::abs(s.imag())));
  cplx sum = 0.0;
  for (int n = 1; n < N; ++n) sum += std::exp(-s * std::log(static_cast<double>(n)));
  const double logN = std::log(static_cast<double>(N));
  const cplx N_ms = std::exp(-s * logN);
  sum += N_ms * static_cast<double>(N) / (s - 1.0) + 0.5 * N_ms;
  // Correction terms B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}.
  cplx poch = s;
  cplx power = N_ms / static_cast<double>(N);
  double fact = 2.0;
  for (std::size_t k = 1; k <= bern.size(); ++k) {
    const cplx term = bern[k - 1] / fact * poch * power;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    const double kk = static_cast<double>(k);
    poch *= (s + 2.0 * kk - 1.0) * (s + 2.0 * kk);
    power /= static_cast<double>(N) * static_cast<double>(N);
    fact *= (2.0 * kk + 1.0) * (2.0 * kk + 2.0);
  }
  return sum;
}

/// Modified Bessel function of the second kind K_nu(x) for complex order and
/// real positive argument, from K_nu(x) = int_0^inf e^{-x cosh t} cosh(nu t) dt
/// with the trapezoidal rule (the integrand is entire and decays doubly
/// exponentially, so the rule converges geometrically in 1/h).
inline cplx bessel_k(cplx nu, double x) {
  if (!(x > 0.0)) raise(ErrorKind::DomainError, "bessel_k requires x > 0");
  const double h = 0.05;
  const double t_peak = std::asinh(std::abs(nu.real()) / x);
  auto f = [&](double t) {
    const double e = -x * std::cosh(t);
    return 0.5 * (std::exp(nu * t + e) + std::exp(-nu * t + e));
  };
  cplx sum = 0.5 * f(0.0);
  for (int k = 1; k < 100000; ++k) {
    const double t = k * h;
    const cplx term = f(t);
    sum += term;
    if (t > t_peak && std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return h * sum;
}

/// Free Green's function G_s(d) of the hyperbolic plane as a function of the
/// geodesic distance, normalized so that G ~ (1/2pi) log d as d -> 0 and
/// (Delta + s(1-s)) G = delta. It equals -(1/2pi) Q_{s-1}(cosh d) with Q the
/// Legendre function of the second kind.
///
/// Evaluation uses Q_{s-1}(cosh d) = sqrt(pi) Gamma(s)/Gamma(s+1/2) e^{-sd}
/// 2F1(1/2, s; s+1/2; e^{-2d}); near the diagonal the hypergeometric function
/// is taken from its logarithmic expansion about argument one. The object
/// caches the s-dependent constants so that sums over many distances are cheap.
class FreeGreen {
 public:
  explicit FreeGreen(cplx s) : s_(s) {
    detail::check_gamma_pole(s, "free_green");
    const cplx c = s + 0.5;
    if (c.real() <= 0.5 && std::abs(c - std::round(c.real())) < kPoleRadius) {
      raise(ErrorKind::DomainError, "free_green undefined where s + 1/2 is a nonpositive integer");
    }
    pref_ = -std::exp(log_gamma(s) - log_gamma(c)) / (2.0 * std::sqrt(kPi));
    psi_s_ = digamma(s);
  }

  cplx s() const { return s_; }

  cplx operator()(double d) const {
    if (!(d > 0.0)) raise(ErrorKind::DomainError, "free_green requires d > 0");
    // Below the smallest normal double the value is exactly representable as zero.
    if (s_.real() * d > 745.0) return 0.0;
    const double x = std::exp(-2.0 * d);
    if (x <= kSwitch) return pref_ * std::exp(-s_ * d) * direct_series(x);
    return -std::exp(-s_ * d) * log_series(-std::expm1(-2.0 * d)) / (2.0 * kPi);
  }

  /// Bound on |G_s(d)| for d >= d0 > 0: |pref| e^{-Re s d} (1 - e^{-2 d0})^{-1/2}.
  double envelope(double d) const {
    return std::abs(pref_) * std::exp(-s_.real() * d) / std::sqrt(-std::expm1(-2.0 * d));
  }

  cplx prefactor() const { return pref_; }

 private:
  static constexpr double kSwitch = 0.75;

  cplx direct_series(double x) const {
    cplx sum = 1.0;
    cplx term = 1.0;
    // Terms decrease monotonically once n + Re s > 0.
    const double guard = std::max(2.0, 2.0 - s_.real());
    for (int n = 0; n < 4000; ++n) {
      const double nn = static_cast<double>(n);
      term *= (0.5 + nn) * (s_ + nn) / ((s_ + 0.5 + nn) * (nn + 1.0)) * x;
      sum += term;
      if (nn > guard && std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }

  // Sum_n (1/2)_n (s)_n/(n!)^2 [2 psi(n+1) - psi(1/2+n) - psi(s+n) - log y] y^n, y = 1 - x.
  cplx log_series(double y) const {
    const double ly = std::log(y);
    double psi_1 = -kEulerGamma;
    double psi_h = -kEulerGamma - 2.0 * std::log(2.0);
    cplx psi_b = psi_s_;
    cplx coef = 1.0;
    double yn = 1.0;
    cplx sum = 0.0;
    const double guard = std::abs(s_) * y + 3.0;
    for (int n = 0; n < 4000; ++n) {
      const double nn = static_cast<double>(n);
      const cplx term = coef * (2.0 * psi_1 - psi_h - psi_b - ly) * yn;
      sum += term;
      if (nn > guard && std::abs(term) < 1e-17 * std::abs(sum)) break;
      coef *= (0.5 + nn) * (s_ + nn) / ((nn + 1.0) * (nn + 1.0));
      psi_1 += 1.0 / (nn + 1.0);
      psi_h += 1.0 / (0.5 + nn);
      psi_b += 1.0 / (s_ + nn);
      yn *= y;
    }
    return sum;
  }

  cplx s_;
  cplx pref_;
  cplx psi_s_;
};

inline cplx free_green(cplx s, double d) { return FreeGreen(s)(d); }

/// Independent evaluation of the free Green's function from its integral
/// representation -(1/(2 pi sqrt 2)) int_d^inf e^{-i rho t}/sqrt(cosh t - cosh d) dt,
/// s = 1/2 + i rho, after the substitution t = d + u^2.
inline cplx free_green_oracle(cplx rho, double d, const QuadratureSpec& q) {
  if (!(rho.imag() < -0.5)) raise(ErrorKind::DomainViolation, "free_green_oracle requires Im rho < -1/2");
  if (!(d > 0.0)) raise(ErrorKind::DomainError, "free_green_oracle requires d > 0");
  const double rate = -(rho.imag() + 0.5);
  const double T = std::max(d + 1.0, q.truncation_bound > 0.0 ? q.truncation_bound
                                                               : std::log(10.0 / q.abs_tol) / rate);
  const double U = std::sqrt(T - d);
  const cplx i(0.0, 1.0);
  auto integrand = [&](double u) -> cplx {
    const double u2 = u * u;
    const double denom = std::sqrt(2.0 * std::sinh(d + 0.5 * u2) * std::sinh(0.5 * u2));
    return 2.0 * u * std::exp(-i * rho * (d + u2)) / denom;
  };
  QuadratureSpec inner = q;
  inner.abs_tol = q.abs_tol * 2.0 * kPi * std::sqrt(2.0);
  const auto r = integrate(integrand, 0.0, U, inner);
  return -r.value / (2.0 * kPi * std::sqrt(2.0));
}

}  // namespace hypscatter
