#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "hypscatter/eisenstein.hpp"
#include "hypscatter/errors.hpp"
#include "hypscatter/green.hpp"
#include "hypscatter/halfplane.hpp"
#include "hypscatter/specfun.hpp"

namespace hypscatter {

/// One spectral parameter in the coordinates s = 1/2 + i rho and
/// lambda = s(1 - s) = 1/4 + rho^2.
class SpectralPoint {
 public:
  static SpectralPoint from_s(cplx s) { return SpectralPoint(s); }
  static SpectralPoint from_rho(cplx rho) { return SpectralPoint(0.5 + cplx(0.0, 1.0) * rho); }
  /// The root with Re s >= 1/2 (Im s >= 0 on the critical line).
  static SpectralPoint from_lambda(cplx lambda) {
    cplx r = std::sqrt(0.25 - lambda);
    if (r.real() < 0.0 || (r.real() == 0.0 && r.imag() < 0.0)) r = -r;
    return SpectralPoint(0.5 + r);
  }

  cplx s() const { return s_; }
  cplx rho() const { return cplx(0.0, -1.0) * (s_ - 0.5); }
  cplx lambda() const { return s_ * (1.0 - s_); }

 private:
  explicit SpectralPoint(cplx s) : s_(s) {}
  cplx s_;
};

/// Eigenvalues lambda_j with weights |phi_j(z0)|^2.
struct SpectralData {
  struct Entry {
    double lambda = 0.0;
    double weight = 0.0;
  };
  std::vector<Entry> entries;
  std::string truncation_note;

  void validate() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      if (!(e.lambda >= 0.0) || !(e.weight >= 0.0) || !std::isfinite(e.lambda) || !std::isfinite(e.weight)) {
        raise(ErrorKind::DomainError, "spectral data needs finite lambda >= 0 and weight >= 0");
      }
      if (i > 0 && entries[i - 1].lambda > e.lambda) raise(ErrorKind::DomainError, "spectral data must be sorted");
    }
  }
};

/// Reads `lambda,weight` CSV rows (header required) and sorts them.
inline SpectralData read_spectral_data_csv(std::istream& in, std::string note = {}) {
  SpectralData data;
  data.truncation_note = std::move(note);
  std::string line;
  if (!std::getline(in, line)) raise(ErrorKind::ConfigError, "spectral data CSV is empty");
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "lambda,weight") raise(ErrorKind::ConfigError, "spectral data CSV must start with header lambda,weight");
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    SpectralData::Entry e;
    if (!(ss >> e.lambda >> e.weight)) {
      raise(ErrorKind::ConfigError, "malformed spectral data row " + std::to_string(row));
    }
    data.entries.push_back(e);
  }
  std::sort(data.entries.begin(), data.entries.end(),
            [](const SpectralData::Entry& a, const SpectralData::Entry& b) { return a.lambda < b.lambda; });
  data.validate();
  return data;
}

/// Relative zeta function from the orbit sum, valid for Re s > 1:
/// S(s) = 1/beta + m psi(s) + sum_gamma G_s(l_gamma).
struct OrbitSumRep {
  std::shared_ptr<const OrbitBall> ball;
  Coupling coupling;
};

/// Relative zeta function from (truncated) spectral data, as a function of
/// lambda = s(1 - s): 1/alpha + sum_j w_j [1/(lambda - lambda_j) - Re 1/(t(1-t) - lambda_j)].
struct SpectralRep {
  SpectralData data;
  double alpha = 1.0;
  cplx t = t_root();
};

/// Sphere relative zeta function 1 + beta psi(w) in the variable w.
struct SphereRep {
  double beta = 1.0;
};

using RelZetaRep = std::variant<OrbitSumRep, SpectralRep, SphereRep>;

inline RelZetaRep make_orbit_sum_rep(std::shared_ptr<const OrbitBall> ball, const Coupling& coupling) {
  if (!ball) raise(ErrorKind::DomainError, "orbit-sum representation needs a ball");
  if (coupling.beta == 0.0) raise(ErrorKind::ZeroCoupling, "beta must be nonzero");
  return OrbitSumRep{std::move(ball), coupling};
}

inline RelZetaRep make_spectral_rep(SpectralData data, double alpha) {
  if (alpha == 0.0) raise(ErrorKind::ZeroCoupling, "alpha must be nonzero");
  data.validate();
  return SpectralRep{std::move(data), alpha, t_root()};
}

inline RelZetaRep make_sphere_rep(double beta) {
  if (beta == 0.0) raise(ErrorKind::ZeroCoupling, "beta must be nonzero");
  return SphereRep{beta};
}

namespace detail {

inline void check_sphere_pole(cplx w) {
  const double n = std::round(w.real());
  if (n <= 0.0 && std::abs(w - n) < kPoleRadius) {
    raise(ErrorKind::NearPole, "sphere relative zeta evaluated within 1e-8 of the pole at w = " +
                                   std::to_string(static_cast<long>(n)));
  }
}

inline cplx spectral_lambda_eval(const SpectralRep& r, cplx lambda) {
  const cplx tt = r.t * (1.0 - r.t);
  cplx sum = 1.0 / r.alpha;
  for (const auto& e : r.data.entries) {
    if (e.weight == 0.0) continue;
    if (std::abs(lambda - e.lambda) < kPoleRadius) {
      raise(ErrorKind::NearPole, "spectral relative zeta evaluated within 1e-8 of lambda = " + std::to_string(e.lambda));
    }
    sum += e.weight * (1.0 / (lambda - e.lambda) - (1.0 / (tt - e.lambda)).real());
  }
  return sum;
}

inline cplx spectral_lambda_deriv(const SpectralRep& r, cplx lambda) {
  cplx sum = 0.0;
  for (const auto& e : r.data.entries) {
    if (e.weight == 0.0) continue;
    if (std::abs(lambda - e.lambda) < kPoleRadius) raise(ErrorKind::NearPole, "spectral derivative at a pole");
    const cplx q = lambda - e.lambda;
    sum -= e.weight / (q * q);
  }
  return sum;
}

}  // namespace detail

/// Value of S with a bound on its truncation error (nonzero only for the orbit sum).
inline SumValue relzeta_eval_detailed(const RelZetaRep& rep, cplx s) {
  if (const auto* o = std::get_if<OrbitSumRep>(&rep)) {
    if (!(s.real() > 1.0)) raise(ErrorKind::ConvergenceDomain, "orbit-sum relative zeta requires Re s > 1");
    const SumValue d = diffractive_green_sum(*o->ball, s);
    const double m = static_cast<double>(o->ball->stabilizer_order);
    return {1.0 / o->coupling.beta + m * psi_scaled(s) + d.value, d.tail_estimate};
  }
  if (const auto* p = std::get_if<SpectralRep>(&rep)) return {detail::spectral_lambda_eval(*p, s * (1.0 - s)), 0.0};
  const auto& sp = std::get<SphereRep>(rep);
  detail::check_sphere_pole(s);
  return {1.0 + sp.beta * psi_scaled(s), 0.0};
}

/// S(s) in the given representation; for the sphere the argument is w.
inline cplx relzeta_eval(const RelZetaRep& rep, cplx s) { return relzeta_eval_detailed(rep, s).value; }

/// dS/ds. Closed forms for the sphere and spectral representations; for the
/// orbit sum the Green's-function terms are differentiated by a fourth-order
/// central difference with step 1e-4.
inline cplx relzeta_deriv(const RelZetaRep& rep, cplx s) {
  if (const auto* o = std::get_if<OrbitSumRep>(&rep)) {
    const double h = 1e-4;
    if (!(s.real() - 2.0 * h > 1.0)) raise(ErrorKind::ConvergenceDomain, "orbit-sum derivative requires Re s > 1");
    auto d = [&](double k) { return diffractive_green_sum(*o->ball, s + k * h).value; };
    const cplx fd = (-d(2.0) + 8.0 * d(1.0) - 8.0 * d(-1.0) + d(-2.0)) / (12.0 * h);
    const double m = static_cast<double>(o->ball->stabilizer_order);
    return m * psi_scaled_deriv(s) + fd;
  }
  if (const auto* p = std::get_if<SpectralRep>(&rep)) {
    return (1.0 - 2.0 * s) * detail::spectral_lambda_deriv(*p, s * (1.0 - s));
  }
  const auto& sp = std::get<SphereRep>(rep);
  detail::check_sphere_pole(s);
  return sp.beta * psi_scaled_deriv(s);
}

/// E(z0, s) E(z0, 1 - s)/(1 - 2s), the amount by which S(1 - s) falls short of
/// S(s) on the modular surface; E(z0, 1 - s) = E(z0, s)/phi(s).
inline cplx relzeta_fe_correction(const HPoint& z0, cplx s, const EisensteinContext& ctx = {}) {
  const cplx phi = scattering_phi(s);
  if (std::abs(phi) < 1e-10) raise(ErrorKind::ScatteringPole, "phi(s) vanishes, E(z0, 1 - s) is singular");
  const cplx e = eisenstein_fourier(z0, s, ctx);
  return e * (e / phi) / (1.0 - 2.0 * s);
}

/// S(1 - s) from S(s) by the functional equation S(1 - s) = S(s) - E(z0,s)E(z0,1-s)/(1 - 2s).
/// Without a cusp (sphere, spectral data) S(1 - s) is evaluated directly.
inline cplx relzeta_continue_fe(const RelZetaRep& rep, cplx s, const EisensteinContext& ctx = {}) {
  if (const auto* o = std::get_if<OrbitSumRep>(&rep)) {
    if (!(s.real() > 1.0)) raise(ErrorKind::ConvergenceDomain, "functional-equation continuation requires Re s > 1");
    return relzeta_eval(rep, s) - relzeta_fe_correction(o->ball->base, s, ctx);
  }
  return relzeta_eval(rep, 1.0 - s);
}

struct RealRoot {
  /// Location in the representation's real variable (s, lambda or w).
  double x = 0.0;
  /// |S| at the root.
  double residual = 0.0;
};

namespace detail {

/// Real value of S in the variable used for real root finding: s for the
/// orbit sum, lambda for spectral data, w for the sphere.
inline double real_variable_eval(const RelZetaRep& rep, double x) {
  if (const auto* p = std::get_if<SpectralRep>(&rep)) return detail::spectral_lambda_eval(*p, x).real();
  return relzeta_eval(rep, x).real();
}

inline std::vector<double> real_poles(const RelZetaRep& rep, double lo, double hi) {
  std::vector<double> poles;
  if (const auto* p = std::get_if<SpectralRep>(&rep)) {
    for (const auto& e : p->data.entries) {
      if (e.weight > 0.0 && e.lambda > lo && e.lambda < hi) poles.push_back(e.lambda);
    }
  } else if (std::holds_alternative<SphereRep>(rep)) {
    for (double j = std::min(0.0, std::floor(hi)); j > lo; j -= 1.0) {
      if (j < hi) poles.push_back(j);
    }
    std::sort(poles.begin(), poles.end());
  }
  poles.erase(std::unique(poles.begin(), poles.end()), poles.end());
  return poles;
}

inline RealRoot refine_root(const RelZetaRep& rep, double a, double b, double fa, double fb) {
  auto f = [&](double x) { return real_variable_eval(rep, x); };
  std::uintmax_t iters = 300;
  const auto br =
      boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
  double x = 0.5 * (br.first + br.second);
  double fx = f(x);
  // Keep the endpoint with the smaller residual.
  for (double c : {br.first, br.second}) {
    const double fc = f(c);
    if (std::abs(fc) < std::abs(fx)) {
      x = c;
      fx = fc;
    }
  }
  return {x, std::abs(fx)};
}

}  // namespace detail

/// Real zeros of S on (lo, hi). The variable is s for the orbit sum (which
/// needs lo > 1), lambda = s(1 - s) for spectral data and w for the sphere.
/// Roots are bracketed between consecutive poles, where S is monotone, and
/// refined with TOMS 748. The orbit sum has no poles on (1, inf); there the
/// interval is scanned with a step of 1e-3 max(1, x).
inline std::vector<RealRoot> find_real_zeros(const RelZetaRep& rep, double lo, double hi) {
  if (!(lo < hi)) raise(ErrorKind::DomainError, "root interval must satisfy lo < hi");
  std::vector<RealRoot> roots;
  auto f = [&](double x) { return detail::real_variable_eval(rep, x); };
  if (std::holds_alternative<OrbitSumRep>(rep)) {
    if (!(lo > 1.0)) raise(ErrorKind::ConvergenceDomain, "orbit-sum roots require the interval to lie in s > 1");
    double a = lo;
    double fa = f(a);
    while (a < hi) {
      const double b = std::min(hi, a + 1e-3 * std::max(1.0, a));
      const double fb = f(b);
      if (fa == 0.0) {
        roots.push_back({a, 0.0});
      } else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
        roots.push_back(detail::refine_root(rep, a, b, fa, fb));
      }
      a = b;
      fa = fb;
    }
    if (fa == 0.0) roots.push_back({a, 0.0});
    return roots;
  }

  const auto poles = detail::real_poles(rep, lo - 1.0, hi + 1.0);
  for (double p : poles) {
    if (std::abs(p - lo) < kPoleRadius || std::abs(p - hi) < kPoleRadius) {
      raise(ErrorKind::PoleOnBoundary, "root interval endpoint lies on a pole at " + std::to_string(p));
    }
  }
  std::vector<double> cuts{lo};
  for (double p : poles) {
    if (p > lo && p < hi) cuts.push_back(p);
  }
  cuts.push_back(hi);
  const double off = 1e-7;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = (i == 0) ? lo : cuts[i] + off * std::max(1.0, std::abs(cuts[i]));
    const double b = (i + 2 == cuts.size()) ? hi : cuts[i + 1] - off * std::max(1.0, std::abs(cuts[i + 1]));
    if (!(a < b)) continue;
    const double fa = f(a);
    const double fb = f(b);
    if (fa == 0.0) {
      roots.push_back({a, 0.0});
    } else if (fb == 0.0) {
      roots.push_back({b, 0.0});
    } else if ((fa < 0.0) != (fb < 0.0)) {
      roots.push_back(detail::refine_root(rep, a, b, fa, fb));
    }
  }
  return roots;
}

/// The unique v > -1/2 with 1 + m beta psi(1/2 + v) = 0, by bracketing
/// outward from the digamma pole at v = -1/2.
inline std::optional<double> vbeta_root(int m, double beta) {
  if (beta == 0.0) raise(ErrorKind::ZeroCoupling, "beta must be nonzero");
  const double mb = static_cast<double>(m) * beta;
  // psi(w) = psi(w + 1) - 1/(2 pi w) stays evaluable arbitrarily close to the pole at w = 0.
  auto f = [&](double v) {
    const double w = 0.5 + v;
    return 1.0 + mb * (psi_scaled(cplx(w + 1.0, 0.0)).real() - 1.0 / (2.0 * kPi * w));
  };
  const double a = -0.5 + 1e-9;
  const double fa = f(a);
  double b = 1.0;
  double fb = f(b);
  while ((fa < 0.0) == (fb < 0.0)) {
    if (b > 1e300) return std::nullopt;
    b *= 4.0;
    fb = f(b);
  }
  std::uintmax_t iters = 300;
  const auto br =
      boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
  const double v1 = br.first;
  const double v2 = br.second;
  return std::abs(f(v1)) <= std::abs(f(v2)) ? v1 : v2;
}

enum class PointClass { OldEigenvaluePole, NewEigenvalueZero, Resonance, Regular };

inline const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::OldEigenvaluePole: return "OldEigenvaluePole";
    case PointClass::NewEigenvalueZero: return "NewEigenvalueZero";
    case PointClass::Resonance: return "Resonance";
    case PointClass::Regular: return "Regular";
  }
  return "Regular";
}

/// Thresholds on |S| separating zeros, regular points and poles.
inline constexpr double kZeroThreshold = 1e-6;
inline constexpr double kPoleThreshold = 1e6;

/// Spectral meaning of s: poles are old eigenvalues, zeros with Re s >= 1/2
/// new eigenvalues and zeros with Re s < 1/2 resonances. The sphere is compact,
/// so every zero of 1 + beta psi(w) is a new eigenvalue.
inline PointClass classify_point(const RelZetaRep& rep, cplx s) {
  if (std::holds_alternative<OrbitSumRep>(rep) && !(s.real() > 1.0 && s.imag() == 0.0)) {
    raise(ErrorKind::OutOfComputableRegion, "orbit-sum classification is limited to the real axis s > 1");
  }
  double mag = 0.0;
  try {
    mag = std::abs(relzeta_eval(rep, s));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NearPole || e.kind() == ErrorKind::PoleAtNonpositiveInteger) {
      return PointClass::OldEigenvaluePole;
    }
    throw;
  }
  if (mag >= kPoleThreshold) return PointClass::OldEigenvaluePole;
  if (mag > kZeroThreshold) return PointClass::Regular;
  if (std::holds_alternative<SphereRep>(rep)) return PointClass::NewEigenvalueZero;
  return s.real() >= 0.5 ? PointClass::NewEigenvalueZero : PointClass::Resonance;
}

}  // namespace hypscatter
