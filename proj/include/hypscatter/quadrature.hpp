#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "hypscatter/errors.hpp"

namespace hypscatter {

using cplx = std::complex<double>;

enum class QuadratureRule { TanhSinh, GaussLegendreComposite };

/// Parameters of a numerical integration.
///
/// `max_levels` bounds the refinement depth of a panel (Gauss-Legendre) or the
/// number of halvings of the step (tanh-sinh). `panels` is the initial panel
/// count of the composite rule. `truncation_bound` is the cutoff used for
/// semi-infinite ranges; zero means "derive it from the decay rate".
struct QuadratureSpec {
  QuadratureRule rule = QuadratureRule::GaussLegendreComposite;
  double abs_tol = 1e-12;
  int max_levels = 30;
  int panels = 8;
  double truncation_bound = 0.0;

  void validate() const {
    if (!(abs_tol > 0.0)) raise(ErrorKind::DomainError, "quadrature abs_tol must be positive");
    if (max_levels < 1 || panels < 1) raise(ErrorKind::DomainError, "quadrature levels/panels must be positive");
  }

  /// Cutoff T such that an integrand bounded by `scale * exp(-rate * t)` has tail
  /// below abs_tol/10 beyond T (rate > 0).
  double exponential_cutoff(double rate, double scale = 1.0) const {
    if (truncation_bound > 0.0) return truncation_bound;
    if (!(rate > 0.0)) raise(ErrorKind::DomainError, "decay rate must be positive for truncation");
    return std::max(0.0, std::log(10.0 * scale / (abs_tol * rate)) / rate);
  }
};

template <class V>
struct QuadResult {
  V value;
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

inline double qnorm(const cplx& v) { return std::abs(v); }
inline double qnorm(double v) { return std::abs(v); }
inline double qnorm(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

template <class V>
void axpy(V& acc, double w, const V& x) {
  if constexpr (std::is_same_v<V, std::vector<cplx>>) {
    if (acc.empty()) acc.assign(x.size(), cplx(0.0));
    for (std::size_t i = 0; i < x.size(); ++i) acc[i] += w * x[i];
  } else {
    acc += w * x;
  }
}

template <class V>
V difference(const V& a, const V& b) {
  if constexpr (std::is_same_v<V, std::vector<cplx>>) {
    V out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
  } else {
    return a - b;
  }
}

template <class V>
V zero_like(const V& proto) {
  if constexpr (std::is_same_v<V, std::vector<cplx>>) {
    return V(proto.size(), cplx(0.0));
  } else {
    return V{};
  }
}

using GL = boost::math::quadrature::gauss<double, 20>;

template <class V, class F>
V gauss_panel(F& f, double a, double b, int& evals) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const auto& x = GL::abscissa();
  const auto& w = GL::weights();
  V acc{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      axpy(acc, h * w[i], static_cast<V>(f(c)));
      ++evals;
    } else {
      axpy(acc, h * w[i], static_cast<V>(f(c - h * x[i])));
      axpy(acc, h * w[i], static_cast<V>(f(c + h * x[i])));
      evals += 2;
    }
  }
  return acc;
}

template <class V>
struct Panel {
  double a, b;
  int level;
  V value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class V, class F>
Panel<V> make_panel(F& f, double a, double b, int level, int& evals) {
  const double m = 0.5 * (a + b);
  V whole = gauss_panel<V>(f, a, b, evals);
  V left = gauss_panel<V>(f, a, m, evals);
  V right = gauss_panel<V>(f, m, b, evals);
  V split = left;
  axpy(split, 1.0, right);
  const double err = qnorm(difference(whole, split));
  return Panel<V>{a, b, level, split, err};
}

}  // namespace detail

/// Globally adaptive composite Gauss-Legendre integration of `f` over [a, b].
/// `V` is the value type returned by `f` (double, complex, or a vector of complex).
template <class V, class F>
QuadResult<V> integrate_composite(F f, double a, double b, const QuadratureSpec& q) {
  q.validate();
  QuadResult<V> out;
  if (a == b) {
    out.value = V{};
    return out;
  }
  std::priority_queue<detail::Panel<V>> heap;
  const double width = (b - a) / q.panels;
  double total_err = 0.0;
  for (int i = 0; i < q.panels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == q.panels) ? b : a + (i + 1) * width;
    auto p = detail::make_panel<V>(f, lo, hi, 0, out.evaluations);
    total_err += p.error;
    heap.push(std::move(p));
  }
  while (total_err > q.abs_tol) {
    auto worst = heap.top();
    if (worst.level >= q.max_levels) break;
    heap.pop();
    total_err -= worst.error;
    const double m = 0.5 * (worst.a + worst.b);
    auto l = detail::make_panel<V>(f, worst.a, m, worst.level + 1, out.evaluations);
    auto r = detail::make_panel<V>(f, m, worst.b, worst.level + 1, out.evaluations);
    total_err += l.error + r.error;
    heap.push(std::move(l));
    heap.push(std::move(r));
  }
  // Sum in order of position so the result does not depend on heap layout.
  std::vector<detail::Panel<V>> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  out.value = panels.front().value;
  out.error = panels.front().error;
  for (std::size_t i = 1; i < panels.size(); ++i) {
    detail::axpy(out.value, 1.0, panels[i].value);
    out.error += panels[i].error;
  }
  if (out.error > q.abs_tol) {
    raise(ErrorKind::QuadratureFailure,
          "composite Gauss-Legendre did not reach abs_tol " + std::to_string(q.abs_tol) +
              " (estimate " + std::to_string(out.error) + ")");
  }
  return out;
}

/// Tanh-sinh integration of a complex-valued `f` over [a, b]; real and imaginary
/// parts are integrated separately so each carries its own error estimate.
template <class F>
QuadResult<cplx> integrate_tanh_sinh(F f, double a, double b, const QuadratureSpec& q) {
  q.validate();
  boost::math::quadrature::tanh_sinh<double> ts(static_cast<std::size_t>(std::min(q.max_levels, 20)));
  QuadResult<cplx> out;
  double err_re = 0.0, err_im = 0.0, l1_re = 0.0, l1_im = 0.0;
  int evals = 0;
  auto re = [&](double x) {
    ++evals;
    return std::real(cplx(f(x)));
  };
  auto im = [&](double x) {
    ++evals;
    return std::imag(cplx(f(x)));
  };
  const double rel = std::sqrt(std::numeric_limits<double>::epsilon()) * 1e-3;
  const double vr = ts.integrate(re, a, b, rel, &err_re, &l1_re);
  const double vi = ts.integrate(im, a, b, rel, &err_im, &l1_im);
  out.value = cplx(vr, vi);
  out.error = std::hypot(err_re, err_im);
  out.evaluations = evals;
  if (out.error > q.abs_tol) {
    raise(ErrorKind::QuadratureFailure, "tanh-sinh did not reach abs_tol " + std::to_string(q.abs_tol));
  }
  return out;
}

/// Integrate a complex-valued function with the rule selected in `q`.
template <class F>
QuadResult<cplx> integrate(F f, double a, double b, const QuadratureSpec& q) {
  if (q.rule == QuadratureRule::TanhSinh) return integrate_tanh_sinh(f, a, b, q);
  return integrate_composite<cplx>(f, a, b, q);
}

}  // namespace hypscatter
