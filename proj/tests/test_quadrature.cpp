#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hypscatter/quadrature.hpp"

using namespace hypscatter;

TEST(Quadrature, PolynomialAndGaussian) {
  QuadratureSpec q;
  const auto r = integrate([](double x) { return cplx(x * x * x - 2 * x, std::cos(x)); }, 0.0, 2.0, q);
  EXPECT_NEAR(r.value.real(), 0.0, 1e-13);
  EXPECT_NEAR(r.value.imag(), std::sin(2.0), 1e-13);
  const auto g = integrate([](double x) { return cplx(std::exp(-x * x)); }, -10.0, 10.0, q);
  EXPECT_NEAR(g.value.real(), std::sqrt(std::acos(-1.0)), 1e-12);
}

TEST(Quadrature, TanhSinhEndpointSingularity) {
  QuadratureSpec q;
  q.rule = QuadratureRule::TanhSinh;
  const auto r = integrate([](double x) { return cplx(1.0 / std::sqrt(x)); }, 0.0, 1.0, q);
  EXPECT_NEAR(r.value.real(), 2.0, 1e-10);
}

TEST(Quadrature, VectorIntegrand) {
  QuadratureSpec q;
  const auto r = integrate_composite<std::vector<cplx>>(
      [](double x) { return std::vector<cplx>{std::sin(x), cplx(0, 1) * std::exp(x)}; }, 0.0, 1.0, q);
  EXPECT_NEAR(r.value[0].real(), 1 - std::cos(1.0), 1e-13);
  EXPECT_NEAR(r.value[1].imag(), std::exp(1.0) - 1, 1e-13);
}

TEST(Quadrature, FailureIsReported) {
  QuadratureSpec q;
  q.max_levels = 2;
  q.abs_tol = 1e-15;
  EXPECT_THROW(integrate([](double x) { return cplx(std::sin(200 * x) / (x + 1e-3)); }, 0.0, 10.0, q), Error);
}

TEST(Quadrature, SpecValidation) {
  QuadratureSpec q;
  q.abs_tol = 0.0;
  EXPECT_THROW(q.validate(), Error);
  QuadratureSpec e;
  e.abs_tol = 1e-10;
  const double T = e.exponential_cutoff(2.0);
  EXPECT_LE(std::exp(-2.0 * T) / 2.0, e.abs_tol / 10 * 1.0001);
}
