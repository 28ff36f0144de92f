#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "brw/error.hpp"
#include "brw/quadrature.hpp"
#include "brw/rational.hpp"

using namespace brw;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n : {1, 2, 5, 8, 12, 20}) {
    const auto g = gauss_legendre(n);
    double wsum = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
    EXPECT_NEAR(wsum, 2.0, 1e-14);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], p);
      const double exact = (p % 2 == 1) ? 0.0 : 2.0 / (p + 1);
      EXPECT_NEAR(s, exact, 1e-14) << "n=" << n << " p=" << p;
    }
  }
}

TEST(GaussLegendre, RejectsZeroPoints) {
  EXPECT_THROW(gauss_legendre(0), Error);
}

TEST(TensorRule, IntegratesSeparableFunction) {
  const auto r = tensor_rule(3, 6);
  ASSERT_EQ(r.size(), 216u);
  double s = 0.0;
  for (std::size_t p = 0; p < r.size(); ++p) {
    const double* x = &r.nodes[p * 3];
    s += r.weights[p] * std::cos(x[0]) * std::exp(x[1]) * (1.0 + x[2] * x[2]);
  }
  const double exact = 2.0 * std::sin(1.0) * (std::exp(1.0) - std::exp(-1.0)) * (2.0 + 2.0 / 3.0);
  EXPECT_NEAR(s, exact, 1e-10);
}

TEST(SmolyakRule, ExactForLowTotalDegree) {
  // Level 4 with 1,3,5,7-point Gauss rules is exact for total degree 7.
  const int d = 5;
  const auto r = smolyak_rule(d, 4);
  double vol = 0.0, quad = 0.0, mixed = 0.0;
  for (std::size_t p = 0; p < r.size(); ++p) {
    const double* x = &r.nodes[p * d];
    vol += r.weights[p];
    quad += r.weights[p] * x[0] * x[0] * x[1] * x[1];
    mixed += r.weights[p] * std::pow(x[2], 4) * x[3] * x[3];
  }
  EXPECT_NEAR(vol, 32.0, 1e-11);
  EXPECT_NEAR(quad, 32.0 / 9.0, 1e-11);
  EXPECT_NEAR(mixed, 32.0 / 15.0, 1e-11);
}

TEST(SmolyakRule, SmoothIntegrandIsAccurate) {
  const int d = 6;
  const auto r = smolyak_rule(d, 4);
  double s = 0.0;
  for (std::size_t p = 0; p < r.size(); ++p) {
    double sum = 0.0;
    for (int i = 0; i < d; ++i) sum += r.nodes[p * d + i];
    s += r.weights[p] * std::cos(0.3 * sum);
  }
  // prod_i int cos-mixture: Re prod (2 sin(0.3)/0.3)
  const double exact = std::pow(2.0 * std::sin(0.3) / 0.3, d);
  EXPECT_NEAR(s / exact, 1.0, 2e-6);
}

TEST(Rational, ParsesAndCompares) {
  EXPECT_EQ(Rational::parse("3/2"), Rational::of(3, 2));
  EXPECT_EQ(Rational::parse("6/4"), Rational::of(3, 2));
  EXPECT_EQ(Rational::parse("1"), Rational::of(1));
  EXPECT_EQ(Rational::parse("0.75"), Rational::of(3, 4));
  EXPECT_EQ(Rational::parse("-1/2"), Rational::of(1, -2));
  EXPECT_LT(Rational::of(1, 2), Rational::of(2, 3));
  EXPECT_DOUBLE_EQ(Rational::parse("3/2").value(), 1.5);
  EXPECT_EQ(Rational::of(3, 2).to_string(), "3/2");
  EXPECT_THROW(Rational::parse("x"), Error);
  EXPECT_THROW(Rational::parse("1/0"), Error);
}
