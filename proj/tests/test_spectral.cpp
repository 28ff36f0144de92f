#include <gtest/gtest.h>

#include <cmath>

#include "brw/error.hpp"
#include "brw/spectral.hpp"

using namespace brw;

namespace {

constexpr double kWatson3 = 1.5163860591519762;
constexpr double kPairBetaC1 = 0.4919390575045619;
constexpr double kPairBetaC2 = 0.5637862247947884;
constexpr double kPairBetaC5 = 0.6199656806115963;
constexpr double kLambda1D = 0.004987562112089031;

}  // namespace

TEST(Spectral, SingleSourceCriticalValue) {
  const SpectralSolver s(simple_walk(3), {{0, 0, 0}});
  EXPECT_TRUE(s.transient());
  EXPECT_NEAR(s.beta_critical(), 1.0 / kWatson3, 1e-8);
  EXPECT_FALSE(s.beta_c1());
  EXPECT_FALSE(s.lambda0(0.5));
  EXPECT_FALSE(s.lambda0(1.0 / kWatson3 * 0.999));
}

TEST(Spectral, PairCriticalValues) {
  const auto w = simple_walk(3);
  EXPECT_NEAR(beta_critical(w, {{{0, 0, 0}, {1, 0, 0}}, 0.0}), kPairBetaC1, 1e-8);
  EXPECT_NEAR(beta_critical(w, {{{0, 0, 0}, {2, 0, 0}}, 0.0}), kPairBetaC2, 1e-8);
  EXPECT_NEAR(beta_critical(w, {{{0, 0, 0}, {0, 0, 5}}, 0.0}), kPairBetaC5, 1e-8);
}

TEST(Spectral, OneDimensionalRoot) {
  const auto w = simple_walk(1);
  const auto l = lambda0(w, {{{0}}, 0.1});
  ASSERT_TRUE(l);
  EXPECT_LT(std::abs(*l - kLambda1D) / kLambda1D, 1e-8);
  EXPECT_EQ(beta_critical(w, {{{0}}, 0.1}), 0.0);
  EXPECT_FALSE(lambda0(w, {{{0}}, 0.0}));
}

TEST(Spectral, RecurrentPairClosedForm) {
  // G_lambda(0, x) = rho^|x| / s with s = sqrt(lambda^2 + 2 lambda); at beta = 2
  // the symmetric root is 8/5 and the antisymmetric one is 2/3.
  const SpectralSolver s(simple_walk(1), {{0}, {1}});
  EXPECT_FALSE(s.transient());
  EXPECT_TRUE(std::isinf(s.gamma_at_zero()[0]));
  EXPECT_NEAR(s.gamma_at_zero()[1], 1.0, 1e-9);
  ASSERT_TRUE(s.beta_c1());
  EXPECT_NEAR(*s.beta_c1(), 1.0, 1e-9);
  const auto r = s.positive_spectrum(2.0);
  ASSERT_EQ(r.eigenvalues.size(), 2u);
  EXPECT_NEAR(r.eigenvalues[0], 1.6, 1e-8);
  EXPECT_NEAR(r.eigenvalues[1], 2.0 / 3.0, 1e-8);
  EXPECT_TRUE(r.leading_simple);
  EXPECT_FALSE(r.weakly_supercritical);
  const auto weak = s.positive_spectrum(0.5);
  EXPECT_EQ(weak.eigenvalues.size(), 1u);
  EXPECT_TRUE(weak.weakly_supercritical);
  EXPECT_THROW(s.gamma(0.0), Error);
}

TEST(Spectral, GammaMatrixStructure) {
  const auto g = gamma_matrix(simple_walk(3), {{{0, 0, 0}, {1, 0, 0}, {0, 2, 0}}, 1.0}, 0.1);
  EXPECT_EQ(g.value.rows(), 3);
  EXPECT_NEAR((g.value - g.value.transpose()).norm(), 0.0, 1e-15);
  EXPECT_NEAR(g.value(0, 0), g.value(2, 2), 1e-15);
  EXPECT_GT(g.value(0, 1), g.value(1, 2));
}

TEST(Spectral, MatrixEigenvalues) {
  Eigen::MatrixXd c(2, 2);
  c << 3.0, 1.0, 1.0, 3.0;
  const auto ev = gamma_eigenvalues(c);
  EXPECT_NEAR(ev[0], 4.0, 1e-14);
  EXPECT_NEAR(ev[1], 2.0, 1e-14);
  const auto ones = gamma_eigenvalues(Eigen::MatrixXd::Ones(3, 3));
  EXPECT_NEAR(ones[0], 3.0, 1e-14);
  EXPECT_NEAR(ones[1], 0.0, 1e-14);
  try {
    gamma_eigenvalues(Eigen::MatrixXd::Identity(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GapNotResolved);
  }
}

TEST(Spectral, SourceValidation) {
  try {
    SpectralSolver(simple_walk(2), {{0, 0}, {0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CoincidentSources);
  }
  EXPECT_THROW(SpectralSolver(simple_walk(2), {}), Error);
  EXPECT_THROW(SpectralSolver(simple_walk(2), {{0}}), Error);
}

TEST(Spectral, MonotoneInBeta) {
  const SpectralSolver s(simple_walk(3), {{0, 0, 0}, {1, 0, 0}});
  double prev = 0.0;
  for (double beta : {0.55, 0.7, 1.0, 2.0}) {
    const auto l = s.lambda0(beta);
    ASSERT_TRUE(l);
    EXPECT_GT(*l, prev);
    prev = *l;
  }
}

TEST(Spectral, TruncatedOperatorAgrees) {
  const auto w = simple_walk(1);
  const SourceConfig one{{{0}}, 0.5};
  const auto t = truncated_operator_eigen(w, one, 80);
  ASSERT_TRUE(t.converged);
  EXPECT_NEAR(t.eigenvalues[0], std::sqrt(1.25) - 1.0, 1e-9);
  EXPECT_LT(t.boundary_mass, 1e-20);

  const auto w3 = simple_walk(3);
  const SourceConfig pair{{{0, 0, 0}, {1, 0, 0}}, 1.2};
  const double exact = *lambda0(w3, pair);
  const auto t3 = truncated_operator_eigen(w3, pair, 10);
  EXPECT_NEAR(t3.eigenvalues[0], exact, 1e-6 * exact);
}

TEST(Spectral, TruncatedBoxesIncrease) {
  const auto w = simple_walk(1);
  const SourceConfig one{{{0}}, 0.5};
  double prev = -INFINITY;
  for (long L : {2L, 4L, 8L, 16L, 32L}) {
    const double v = truncated_operator_eigen(w, one, L).eigenvalues[0];
    EXPECT_GT(v, prev - 1e-12) << L;
    prev = v;
  }
  EXPECT_NEAR(prev, std::sqrt(1.25) - 1.0, 1e-3);
}
