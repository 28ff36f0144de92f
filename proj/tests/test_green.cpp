#include <gtest/gtest.h>

#include <cmath>

#include "brw/error.hpp"
#include "brw/green.hpp"

using namespace brw;

namespace {

// Values of int_0^inf e^{-(1+lambda) t} prod_i I_{r_i}(t/d) dt from 30-digit
// quadrature of the Bessel representation.
constexpr double kWatson3 = 1.5163860591519762;
constexpr double kG3e1 = 0.51638605915197617;
constexpr double kG3e1e2 = 0.33114860212642206;
constexpr double kG3Lambda1em2 = 1.3959404392058645;
constexpr double kG3Lambda1em4 = 1.5046476950585967;
constexpr double kG4 = 1.2394671218484817;
constexpr double kG5 = 1.1563081248402312;
constexpr double kG2Lambda1em3 = 2.8594431494405392;
constexpr double kG2Lambda1em3At12 = 1.3234547431532605;
constexpr double kHeat1 = 0.46575960759364044;
constexpr double kHeat3 = 0.025983611963563359;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Green, OneDimensionalClosedForm) {
  const GreenFunction g(simple_walk(1));
  const auto v = g.green(1.0, {0}, {0});
  EXPECT_LT(rel(v.value, 1.0 / std::sqrt(3.0)), 1e-12);
  EXPECT_TRUE(v.converged);
  const auto w = g.green(1.0, {0}, {1});
  EXPECT_LT(rel(w.value, (2.0 - std::sqrt(3.0)) / std::sqrt(3.0)), 1e-12);
  for (double lam : {1e-6, 1e-3, 0.5, 100.0}) {
    const double exact = 1.0 / std::sqrt(lam * lam + 2 * lam);
    EXPECT_LT(rel(g.green(lam, {3}, {3}).value, exact), 1e-10) << lam;
    const double r = 1 + lam - std::sqrt(lam * lam + 2 * lam);
    EXPECT_NEAR(g.green(lam, {0}, {-4}).value, std::pow(r, 4) * exact, 1e-9 * exact) << lam;
  }
}

TEST(Green, LargeLambda) {
  for (int d : {1, 3}) {
    const auto w = simple_walk(d);
    const double lam = 1e6;
    const double v = green_lambda(w, lam, Site(d, 0), Site(d, 0)).value;
    EXPECT_GE(v, 1.0 / (lam - w.a0() * 1.01));
    EXPECT_LE(v, 1.0 / (lam * 0.99));
  }
}

TEST(Green, WatsonConstantAndNeighbours) {
  const GreenFunction g(simple_walk(3));
  const auto v = g.green_zero({0, 0, 0}, {0, 0, 0});
  EXPECT_FALSE(v.infinite);
  EXPECT_NEAR(v.value, kWatson3, 1e-8);
  EXPECT_NEAR(g.green_zero({0, 0, 0}, {1, 0, 0}).value, kG3e1, 1e-8);
  EXPECT_NEAR(g.green_zero({2, 0, 0}, {1, 1, 0}).value, kG3e1e2, 1e-8);
  EXPECT_NEAR(g.green(0.01, {0, 0, 0}, {0, 0, 0}).value, kG3Lambda1em2, 1e-8);
  EXPECT_NEAR(g.green(1e-4, {0, 0, 0}, {0, 0, 0}).value, kG3Lambda1em4, 1e-8);
}

TEST(Green, HigherDimensions) {
  EXPECT_LT(rel(green_zero(simple_walk(4), {0, 0, 0, 0}, {0, 0, 0, 0}).value, kG4), 1e-6);
  EXPECT_LT(rel(green_zero(simple_walk(5), Site(5, 0), Site(5, 0)).value, kG5), 1e-5);
}

TEST(Green, TwoDimensional) {
  const GreenFunction g(simple_walk(2));
  EXPECT_LT(rel(g.green(1e-3, {0, 0}, {0, 0}).value, kG2Lambda1em3), 1e-9);
  EXPECT_LT(rel(g.green(1e-3, {0, 0}, {1, 2}).value, kG2Lambda1em3At12), 1e-9);
  const auto p = g.potential_many(1e-3, {{1, 2}})[0];
  EXPECT_LT(rel(p.value, kG2Lambda1em3 - kG2Lambda1em3At12), 1e-9);
  EXPECT_TRUE(g.green_zero({0, 0}, {0, 0}).infinite);
}

TEST(Green, RecurrentZeroIsInfinite) {
  EXPECT_TRUE(green_zero(simple_walk(1), {0}, {0}).infinite);
  EXPECT_TRUE(green_zero(build_heavy_tail_walk(1, TailExponent::of(1.2)), {0}, {0}).infinite);
  const auto v = green_zero(build_heavy_tail_walk(1, TailExponent::of(0.5)), {0}, {0});
  EXPECT_FALSE(v.infinite);
  EXPECT_TRUE(std::isfinite(v.value));
  EXPECT_GT(v.value, 0.0);
}

TEST(Green, HeatKernel) {
  const GreenFunction g(simple_walk(1));
  EXPECT_EQ(g.transition_probability(0.0, {0}, {0}).value, 1.0);
  EXPECT_EQ(g.transition_probability(0.0, {0}, {1}).value, 0.0);
  EXPECT_NEAR(g.transition_probability(1.0, {0}, {0}).value, kHeat1, 1e-12);
  EXPECT_NEAR(transition_probability(simple_walk(3), 5.0, {0, 0, 0}, {0, 1, 0}).value, kHeat3, 1e-11);
  double sum = 0.0;
  for (long y = -40; y <= 40; ++y) sum += g.transition_probability(3.0, {0}, {y}).value;
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Green, LaplaceConsistency) {
  const auto w = simple_walk(1);
  EXPECT_LT(laplace_consistency(w, 1.0, {0}, {0}, 40.0), 1e-6);
  EXPECT_LT(laplace_consistency(w, 1.0, {0}, {2}, 40.0), 1e-6);
  EXPECT_LT(laplace_consistency(w, 10.0, {0}, {0}, 10.0), 1e-6);
  EXPECT_LT(laplace_consistency(simple_walk(2), 0.5, {0, 0}, {1, 0}, 80.0), 1e-6);
  try {
    laplace_consistency(w, 0.01, {0}, {0}, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolated);
  }
}

TEST(Green, DeficitMatchesDifference) {
  const GreenFunction g(simple_walk(3));
  EXPECT_EQ(g.deficit(0.0, {0, 0, 0}, {0, 0, 0}), 0.0);
  EXPECT_NEAR(g.deficit(0.01, {0, 0, 0}, {0, 0, 0}), kWatson3 - kG3Lambda1em2, 1e-9);
  EXPECT_NEAR(g.deficit(1e-4, {0, 0, 0}, {0, 0, 0}), kWatson3 - kG3Lambda1em4, 1e-9);
  const double r = g.deficit(1e-4, {0, 0, 0}, {0, 0, 0}) / g.deficit(2.5e-5, {0, 0, 0}, {0, 0, 0});
  EXPECT_NEAR(r, 2.0, 0.06);
  EXPECT_THROW(green_deficit(simple_walk(2), 0.1, {0, 0}, {0, 0}), Error);
}

TEST(Green, HeavyTailDeficitRatio) {
  const GreenFunction g(build_heavy_tail_walk(1, TailExponent::of(0.7)));
  const double lam = 1e-6;
  const double r = g.deficit(lam, {0}, {0}) / g.deficit(lam / 2, {0}, {0});
  EXPECT_NEAR(r, std::pow(2.0, 3.0 / 7.0), 0.03 * std::pow(2.0, 3.0 / 7.0));
}

TEST(Green, Monotone) {
  const GreenFunction g(simple_walk(2));
  double prev = INFINITY;
  for (double lam : {1e-5, 1e-3, 1e-1, 1.0, 10.0}) {
    const double v = g.green(lam, {0, 0}, {1, 1}).value;
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    EXPECT_GT(g.green(lam, {0, 0}, {0, 0}).value, v);
    prev = v;
  }
}

TEST(Green, NonSymmetricKernelUsesHalfSpace) {
  // a((1,1)) breaks per-axis reflection symmetry.
  const auto w = build_finite_range_walk(2, {{{1, 0}, 0.25}, {{0, 1}, 0.25}, {{1, 1}, 0.1}});
  ASSERT_FALSE(w.reflection_symmetric());
  const GreenFunction g(w);
  const double a = g.green(0.3, {0, 0}, {1, -1}).value;
  const double b = g.green(0.3, {0, 0}, {-1, 1}).value;
  EXPECT_NEAR(a, b, 1e-13);
  // Row sums: lambda sum_y G_lambda(0, y) = 1.
  std::vector<Site> box;
  for (long i = -12; i <= 12; ++i) {
    for (long j = -12; j <= 12; ++j) box.push_back({i, j});
  }
  double sum = 0.0;
  for (const auto& e : g.green_many(2.0, box)) sum += e.value;
  EXPECT_NEAR(2.0 * sum, 1.0, 1e-8);
}

TEST(Green, HeavyTailHeatSlope) {
  const GreenFunction g(build_heavy_tail_walk(1, TailExponent::of(Rational::of(3, 2))));
  const double p1 = g.transition_probability(100.0, {0}, {0}).value;
  const double p2 = g.transition_probability(1e4, {0}, {0}).value;
  EXPECT_NEAR(std::log(p2 / p1) / std::log(100.0), -2.0 / 3.0, 0.02);
}

TEST(Green, InverseSquareConstant) {
  const GreenFunction g(simple_walk(5));
  const auto f = g.inverse_square_integral();
  const auto t = g.inverse_square_time_domain();
  EXPECT_NEAR(f.value / t.value, 1.0, 0.01);
  EXPECT_THROW(GreenFunction(simple_walk(3)).inverse_square_integral(), Error);
}

TEST(Green, HeavyTailTinyLambda) {
  // The symbol stays nonzero for |theta| below sqrt(DBL_MIN), so G_lambda keeps
  // its logarithmic growth down to lambda ~ 1e-300.
  const auto w = build_heavy_tail_walk(1, TailExponent::of(Rational::of(1)));
  EXPECT_LT(w.symbol(std::vector<double>{1e-200}), 0.0);
  const GreenFunction g(w);
  const double a = g.green_many(1e-150, {{0}})[0].value;
  const double b = g.green_many(1e-300, {{0}})[0].value;
  EXPECT_LT(b / a, 2.1);
  EXPECT_GT(b / a, 1.9);
}
