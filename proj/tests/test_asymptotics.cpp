#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "brw/asymptotics.hpp"
#include "brw/error.hpp"

using namespace brw;

namespace {

// Newton iteration on W e^W = -0.1 with residual below 1e-14.
constexpr double kWm1At01 = -3.577152063957297;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(LambertW, BranchPointAndOracle) {
  EXPECT_EQ(lambert_w_lower(-std::exp(-1.0)), -1.0);
  EXPECT_NEAR(lambert_w_lower(-0.1), kWm1At01, 1e-13);
  const double w = lambert_w_lower(-1e-6);
  EXPECT_LT(std::abs(w * std::exp(w) + 1e-6) / 1e-6, 1e-12);
  EXPECT_LT(lambert_w_lower(-1e-12), -20.0);
  EXPECT_EQ(code_of([] { lambert_w_lower(0.0); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { lambert_w_lower(-0.5); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { lambert_w_lower(0.1); }), ErrorCode::DomainError);
}

TEST(LambertW, RandomIdentityAndMonotone) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) {
    // Mix uniform points with points packed near both ends of the interval.
    const double r = u(rng);
    double x = i % 3 == 0 ? -std::exp(-1.0) * r : (i % 3 == 1 ? -std::exp(-1.0) * (1.0 - 1e-8 * r) : -std::pow(10.0, -300.0 * r));
    if (x <= -std::exp(-1.0)) x = -std::exp(-1.0) * (1.0 - 1e-15);
    if (x == 0.0) continue;
    xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  double prev = 0.0;
  bool first = true;
  for (double x : xs) {
    const double w = lambert_w_lower(x);
    EXPECT_LE(w, -1.0);
    EXPECT_LE(std::abs(w * std::exp(w) - x), 1e-12 * std::abs(x)) << x;
    if (!first) {
      EXPECT_LE(w, prev) << x;  // x increasing -> W decreasing
    }
    prev = w;
    first = false;
  }
}

TEST(Laws, TableExamples) {
  const auto a = predicted_law(Quantity::Lambda0, WalkClass::HeavyTail, 1, Rational::of(3, 2), 3);
  EXPECT_EQ(a.form, LawForm::Power);
  EXPECT_EQ(a.variable, LawVariable::NBeta);
  EXPECT_DOUBLE_EQ(a.exponent, 3.0);
  const auto b = predicted_law(Quantity::GreenDeficit, WalkClass::HeavyTail, 2, Rational::of(1), 1);
  EXPECT_EQ(b.form, LawForm::PowerTimesLog);
  EXPECT_EQ(b.log_power, 1);
  const auto c = predicted_law(Quantity::Lambda0, WalkClass::FiniteVariance, 5, std::nullopt, 1);
  EXPECT_EQ(c.form, LawForm::Linear);
  EXPECT_EQ(c.variable, LawVariable::BetaExcess);
  EXPECT_EQ(predicted_law(Quantity::Lambda0, WalkClass::HeavyTail, 1, Rational::of(1, 2), 1).form,
            LawForm::LambertW);
  EXPECT_EQ(predicted_law(Quantity::Lambda0, WalkClass::HeavyTail, 1, Rational::of(1), 2).form,
            LawForm::Exponential);
  EXPECT_DOUBLE_EQ(predicted_law(Quantity::Lambda0, WalkClass::HeavyTail, 2, Rational::of(3, 2), 1).exponent, 3.0);
  EXPECT_EQ(predicted_law(Quantity::Lambda0, WalkClass::FiniteVariance, 2, std::nullopt, 1).form,
            LawForm::Exponential);
  EXPECT_EQ(predicted_law(Quantity::GreenSmallLambda, WalkClass::FiniteVariance, 2, std::nullopt, 1).form,
            LawForm::Log);
  EXPECT_EQ(code_of([] { predicted_law(Quantity::GreenDeficit, WalkClass::FiniteVariance, 1, std::nullopt, 1); }),
            ErrorCode::UnsupportedRegime);
  EXPECT_EQ(code_of([] { predicted_law(Quantity::GreenSmallLambda, WalkClass::HeavyTail, 3, Rational::of(1), 1); }),
            ErrorCode::UnsupportedRegime);
  EXPECT_EQ(code_of([] { predicted_law(Quantity::Lambda0, WalkClass::HeavyTail, 1, Rational::of(2), 1); }),
            ErrorCode::AlphaOutOfRange);
}

TEST(Laws, TableTotality) {
  // Every combination yields exactly one law or UnsupportedRegime; boundary
  // alphas switch form only at exact rational equality.
  for (int d = 1; d <= 6; ++d) {
    for (int k = 1; k < 64; ++k) {
      const Rational a = Rational::of(k, 32);
      for (Quantity q : {Quantity::GreenSmallLambda, Quantity::GreenDeficit, Quantity::Lambda0}) {
        const bool recurrent = d == 1 && k >= 32;
        try {
          const auto law = predicted_law(q, WalkClass::HeavyTail, d, a, 1);
          if (q == Quantity::GreenSmallLambda) {
            EXPECT_TRUE(recurrent);
          }
          if (q == Quantity::GreenDeficit) {
            EXPECT_FALSE(recurrent);
          }
          const bool boundary = 2 * k == 32 * d;
          if (q == Quantity::Lambda0 && !recurrent) {
            EXPECT_EQ(law.form == LawForm::LambertW, boundary) << d << " " << k;
          }
          if (law.form == LawForm::Power) {
            EXPECT_GT(std::abs(law.exponent), 0.0);
          }
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::UnsupportedRegime);
          EXPECT_NE(q, Quantity::Lambda0);
        }
      }
    }
  }
}

TEST(Fits, SyntheticLaws) {
  std::vector<std::pair<double, double>> s;
  for (double u : {1e-1, 1e-2, 1e-3, 1e-4}) s.emplace_back(u, 5.0 * u * u);
  const auto f = fit_exponent(s);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.constant, 5.0, 1e-10);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);

  s.clear();
  for (double u : {1e-1, 1e-2, 1e-3, 1e-4}) s.emplace_back(u, 3.0);
  EXPECT_NEAR(fit_exponent(s).slope, 0.0, 1e-14);

  // u ln(1/u) has local log-log slope 1 - 1/ln(1/u), approaching 1 from below.
  auto slope_at = [](double u0) {
    std::vector<std::pair<double, double>> t;
    for (double u = u0; u < 10.0 * u0 * 1.01; u *= std::sqrt(std::sqrt(10.0))) t.emplace_back(u, u * std::log(1.0 / u));
    return fit_exponent(t).slope;
  };
  EXPECT_LT(slope_at(1e-3), slope_at(1e-8));
  EXPECT_LT(slope_at(1e-8), 1.0);

  s[0].second = -1.0;
  EXPECT_EQ(code_of([&] { fit_exponent(s); }), ErrorCode::NonPositiveSample);
}

TEST(Asymptote, OneDimensionalGreen) {
  const auto r = check_asymptote(simple_walk(1), {{0}}, Quantity::GreenSmallLambda, {1e-6, 1e-3, 10});
  EXPECT_NEAR(r.fitted_exponent, -0.5, 0.01);
  EXPECT_NEAR(r.constant, 1.0 / std::sqrt(2.0), 0.01 / std::sqrt(2.0));
  EXPECT_TRUE(r.pass);
}

TEST(Asymptote, HeavyTailLambda0) {
  const auto r = check_asymptote(build_heavy_tail_walk(1, TailExponent::of(Rational::of(3, 2))), {{0}},
                                 Quantity::Lambda0, {1e-3, 1e-1, 8}, 0.1);
  EXPECT_NEAR(r.fitted_exponent, 3.0, 0.1);
  EXPECT_TRUE(r.pass);
}

TEST(Asymptote, ThreeDimensionalLambda0) {
  const auto r = check_asymptote(simple_walk(3), {{0, 0, 0}}, Quantity::Lambda0, {1e-3, 5e-2, 8});
  EXPECT_NEAR(r.fitted_exponent, 2.0, 0.05);
  EXPECT_GT(r.beta_c, 0.0);
}

TEST(Asymptote, DeficitLaws) {
  const auto r = check_asymptote(simple_walk(3), {{0, 0, 0}}, Quantity::GreenDeficit, {1e-7, 1e-4, 8});
  EXPECT_NEAR(r.fitted_exponent, 0.5, 0.01);
  const auto two = check_asymptote(simple_walk(2), {{0, 0}}, Quantity::GreenSmallLambda, {1e-8, 1e-5, 8});
  EXPECT_EQ(two.law.form, LawForm::Log);
  EXPECT_NEAR(two.constant, 1.0 / M_PI, 0.01);  // G_lambda ~ (1/pi) ln(1/lambda) for d = 2
}

TEST(Asymptote, DeficitRatioLaw) {
  const GreenFunction g(build_heavy_tail_walk(2, TailExponent::of(Rational::of(3, 2))));
  const double lam = 1e-8;
  const double r = g.deficit(lam, {0, 0}, {0, 0}) / g.deficit(lam / 2, {0, 0}, {0, 0});
  const double expected = std::pow(2.0, 0.5 / 1.5);
  EXPECT_NEAR(r, expected, 0.03 * expected);
}

TEST(Asymptote, RangeTooFarFromLimit) {
  EXPECT_EQ(code_of([] {
              check_asymptote(simple_walk(1), {{0}}, Quantity::GreenSmallLambda, {1e-2, 1e3, 8});
            }),
            ErrorCode::InsufficientAsymptoticRange);
  EXPECT_EQ(code_of([] {
              check_asymptote(simple_walk(2), {{0, 0}}, Quantity::GreenSmallLambda, {1e-1, 1e2, 6});
            }),
            ErrorCode::InvalidArgument);
}

TEST(NDependence, NearestNeighbourPair) {
  const auto r = n_dependence_check(simple_walk(1), {1e-4, 2e-4, 4e-4, 8e-4}, {1, 2});
  ASSERT_EQ(r.rows.size(), 2u);
  for (double x : r.rows[0].ratio) EXPECT_DOUBLE_EQ(x, 1.0);
  EXPECT_TRUE(r.rows[1].pass) << r.rows[1].worst_tail;
  EXPECT_FALSE(r.log_ratio);
  EXPECT_EQ(code_of([] { n_dependence_check(simple_walk(3), {1.0}, {1}); }), ErrorCode::PreconditionViolated);
}

TEST(NDependence, CauchyTailUsesLogs) {
  const auto r = n_dependence_check(build_heavy_tail_walk(1, TailExponent::of(Rational::of(1))),
                                    {0.006, 0.008, 0.01, 0.015}, {3});
  EXPECT_TRUE(r.log_ratio);
  EXPECT_TRUE(r.pass) << r.rows[0].worst_tail;
}
