#include "brw/heavy_tail_symbol.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "brw/error.hpp"

namespace brw {

namespace {

constexpr double kEta = 0.25;
// Terms with Gaussian exponent beyond this are below double precision.
constexpr double kCutoffExponent = 46.0;

}  // namespace

HeavyTailSymbol::HeavyTailSymbol(int dim, double alpha)
    : dim_(dim), alpha_(alpha), s_(dim + alpha), eta_(kEta) {
  if (dim < 1) throw Error(ErrorCode::UnsupportedDimension, "dimension must be >= 1");
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 2)");
  }
  using boost::math::tgamma;
  const double pi = std::numbers::pi;
  prefactor_ = std::pow(pi, 0.5 * dim) / tgamma(0.5 * s_) * (2.0 / alpha);
  eta_pow_ = std::pow(eta_, 0.5 * alpha);
  gamma_a_ = tgamma(1.0 - 0.5 * alpha);
  singular_ = prefactor_ * gamma_a_ / std::pow(2.0, alpha);

  // Real-space short-range part: Q(s/2, eta |z|^2) |z|^-s.
  max_coord_ = static_cast<int>(std::ceil(std::sqrt(kCutoffExponent / eta_)));
  double real_total = 0.0;
  std::vector<int> z(dim, 0);
  while (true) {
    long r2 = 0;
    int nonzero = 0;
    for (int c : z) {
      r2 += static_cast<long>(c) * c;
      nonzero += (c != 0);
    }
    if (r2 > 0 && eta_ * r2 <= kCutoffExponent) {
      const double r = std::sqrt(static_cast<double>(r2));
      const double w = boost::math::gamma_q(0.5 * s_, eta_ * r2) * std::pow(r, -s_);
      const double mult = std::ldexp(1.0, nonzero);
      real_sites_.insert(real_sites_.end(), z.begin(), z.end());
      real_weights_.push_back(w * mult);
      real_total += w * mult;
    }
    int i = 0;
    for (; i < dim; ++i) {
      if (++z[i] <= max_coord_) break;
      z[i] = 0;
    }
    if (i == dim) break;
  }

  // Reciprocal vectors k != 0; |2 pi k + theta| >= pi inside the zone, and
  // |k|_inf >= 2 is beyond the cutoff.
  std::vector<int> k(dim, -1);
  double recip_total = 0.0;
  while (true) {
    bool zero = true;
    for (int c : k) zero = zero && (c == 0);
    if (!zero) {
      double n2 = 0.0;
      for (int c : k) n2 += c * c;
      const double c0 = long_range_hat(2.0 * pi * std::sqrt(n2));
      recip_.insert(recip_.end(), k.begin(), k.end());
      recip_const_.push_back(c0);
      recip_total += c0;
    }
    int i = 0;
    for (; i < dim; ++i) {
      if (++k[i] <= 1) break;
      k[i] = -1;
    }
    if (i == dim) break;
  }

  // sum_{z != 0} |z|^-s = real part + sum_k Lhat(2 pi k) - L(0).
  const double lhat0 = prefactor_ * eta_pow_;
  const double l0 = std::pow(eta_, 0.5 * s_) / (tgamma(0.5 * s_) * 0.5 * s_);
  zeta_ = real_total + recip_total + lhat0 - l0;
}

double HeavyTailSymbol::long_range_hat(double xi) const {
  const double x = xi * xi / (4.0 * eta_);
  if (x > 700.0) return 0.0;
  const double a = 1.0 - 0.5 * alpha_;
  return prefactor_ *
         (eta_pow_ * std::exp(-x) - std::pow(0.5 * xi, alpha_) * boost::math::tgamma(a, x));
}

double HeavyTailSymbol::operator()(std::span<const double> theta) const {
  const int d = dim_;
  // Real space: sum S(z) m(z) (prod_i cos(theta_i z_i) - 1), written through
  // a_i = 2 sin^2(theta_i z_i / 2) to keep relative precision near 0.
  thread_local std::vector<double> a;
  a.assign(static_cast<std::size_t>(d) * (max_coord_ + 1), 0.0);
  for (int i = 0; i < d; ++i) {
    for (int n = 1; n <= max_coord_; ++n) {
      const double sn = std::sin(0.5 * theta[i] * n);
      a[i * (max_coord_ + 1) + n] = 2.0 * sn * sn;
    }
  }
  double real = 0.0;
  const std::size_t count = real_weights_.size();
  for (std::size_t p = 0; p < count; ++p) {
    const int* z = &real_sites_[p * d];
    double one_minus = 0.0;  // 1 - prod (1 - a_i)
    for (int i = 0; i < d; ++i) {
      const double ai = a[i * (max_coord_ + 1) + z[i]];
      one_minus += ai * (1.0 - one_minus);
    }
    real -= real_weights_[p] * one_minus;
  }

  // Scaled so that |theta|^2 does not underflow for tiny theta.
  double big = 0.0;
  for (int i = 0; i < d; ++i) big = std::max(big, std::abs(theta[i]));
  double scaled2 = 0.0;
  for (int i = 0; i < d && big > 0.0; ++i) scaled2 += (theta[i] / big) * (theta[i] / big);
  const double norm = big * std::sqrt(scaled2);
  const double norm2 = norm * norm;
  const double x = norm2 / (4.0 * eta_);
  const double a_inc = 1.0 - 0.5 * alpha_;
  const double k0 =
      prefactor_ * (eta_pow_ * std::expm1(-x) -
                    (norm > 0.0 ? std::pow(0.5 * norm, alpha_) * boost::math::tgamma(a_inc, x) : 0.0));

  double recip = 0.0;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t j = 0; j < recip_const_.size(); ++j) {
    double xi2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double c = theta[i] + two_pi * recip_[j * d + i];
      xi2 += c * c;
    }
    recip += long_range_hat(std::sqrt(xi2)) - recip_const_[j];
  }
  return real + k0 + recip;
}

}  // namespace brw
