#pragma once

#include <span>
#include <vector>

namespace brw {

/// Lattice sum S(theta) = sum_{z != 0} |z|^-(d+alpha) (cos(theta . z) - 1) on Z^d.
///
/// Evaluated by Ewald splitting of |z|^-s (s = d + alpha) with the Gaussian
/// parameter eta: a short-range part summed in real space and a smooth
/// long-range part summed through Poisson summation over reciprocal vectors
/// 2 pi k. The k = 0 reciprocal term carries the whole non-analytic
/// -K |theta|^alpha behaviour in closed form, so the symbol keeps full
/// relative precision as theta -> 0 and needs no truncation radius.
class HeavyTailSymbol {
 public:
  HeavyTailSymbol(int dim, double alpha);

  double operator()(std::span<const double> theta) const;

  /// sum_{z != 0} |z|^-(d+alpha).
  double lattice_zeta() const { return zeta_; }
  /// K with S(theta) = -K |theta|^alpha + O(|theta|^2).
  double singular_coefficient() const { return singular_; }

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }

 private:
  double long_range_hat(double xi_norm) const;

  int dim_;
  double alpha_;
  double s_;
  double eta_;
  double prefactor_;     // pi^(d/2) / Gamma(s/2) * 2/alpha
  double eta_pow_;       // eta^(alpha/2)
  double gamma_a_;       // Gamma(1 - alpha/2)
  double singular_;
  double zeta_;
  int max_coord_ = 0;
  // Real-space representatives in the closed positive orthant, flattened
  // `dim_` coordinates each, with weight S(z) * 2^(nonzero coords).
  std::vector<int> real_sites_;
  std::vector<double> real_weights_;
  // Reciprocal vectors k != 0 in {-1,0,1}^d and their k-space constants.
  std::vector<int> recip_;
  std::vector<double> recip_const_;
};

}  // namespace brw
