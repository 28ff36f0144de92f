#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "brw/rational.hpp"

namespace brw {

/// A point of the integer lattice Z^d.
using Site = std::vector<long>;

struct Weight {
  Site z;
  double rate = 0.0;
};

/// Tail exponent of a heavy-tailed kernel. `exact` is set when the value was
/// given as a rational, which is what regime classification keys on.
struct TailExponent {
  double value = 0.0;
  std::optional<Rational> exact;

  static TailExponent of(double v) { return {v, std::nullopt}; }
  static TailExponent of(Rational r) { return {r.value(), r}; }
};

/// Angular profile H on the unit sphere. An empty function means H == 1.
using AngularProfile = std::function<double(std::span<const double>)>;

enum class KernelKind { FiniteRange, HeavyTail };
enum class Recurrence { G0Finite, G0Infinite };

class HeavyTailSymbol;

/// Symmetric, space-homogeneous, irreducible jump kernel a(z) on Z^d.
///
/// Immutable after construction. The diagonal rate a(0) is always recomputed
/// from the off-diagonal rates so that sum_z a(z) = 0 holds exactly.
class WalkSpec {
 public:
  int dim() const { return dim_; }
  KernelKind kind() const { return kind_; }
  bool heavy_tail() const { return kind_ == KernelKind::HeavyTail; }

  double a0() const { return a0_; }
  /// Off-diagonal rate a(z); a(0) for z = 0.
  double rate(const Site& z) const;
  /// sum_z |z|^2 a(z); +infinity for heavy tails.
  double jump_variance() const { return variance_; }
  /// Per-axis second moments sum_z z_i z_j a(z) (finite-range only).
  const std::vector<double>& covariance() const { return covariance_; }
  bool symmetrized() const { return symmetrized_; }
  /// a(z) is unchanged by flipping the sign of any single coordinate, so phi
  /// is even in each theta_i separately.
  bool reflection_symmetric() const { return reflection_symmetric_; }

  /// Finite-range support (both z and -z listed), or near-field overrides for
  /// heavy tails.
  const std::vector<Weight>& weights() const { return weights_; }

  const TailExponent& alpha() const { return alpha_; }
  double scale() const { return scale_; }
  int truncation_radius() const { return truncation_radius_; }
  bool isotropic() const { return !angular_; }
  const AngularProfile& angular() const { return angular_; }

  /// Fourier symbol phi(theta) = sum_z a(z) cos(theta . z), theta in [-pi, pi]^d.
  double symbol(std::span<const double> theta) const;

  /// Declared bound on the error of `symbol` from truncating heavy-tail sums.
  double symbol_tail_bound() const { return tail_bound_; }

  /// Exponent s with -phi(theta) ~ C |theta|^s near the origin (2 or alpha).
  double local_exponent() const;
  /// Rough C in -phi(theta) ~ C |theta|^s, used only to pick length scales.
  double local_coefficient() const { return local_coefficient_; }

  /// Total jump rate |a0|.
  double total_rate() const { return -a0_; }

  friend WalkSpec build_finite_range_walk(int d, const std::vector<Weight>& weights);
  friend WalkSpec build_heavy_tail_walk(int d, TailExponent alpha, AngularProfile angular,
                                        double scale, int truncation_radius,
                                        const std::vector<Weight>& near_field);

 private:
  WalkSpec() = default;

  int dim_ = 0;
  KernelKind kind_ = KernelKind::FiniteRange;
  std::vector<Weight> weights_;
  std::map<Site, double> rate_table_;
  // One representative of each {z, -z} pair; the symbol uses -4 a sin^2(theta.z/2).
  std::vector<Weight> half_;
  double a0_ = 0.0;
  double variance_ = 0.0;
  std::vector<double> covariance_;
  bool symmetrized_ = false;
  bool reflection_symmetric_ = true;

  TailExponent alpha_;
  double scale_ = 0.0;
  int truncation_radius_ = 0;
  AngularProfile angular_;
  double angular_mean_ = 1.0;
  // Half pairs carrying c (H - mean H) / |z|^(d+alpha) inside the truncation box.
  std::vector<Weight> anisotropic_;
  std::shared_ptr<const HeavyTailSymbol> isotropic_part_;
  double tail_bound_ = 0.0;
  double local_coefficient_ = 1.0;
};

WalkSpec build_finite_range_walk(int d, const std::vector<Weight>& weights);

/// a(z) = scale * H(z/|z|) / |z|^(d+alpha) for every z != 0. Near-field
/// entries replace a(z) at the listed sites (symmetrized).
WalkSpec build_heavy_tail_walk(int d, TailExponent alpha, AngularProfile angular = {},
                               double scale = 1.0, int truncation_radius = 64,
                               const std::vector<Weight>& near_field = {});

/// Nearest-neighbour walk with total jump rate 1: a(+-e_i) = 1/(2d).
WalkSpec simple_walk(int d);

Recurrence classify_recurrence(const WalkSpec& walk);

/// True when the integer span of `vectors` is all of Z^d.
bool generates_lattice(int d, const std::vector<Site>& vectors);

/// Infinitesimal generating function f(u) = sum_n b_n u^n of the offspring law.
/// Only n != 1 rates are stored; b_1 = -sum_{n != 1} b_n.
class BranchingLaw {
 public:
  explicit BranchingLaw(std::map<int, double> rates);
  /// b_2 = beta, b_1 = -beta.
  static BranchingLaw binary_fission(double beta);

  const std::map<int, double>& rates() const { return rates_; }
  double b1() const { return b1_; }
  /// f'(1) = sum_{n != 1} n b_n + b_1.
  double beta1() const { return beta1_; }
  /// Total event rate -b_1.
  double total_rate() const { return -b1_; }

 private:
  std::map<int, double> rates_;
  double b1_ = 0.0;
  double beta1_ = 0.0;
};

}  // namespace brw
