#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "brw/lattice_walk.hpp"

namespace brw {

/// G_lambda(x, y) with an absolute error estimate. `infinite` marks the
/// divergent lambda = 0 value of a recurrent walk; `converged` is false when
/// the refinement budget ran out before the tolerance was met.
struct GreenValue {
  double lambda = 0.0;
  Site x, y;
  double value = 0.0;
  bool infinite = false;
  double err = 0.0;
  bool converged = true;
};

/// Transition probability p(t, x, y).
struct HeatValue {
  double t = 0.0;
  Site x, y;
  double value = 0.0;
  double err = 0.0;
  bool converged = true;
};

/// Result of one Brillouin-zone integral.
struct Estimate {
  double value = 0.0;
  double err = 0.0;
  bool converged = true;
};

struct GreenOptions {
  /// Relative tolerance; 0 selects the dimension default (1e-9 for d <= 3,
  /// 1e-7 for d = 4, 1e-6 beyond).
  double rel_tol = 0.0;
  int max_levels = 1100;
};

double default_green_tolerance(int d);

/// Brillouin-zone integrals (2 pi)^-d int g(phi(theta)) w(theta . r) dtheta over
/// graded dyadic shells around theta = 0, with per-level symbol values cached.
/// Safe to share between threads.
class GreenFunction {
 public:
  explicit GreenFunction(WalkSpec walk, GreenOptions options = {});

  const WalkSpec& walk() const { return walk_; }
  double tolerance() const { return tol_; }

  GreenValue green(double lambda, const Site& x, const Site& y) const;
  /// G_lambda(0, r) for each displacement r; lambda >= 0.
  std::vector<Estimate> green_many(double lambda, const std::vector<Site>& r) const;
  GreenValue green_zero(const Site& x, const Site& y) const;

  /// G_0(0, r) - G_lambda(0, r) as a single integral of lambda / ((-phi)(lambda - phi)).
  std::vector<Estimate> deficit_many(double lambda, const std::vector<Site>& r) const;
  double deficit(double lambda, const Site& x, const Site& y) const;

  /// G_lambda(0, 0) - G_lambda(0, r), finite at lambda = 0 for every walk.
  std::vector<Estimate> potential_many(double lambda, const std::vector<Site>& r) const;

  HeatValue transition_probability(double t, const Site& x, const Site& y) const;

  /// |int_0^t_max e^{-lambda t} p(t, x, y) dt - G_lambda(x, y)|.
  double laplace_consistency(double lambda, const Site& x, const Site& y, double t_max) const;

  /// (2 pi)^-d int dtheta / phi^2 = int_0^inf t p(t, 0, 0) dt, the slope of the
  /// deficit when it is linear in lambda. Requires d > 2 s.
  Estimate inverse_square_integral() const;
  /// The same constant from the time-domain integral of t p(t, 0, 0).
  Estimate inverse_square_time_domain() const;

  enum class Trig { Cos, OneMinusCos };

  struct Integrand {
    std::function<double(double)> g;  // of phi
    bool singular = false;            // origin singularity |theta|^-s_eff
    double s_eff = 0.0;
    double scale_hint = 0.0;          // theta where g turns over; 0 = none
    Trig trig = Trig::Cos;
  };

  std::vector<Estimate> integrate(const Integrand& f, const std::vector<Site>& r) const;

 private:
  struct Mesh {
    std::vector<double> theta;  // d per node
    std::vector<double> weight;
    std::vector<double> phi;
  };

  std::shared_ptr<const Mesh> mesh(int level, int sub, bool inner) const;
  Mesh build_mesh(int level, int sub, bool inner) const;

  WalkSpec walk_;
  double tol_;
  int max_levels_;
  bool orthant_;
  std::size_t cache_budget_;
  mutable std::mutex mutex_;
  mutable std::map<std::tuple<int, int, bool>, std::shared_ptr<const Mesh>> cache_;
  mutable std::size_t cached_nodes_ = 0;
};

GreenValue green_lambda(const WalkSpec& walk, double lambda, const Site& x, const Site& y,
                        double rel_tol = 0.0);
GreenValue green_zero(const WalkSpec& walk, const Site& x, const Site& y, double rel_tol = 0.0);
HeatValue transition_probability(const WalkSpec& walk, double t, const Site& x, const Site& y);
double laplace_consistency(const WalkSpec& walk, double lambda, const Site& x, const Site& y,
                           double t_max);
double green_deficit(const WalkSpec& walk, double lambda, const Site& x, const Site& y);

}  // namespace brw
