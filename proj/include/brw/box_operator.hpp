#pragma once

#include <Eigen/Core>
#include <vector>

#include "brw/lattice_walk.hpp"

namespace brw {

/// H_beta = A + beta sum_i delta_{x_i} restricted to the box {-L..L}^d with
/// absorbing boundary: rows and columns outside the box are dropped.
class BoxOperator {
 public:
  /// Dense heavy-tail operators are limited to this many sites.
  static constexpr std::size_t kDenseCap = 20000;
  /// Stencil operators are limited to this many sites.
  static constexpr std::size_t kSparseCap = std::size_t{1} << 22;

  BoxOperator(const WalkSpec& walk, const std::vector<Site>& sources, double beta, long L);

  std::size_t size() const { return n_; }
  long half_width() const { return L_; }
  int dim() const { return d_; }

  std::size_t index(const Site& x) const;
  bool inside(const Site& x) const;
  /// True for sites with |x|_inf = L.
  bool on_boundary(std::size_t i) const { return boundary_[i]; }

  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;

  /// Upper bound on the spectral radius.
  double norm_bound() const { return norm_bound_; }

 private:
  int d_;
  long L_;
  long side_;
  std::size_t n_;
  double a0_;
  bool dense_;
  std::vector<Site> stencil_;
  std::vector<double> stencil_rate_;
  std::vector<long> stencil_offset_;
  // a(z) over the difference box {-2L..2L}^d, row-major.
  std::vector<double> table_;
  std::vector<std::size_t> source_index_;
  double beta_;
  std::vector<char> boundary_;
  double norm_bound_;
};

}  // namespace brw
