#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "brw/green.hpp"

namespace brw {

/// N distinct source points sharing the intensity beta.
struct SourceConfig {
  std::vector<Site> points;
  double beta = 0.0;

  std::size_t size() const { return points.size(); }
  /// CoincidentSources for repeated points, InvalidArgument for empty or
  /// wrong-dimension input.
  void validate(int d) const;
};

struct SpectralResult {
  double beta = 0.0;
  double beta_c = 0.0;
  std::vector<double> eigenvalues;  // descending, positive
  std::vector<double> residuals;    // beta gamma_i(lambda_i) - 1
  bool leading_simple = true;
  bool weakly_supercritical = false;
  std::optional<double> beta_c1;
};

struct GammaMatrix {
  Eigen::MatrixXd value;
  Eigen::MatrixXd err;
};

/// Gamma(lambda) = [G_lambda(x_i, x_j)] and the eigen-equation machinery.
/// Green integrals are grouped by distinct displacement so each is computed
/// once per lambda.
class SpectralSolver {
 public:
  SpectralSolver(std::shared_ptr<const GreenFunction> green, std::vector<Site> points);
  SpectralSolver(const WalkSpec& walk, std::vector<Site> points);

  const WalkSpec& walk() const { return green_->walk(); }
  const std::vector<Site>& points() const { return points_; }
  bool transient() const { return transient_; }

  /// lambda >= 0; NotTransient at 0 for recurrent walks.
  GammaMatrix gamma(double lambda) const;
  /// Descending eigenvalues of Gamma(lambda); GapNotResolved if gamma_0 - gamma_1
  /// is below the entry error.
  std::vector<double> gamma_eigenvalues(double lambda) const;
  /// gamma_i(0+) for every i; +inf for i = 0 of a recurrent walk.
  const std::vector<double>& gamma_at_zero() const { return gamma_zero_; }

  double beta_critical() const;
  /// 1 / gamma_1(0+), absent for N = 1.
  std::optional<double> beta_c1() const;
  /// Root of gamma_index(lambda) = 1/beta, or nothing when none is positive.
  /// GapNotResolved when gamma_0 - gamma_1 at the root is within the noise.
  std::optional<double> eigenvalue(std::size_t index, double beta, double* residual = nullptr) const;
  std::optional<double> lambda0(double beta) const;
  SpectralResult positive_spectrum(double beta) const;

 private:
  std::vector<double> sorted_eigen(const GammaMatrix& g, bool check_gap) const;

  std::shared_ptr<const GreenFunction> green_;
  std::vector<Site> points_;
  bool transient_;
  std::vector<Site> reps_;                // distinct displacements up to sign
  std::vector<std::vector<int>> rep_of_;  // N x N index into reps_
  std::optional<GammaMatrix> gamma0_;
  std::vector<double> gamma_zero_;
};

GammaMatrix gamma_matrix(const WalkSpec& walk, const SourceConfig& sources, double lambda);
/// Descending eigenvalues of a symmetric matrix; GapNotResolved when N >= 2
/// and the top gap is within rounding of the matrix scale.
std::vector<double> gamma_eigenvalues(const Eigen::MatrixXd& matrix);
double beta_critical(const WalkSpec& walk, const SourceConfig& sources);
/// Absent when beta <= beta_c.
std::optional<double> lambda0(const WalkSpec& walk, const SourceConfig& sources);
SpectralResult positive_spectrum(const WalkSpec& walk, const SourceConfig& sources);

struct TruncatedEigen {
  long half_width = 0;
  std::size_t sites = 0;
  std::vector<double> eigenvalues;  // descending
  std::vector<double> residuals;
  /// Squared mass of the top eigenvector on the box boundary.
  double boundary_mass = 0.0;
  bool converged = false;
};

/// Top k eigenvalues of H_beta restricted to {-L..L}^d (default k = N + 1).
TruncatedEigen truncated_operator_eigen(const WalkSpec& walk, const SourceConfig& sources, long L,
                                        std::size_t k = 0);

}  // namespace brw
