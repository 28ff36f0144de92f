#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

namespace brw {

using LinearMap = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct EigenPairs {
  std::vector<double> values;  // descending
  std::vector<Eigen::VectorXd> vectors;
  std::vector<double> residuals;  // ||A y - theta y||
  bool converged = false;
};

/// Largest `k` eigenpairs of a symmetric operator by thick-restart Lanczos
/// with full reorthogonalization. The start vector is drawn from a fixed seed.
EigenPairs lanczos_top(const LinearMap& op, std::size_t n, std::size_t k, double tol,
                       std::size_t basis_size = 0, std::uint64_t seed = 0x9e3779b97f4a7c15ULL,
                       int max_restarts = 2000);

/// exp(tau A) v for symmetric A by a Lanczos projection with at most m
/// vectors. `error` receives the a-posteriori estimate of the truncation error.
Eigen::VectorXd expm_action(const LinearMap& op, const Eigen::VectorXd& v, double tau, int m,
                            double* error);

}  // namespace brw
