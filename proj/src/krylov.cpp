#include "brw/krylov.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "brw/error.hpp"

namespace brw {

namespace {

// Two passes of classical Gram-Schmidt against the first `count` columns.
void orthogonalize(const std::vector<Eigen::VectorXd>& basis, std::size_t count, Eigen::VectorXd& w,
                   Eigen::VectorXd* coeffs) {
  if (coeffs) coeffs->setZero(static_cast<Eigen::Index>(count));
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < count; ++i) {
      const double h = basis[i].dot(w);
      w -= h * basis[i];
      if (coeffs) (*coeffs)[static_cast<Eigen::Index>(i)] += h;
    }
  }
}

}  // namespace

EigenPairs lanczos_top(const LinearMap& op, std::size_t n, std::size_t k, double tol,
                       std::size_t basis_size, std::uint64_t seed, int max_restarts) {
  if (n == 0 || k == 0) throw Error(ErrorCode::InvalidArgument, "empty eigenproblem");
  k = std::min(k, n);
  std::size_t m = basis_size ? basis_size : std::max<std::size_t>(2 * k + 40, 80);
  m = std::min(m, n);
  const std::size_t keep = std::min(m - 1, std::max(k + 10, m / 2));

  std::vector<Eigen::VectorXd> V(m);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  V[0].resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) V[0][static_cast<Eigen::Index>(i)] = normal(rng);
  V[0].normalize();

  EigenPairs out;
  std::size_t start = 0;
  Eigen::VectorXd w, h;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    double beta_last = 0.0;
    std::size_t used = m;
    for (std::size_t j = start; j < m; ++j) {
      op(V[j], w);
      orthogonalize(V, j + 1, w, &h);
      for (std::size_t i = 0; i <= j; ++i) {
        H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h[static_cast<Eigen::Index>(i)];
        H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = h[static_cast<Eigen::Index>(i)];
      }
      beta_last = w.norm();
      if (beta_last < 1e-14 * std::max(1.0, std::abs(h[static_cast<Eigen::Index>(j)]))) {
        // Invariant subspace found.
        used = j + 1;
        beta_last = 0.0;
        break;
      }
      if (j + 1 < m) {
        V[j + 1] = w / beta_last;
        H(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(j)) = beta_last;
        H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j + 1)) = beta_last;
      }
    }
    const auto Hu = H.topLeftCorner(static_cast<Eigen::Index>(used), static_cast<Eigen::Index>(used));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hu);
    const Eigen::VectorXd& theta = es.eigenvalues();  // ascending
    const Eigen::MatrixXd& S = es.eigenvectors();
    const std::size_t kk = std::min(k, used);
    double scale = 1.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) scale = std::max(scale, std::abs(theta[i]));
    bool ok = true;
    std::vector<double> res(kk);
    for (std::size_t q = 0; q < kk; ++q) {
      const Eigen::Index col = static_cast<Eigen::Index>(used - 1 - q);
      res[q] = std::abs(beta_last * S(static_cast<Eigen::Index>(used - 1), col));
      if (res[q] > tol * scale) ok = false;
    }
    if (ok || restart == max_restarts || used < m) {
      out.converged = ok || used < m;
      for (std::size_t q = 0; q < kk; ++q) {
        const Eigen::Index col = static_cast<Eigen::Index>(used - 1 - q);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < used; ++i) y += S(static_cast<Eigen::Index>(i), col) * V[i];
        out.values.push_back(theta[col]);
        out.vectors.push_back(std::move(y));
        out.residuals.push_back(res[q]);
      }
      return out;
    }
    // Thick restart: keep the top Ritz vectors, continue from the residual.
    std::vector<Eigen::VectorXd> kept(keep);
    for (std::size_t q = 0; q < keep; ++q) {
      const Eigen::Index col = static_cast<Eigen::Index>(used - 1 - q);
      kept[q] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < used; ++i) kept[q] += S(static_cast<Eigen::Index>(i), col) * V[i];
    }
    H.setZero();
    for (std::size_t q = 0; q < keep; ++q) {
      V[q] = std::move(kept[q]);
      H(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q)) = theta[static_cast<Eigen::Index>(used - 1 - q)];
    }
    V[keep] = w / beta_last;
    orthogonalize(V, keep, V[keep], nullptr);
    V[keep].normalize();
    start = keep;
  }
  return out;
}

Eigen::VectorXd expm_action(const LinearMap& op, const Eigen::VectorXd& v, double tau, int m,
                            double* error) {
  const double vnorm = v.norm();
  if (vnorm == 0.0) {
    if (error) *error = 0.0;
    return v;
  }
  const std::size_t n = static_cast<std::size_t>(v.size());
  m = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(m), n));
  std::vector<Eigen::VectorXd> V;
  V.push_back(v / vnorm);
  std::vector<double> alpha, beta;
  Eigen::VectorXd w;
  double beta_last = 0.0;
  for (int j = 0; j < m; ++j) {
    op(V[static_cast<std::size_t>(j)], w);
    const double a = V[static_cast<std::size_t>(j)].dot(w);
    alpha.push_back(a);
    orthogonalize(V, static_cast<std::size_t>(j) + 1, w, nullptr);
    beta_last = w.norm();
    if (beta_last < 1e-14 * std::max(1.0, std::abs(a))) {
      beta_last = 0.0;
      break;
    }
    if (j + 1 < m) {
      beta.push_back(beta_last);
      V.push_back(w / beta_last);
    }
  }
  const Eigen::Index size = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    T(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < size) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const Eigen::VectorXd ex = (tau * es.eigenvalues().array()).exp();
  const Eigen::VectorXd coeff = es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().row(0).transpose();
  if (error) *error = vnorm * beta_last * std::abs(coeff[size - 1]);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (Eigen::Index i = 0; i < size; ++i) out += coeff[i] * V[static_cast<std::size_t>(i)];
  return vnorm * out;
}

}  // namespace brw
