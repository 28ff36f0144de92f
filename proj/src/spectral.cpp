#include "brw/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "brw/box_operator.hpp"
#include "brw/error.hpp"
#include "brw/krylov.hpp"
#include "brw/roots.hpp"

namespace brw {

namespace {

Site canonical(Site r) {
  for (long c : r) {
    if (c == 0) continue;
    if (c < 0) {
      for (long& v : r) v = -v;
    }
    break;
  }
  return r;
}

std::vector<double> descending_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

void SourceConfig::validate(int d) const {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "at least one source is required");
  std::set<Site> seen;
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != d) {
      throw Error(ErrorCode::InvalidArgument, "source point has wrong dimension");
    }
    if (!seen.insert(p).second) throw Error(ErrorCode::CoincidentSources, "source points must be distinct");
  }
  if (!std::isfinite(beta)) throw Error(ErrorCode::InvalidArgument, "beta must be finite");
}

SpectralSolver::SpectralSolver(const WalkSpec& walk, std::vector<Site> points)
    : SpectralSolver(std::make_shared<const GreenFunction>(walk), std::move(points)) {}

SpectralSolver::SpectralSolver(std::shared_ptr<const GreenFunction> green, std::vector<Site> points)
    : green_(std::move(green)), points_(std::move(points)) {
  SourceConfig{points_, 0.0}.validate(green_->walk().dim());
  transient_ = classify_recurrence(green_->walk()) == Recurrence::G0Finite;
  const std::size_t n = points_.size();
  std::map<Site, int> index;
  rep_of_.assign(n, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Site r(points_[i].size());
      for (std::size_t k = 0; k < r.size(); ++k) r[k] = points_[j][k] - points_[i][k];
      r = canonical(r);
      auto it = index.find(r);
      if (it == index.end()) {
        it = index.emplace(r, static_cast<int>(reps_.size())).first;
        reps_.push_back(r);
      }
      rep_of_[i][j] = it->second;
    }
  }
  const Eigen::Index N = static_cast<Eigen::Index>(n);
  if (transient_) {
    const auto g = green_->green_many(0.0, reps_);
    GammaMatrix m{Eigen::MatrixXd(N, N), Eigen::MatrixXd(N, N)};
    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index j = 0; j < N; ++j) {
        const auto& e = g[static_cast<std::size_t>(rep_of_[i][j])];
        m.value(i, j) = e.value;
        m.err(i, j) = e.err;
      }
    }
    gamma0_ = m;
    gamma_zero_ = descending_eigenvalues(m.value);
  } else {
    // gamma_0 diverges with G_lambda(0,0); the others tend to the eigenvalues
    // of -A_0 compressed to the complement of the all-ones vector, where
    // A_0(r) = G_0(0,0) - G_0(0,r) is the finite potential kernel.
    gamma_zero_.assign(n, 0.0);
    gamma_zero_[0] = std::numeric_limits<double>::infinity();
    if (n > 1) {
      const auto a = green_->potential_many(0.0, reps_);
      Eigen::MatrixXd A(N, N);
      for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < N; ++j) A(i, j) = a[static_cast<std::size_t>(rep_of_[i][j])].value;
      }
      Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(N, N);
      basis.col(0).setConstant(1.0);
      const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
      const Eigen::MatrixXd Q = (qr.householderQ() * Eigen::MatrixXd::Identity(N, N)).rightCols(N - 1);
      const auto rest = descending_eigenvalues(-Q.transpose() * A * Q);
      for (std::size_t i = 1; i < n; ++i) gamma_zero_[i] = rest[i - 1];
    }
  }
}

GammaMatrix SpectralSolver::gamma(double lambda) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be finite and nonnegative");
  }
  const Eigen::Index N = static_cast<Eigen::Index>(points_.size());
  GammaMatrix m{Eigen::MatrixXd(N, N), Eigen::MatrixXd(N, N)};
  if (transient_) {
    if (lambda == 0.0) return *gamma0_;
    if (lambda >= std::abs(walk().a0())) {
      // Far from 0 the subtraction G_0 - deficit loses the small off-diagonal
      // entries, so integrate G_lambda directly.
      const auto g = green_->green_many(lambda, reps_);
      for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < N; ++j) {
          const auto& e = g[static_cast<std::size_t>(rep_of_[i][j])];
          m.value(i, j) = e.value;
          m.err(i, j) = e.err;
        }
      }
      return m;
    }
    const auto dfc = green_->deficit_many(lambda, reps_);
    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index j = 0; j < N; ++j) {
        const auto& e = dfc[static_cast<std::size_t>(rep_of_[i][j])];
        m.value(i, j) = gamma0_->value(i, j) - e.value;
        m.err(i, j) = gamma0_->err(i, j) + e.err;
      }
    }
    return m;
  }
  if (lambda == 0.0) throw Error(ErrorCode::NotTransient, "Gamma(0) is infinite for a recurrent walk");
  const Estimate g = green_->green_many(lambda, {Site(points_[0].size(), 0)})[0];
  std::vector<Estimate> a(reps_.size());
  if (points_.size() > 1) a = green_->potential_many(lambda, reps_);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      const auto& e = a[static_cast<std::size_t>(rep_of_[i][j])];
      m.value(i, j) = i == j ? g.value : g.value - e.value;
      m.err(i, j) = g.err + (i == j ? 0.0 : e.err);
    }
  }
  return m;
}

std::vector<double> SpectralSolver::sorted_eigen(const GammaMatrix& g, bool check_gap) const {
  auto ev = descending_eigenvalues(g.value);
  if (check_gap && ev.size() >= 2) {
    // The diagonal is one shared value, so only off-diagonal errors move the gap.
    Eigen::MatrixXd off = g.err;
    off.diagonal().setZero();
    const double noise = static_cast<double>(ev.size()) * off.maxCoeff();
    if (!(ev[0] - ev[1] > noise)) {
      throw Error(ErrorCode::GapNotResolved, "gamma_0 - gamma_1 is below the quadrature error");
    }
  }
  return ev;
}

std::vector<double> SpectralSolver::gamma_eigenvalues(double lambda) const {
  return sorted_eigen(gamma(lambda), true);
}

double SpectralSolver::beta_critical() const { return transient_ ? 1.0 / gamma_zero_[0] : 0.0; }

std::optional<double> SpectralSolver::beta_c1() const {
  if (points_.size() < 2 || !(gamma_zero_[1] > 0.0)) return std::nullopt;
  return 1.0 / gamma_zero_[1];
}

std::optional<double> SpectralSolver::eigenvalue(std::size_t index, double beta, double* residual) const {
  if (index >= points_.size()) throw Error(ErrorCode::InvalidArgument, "eigenvalue index out of range");
  if (!(beta > 0.0) || !(beta * gamma_zero_[index] > 1.0)) return std::nullopt;
  const double target = 1.0 / beta;
  auto f = [&](double lambda) { return sorted_eigen(gamma(lambda), false)[index] - target; };
  const double hi = beta * static_cast<double>(points_.size()) * std::abs(walk().a0()) + beta;
  const RootResult r = solve_decreasing(f, hi);
  // The ordering only has to be resolved where the root is reported.
  gamma_eigenvalues(r.x);
  if (residual) *residual = beta * r.residual;
  return r.x;
}

std::optional<double> SpectralSolver::lambda0(double beta) const { return eigenvalue(0, beta); }

SpectralResult SpectralSolver::positive_spectrum(double beta) const {
  SpectralResult out;
  out.beta = beta;
  out.beta_c = beta_critical();
  out.beta_c1 = beta_c1();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    double res = 0.0;
    const auto root = eigenvalue(i, beta, &res);
    if (!root) break;  // gamma_i(0+) is nonincreasing in i
    out.eigenvalues.push_back(*root);
    out.residuals.push_back(res);
  }
  if (out.eigenvalues.size() >= 2) {
    out.leading_simple = out.eigenvalues[0] - out.eigenvalues[1] > 1e-8 * out.eigenvalues[0];
  }
  out.weakly_supercritical = out.eigenvalues.size() == 1 && beta > out.beta_c &&
                             (!out.beta_c1 || beta < *out.beta_c1);
  return out;
}

GammaMatrix gamma_matrix(const WalkSpec& walk, const SourceConfig& sources, double lambda) {
  return SpectralSolver(walk, sources.points).gamma(lambda);
}

std::vector<double> gamma_eigenvalues(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) throw Error(ErrorCode::InvalidArgument, "matrix must be square");
  if (!matrix.isApprox(matrix.transpose(), 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "matrix must be symmetric");
  }
  auto ev = descending_eigenvalues(matrix);
  if (ev.size() >= 2) {
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(ev.size()) *
                         std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if (!(ev[0] - ev[1] > noise)) throw Error(ErrorCode::GapNotResolved, "leading eigenvalue is not separated");
  }
  return ev;
}

double beta_critical(const WalkSpec& walk, const SourceConfig& sources) {
  return SpectralSolver(walk, sources.points).beta_critical();
}

std::optional<double> lambda0(const WalkSpec& walk, const SourceConfig& sources) {
  return SpectralSolver(walk, sources.points).lambda0(sources.beta);
}

SpectralResult positive_spectrum(const WalkSpec& walk, const SourceConfig& sources) {
  return SpectralSolver(walk, sources.points).positive_spectrum(sources.beta);
}

TruncatedEigen truncated_operator_eigen(const WalkSpec& walk, const SourceConfig& sources, long L,
                                        std::size_t k) {
  sources.validate(walk.dim());
  const BoxOperator op(walk, sources.points, sources.beta, L);
  if (k == 0) k = sources.size() + 1;
  const auto pairs = lanczos_top([&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { op.apply(in, out); },
                                 op.size(), k, 1e-10, std::max<std::size_t>(2 * k + 60, 100));
  TruncatedEigen out;
  out.half_width = L;
  out.sites = op.size();
  out.eigenvalues = pairs.values;
  out.residuals = pairs.residuals;
  out.converged = pairs.converged;
  if (!pairs.vectors.empty()) {
    const auto& y = pairs.vectors[0];
    const double total = y.squaredNorm();
    double edge = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i) {
      if (op.on_boundary(i)) edge += y[static_cast<Eigen::Index>(i)] * y[static_cast<Eigen::Index>(i)];
    }
    out.boundary_mass = edge / total;
  }
  return out;
}

}  // namespace brw
