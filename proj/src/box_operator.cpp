#include "brw/box_operator.hpp"

#include <cmath>

#include "brw/error.hpp"

namespace brw {

BoxOperator::BoxOperator(const WalkSpec& walk, const std::vector<Site>& sources, double beta, long L)
    : d_(walk.dim()), L_(L), side_(2 * L + 1), a0_(walk.a0()), dense_(walk.heavy_tail()), beta_(beta) {
  if (L < 1) throw Error(ErrorCode::BoxTooSmall, "box half-width must be >= 1");
  double n = 1.0;
  for (int i = 0; i < d_; ++i) n *= static_cast<double>(side_);
  const double cap = static_cast<double>(dense_ ? kDenseCap : kSparseCap);
  if (n > cap) {
    throw Error(ErrorCode::OutOfMemoryBudget,
                "box has " + std::to_string(static_cast<long long>(n)) + " sites, cap is " +
                    std::to_string(static_cast<long long>(cap)));
  }
  n_ = static_cast<std::size_t>(n);
  for (const auto& x : sources) {
    if (static_cast<int>(x.size()) != d_) throw Error(ErrorCode::InvalidArgument, "source has wrong dimension");
    if (!inside(x)) throw Error(ErrorCode::BoxTooSmall, "source lies outside the box");
    source_index_.push_back(index(x));
  }
  boundary_.assign(n_, 0);
  std::vector<long> c(d_, -L_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (long v : c) {
      if (std::labs(v) == L_) boundary_[i] = 1;
    }
    for (int k = 0; k < d_; ++k) {
      if (++c[k] <= L_) break;
      c[k] = -L_;
    }
  }

  if (!dense_) {
    for (const auto& w : walk.weights()) {
      stencil_.push_back(w.z);
      stencil_rate_.push_back(w.rate);
      long off = 0, stride = 1;
      for (int k = 0; k < d_; ++k) {
        off += w.z[k] * stride;
        stride *= side_;
      }
      stencil_offset_.push_back(off);
    }
  } else {
    const long side2 = 4 * L_ + 1;
    std::size_t m = 1;
    for (int k = 0; k < d_; ++k) m *= static_cast<std::size_t>(side2);
    table_.resize(m);
    Site z(d_, -2 * L_);
    for (std::size_t i = 0; i < m; ++i) {
      table_[i] = walk.rate(z);
      for (int k = 0; k < d_; ++k) {
        if (++z[k] <= 2 * L_) break;
        z[k] = -2 * L_;
      }
    }
  }
  norm_bound_ = 2.0 * std::abs(a0_) + std::abs(beta_);
}

bool BoxOperator::inside(const Site& x) const {
  for (long v : x) {
    if (std::labs(v) > L_) return false;
  }
  return true;
}

std::size_t BoxOperator::index(const Site& x) const {
  std::size_t idx = 0, stride = 1;
  for (int k = 0; k < d_; ++k) {
    idx += static_cast<std::size_t>(x[k] + L_) * stride;
    stride *= static_cast<std::size_t>(side_);
  }
  return idx;
}

void BoxOperator::apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
  out.resize(static_cast<Eigen::Index>(n_));
  if (!dense_) {
    std::vector<long> c(d_, -L_);
    const std::size_t ns = stencil_.size();
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = a0_ * in[static_cast<Eigen::Index>(i)];
      for (std::size_t s = 0; s < ns; ++s) {
        const Site& z = stencil_[s];
        bool ok = true;
        for (int k = 0; k < d_ && ok; ++k) {
          const long v = c[k] + z[k];
          ok = v >= -L_ && v <= L_;
        }
        if (ok) acc += stencil_rate_[s] * in[static_cast<Eigen::Index>(static_cast<long>(i) + stencil_offset_[s])];
      }
      out[static_cast<Eigen::Index>(i)] = acc;
      for (int k = 0; k < d_; ++k) {
        if (++c[k] <= L_) break;
        c[k] = -L_;
      }
    }
  } else {
    // table index of x_i - x_j is D(i) - D(j) + centre, D in the doubled box.
    const long side2 = 4 * L_ + 1;
    std::vector<long> D(n_);
    long centre = 0;
    {
      std::vector<long> c(d_, -L_);
      for (std::size_t i = 0; i < n_; ++i) {
        long v = 0, stride = 1;
        for (int k = 0; k < d_; ++k) {
          v += c[k] * stride;
          stride *= side2;
        }
        D[i] = v;
        for (int k = 0; k < d_; ++k) {
          if (++c[k] <= L_) break;
          c[k] = -L_;
        }
      }
      long stride = 1;
      for (int k = 0; k < d_; ++k) {
        centre += 2 * L_ * stride;
        stride *= side2;
      }
    }
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = &table_[static_cast<std::size_t>(D[i] + centre)];
      double acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j) acc += row[-D[j]] * in[static_cast<Eigen::Index>(j)];
      out[static_cast<Eigen::Index>(i)] = acc;
    }
  }
  for (std::size_t s : source_index_) out[static_cast<Eigen::Index>(s)] += beta_ * in[static_cast<Eigen::Index>(s)];
}

}  // namespace brw
