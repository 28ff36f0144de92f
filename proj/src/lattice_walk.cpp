#include "brw/lattice_walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "brw/error.hpp"
#include "brw/heavy_tail_symbol.hpp"

namespace brw {

namespace {

Site negate(const Site& z) {
  Site m(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) m[i] = -z[i];
  return m;
}

bool is_zero(const Site& z) {
  return std::all_of(z.begin(), z.end(), [](long c) { return c == 0; });
}

// Canonical representative of {z, -z}: first nonzero coordinate positive.
bool is_positive_rep(const Site& z) {
  for (long c : z) {
    if (c != 0) return c > 0;
  }
  return false;
}

double norm(const Site& z) {
  double s = 0.0;
  for (long c : z) s += static_cast<double>(c) * static_cast<double>(c);
  return std::sqrt(s);
}

double dot(std::span<const double> theta, const Site& z) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += theta[i] * static_cast<double>(z[i]);
  return s;
}

// Symmetrize raw rates into a map holding both z and -z.
// With `mirror`, a rate given for z alone is copied to -z instead of averaged.
std::map<Site, double> symmetrize(int d, const std::vector<Weight>& raw, bool& changed,
                                  bool mirror = false) {
  std::map<Site, double> input;
  for (const auto& w : raw) {
    if (static_cast<int>(w.z.size()) != d) {
      throw Error(ErrorCode::InvalidArgument, "jump vector has wrong dimension");
    }
    if (is_zero(w.z)) {
      throw Error(ErrorCode::InvalidArgument, "a(0) is derived from the off-diagonal rates");
    }
    if (!(w.rate >= 0.0) || !std::isfinite(w.rate)) {
      throw Error(ErrorCode::NegativeRate, "jump rates must be finite and nonnegative");
    }
    if (w.rate == 0.0) continue;
    input[w.z] += w.rate;
  }
  std::map<Site, double> out;
  changed = false;
  for (const auto& [z, r] : input) {
    const auto it = input.find(negate(z));
    const double other = it == input.end() ? (mirror ? r : 0.0) : it->second;
    if (other != r) changed = true;
    out[z] = 0.5 * (r + other);
    out[negate(z)] = 0.5 * (r + other);
  }
  return out;
}

// Quadrature nodes on S^{d-1} (d = 2, 3) for sphere means of H.
template <class F>
void for_sphere_nodes(int d, F&& f) {
  const double pi = std::numbers::pi;
  if (d == 2) {
    constexpr int n = 2048;
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * pi * (k + 0.5) / n;
      const double u[2] = {std::cos(t), std::sin(t)};
      f(std::span<const double>(u, 2), 1.0 / n);
    }
  } else if (d == 3) {
    // Midpoint in cos(polar) (exact for the measure), periodic in azimuth.
    constexpr int nz = 256, na = 256;
    for (int i = 0; i < nz; ++i) {
      const double c = -1.0 + (2.0 * i + 1.0) / nz;
      const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
      for (int k = 0; k < na; ++k) {
        const double t = 2.0 * pi * (k + 0.5) / na;
        const double u[3] = {s * std::cos(t), s * std::sin(t), c};
        f(std::span<const double>(u, 3), 1.0 / (nz * na));
      }
    }
  }
}

bool table_reflection_symmetric(const std::map<Site, double>& table) {
  for (const auto& [z, r] : table) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      Site f = z;
      f[i] = -f[i];
      const auto it = table.find(f);
      if (it == table.end() || it->second != r) return false;
    }
  }
  return true;
}

double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace

double WalkSpec::rate(const Site& z) const {
  if (static_cast<int>(z.size()) != dim_) {
    throw Error(ErrorCode::InvalidArgument, "site has wrong dimension");
  }
  if (is_zero(z)) return a0_;
  const auto it = rate_table_.find(z);
  if (it != rate_table_.end()) return it->second;
  if (kind_ == KernelKind::FiniteRange) return 0.0;
  const double r = norm(z);
  double h = 1.0;
  if (angular_) {
    std::vector<double> u(dim_);
    for (int i = 0; i < dim_; ++i) u[i] = static_cast<double>(z[i]) / r;
    h = angular_(u);
  }
  return scale_ * h * std::pow(r, -(dim_ + alpha_.value));
}

double WalkSpec::symbol(std::span<const double> theta) const {
  double phi = 0.0;
  if (isotropic_part_) phi = scale_ * angular_mean_ * (*isotropic_part_)(theta);
  for (const auto& w : anisotropic_) {
    const double s = std::sin(0.5 * dot(theta, w.z));
    phi -= 4.0 * w.rate * s * s;
  }
  for (const auto& w : half_) {
    const double s = std::sin(0.5 * dot(theta, w.z));
    phi -= 4.0 * w.rate * s * s;
  }
  return phi;
}

double WalkSpec::local_exponent() const {
  return kind_ == KernelKind::HeavyTail ? alpha_.value : 2.0;
}

WalkSpec build_finite_range_walk(int d, const std::vector<Weight>& weights) {
  if (d < 1) throw Error(ErrorCode::UnsupportedDimension, "dimension must be >= 1");
  if (weights.empty()) throw Error(ErrorCode::EmptyKernel, "no jump rates given");
  WalkSpec w;
  w.dim_ = d;
  w.kind_ = KernelKind::FiniteRange;
  w.rate_table_ = symmetrize(d, weights, w.symmetrized_);
  if (w.rate_table_.empty()) throw Error(ErrorCode::EmptyKernel, "all jump rates are zero");

  std::vector<Site> support;
  w.covariance_.assign(static_cast<std::size_t>(d) * d, 0.0);
  double total = 0.0;
  for (const auto& [z, r] : w.rate_table_) {
    w.weights_.push_back({z, r});
    support.push_back(z);
    total += r;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) w.covariance_[i * d + j] += static_cast<double>(z[i] * z[j]) * r;
    }
    if (is_positive_rep(z)) w.half_.push_back({z, r});
  }
  w.reflection_symmetric_ = table_reflection_symmetric(w.rate_table_);
  if (!generates_lattice(d, support)) {
    throw Error(ErrorCode::NotIrreducible, "support of the kernel does not generate Z^d");
  }
  w.a0_ = -total;
  w.variance_ = 0.0;
  for (int i = 0; i < d; ++i) w.variance_ += w.covariance_[i * d + i];
  w.local_coefficient_ = 0.5 * w.variance_ / d;
  return w;
}

WalkSpec build_heavy_tail_walk(int d, TailExponent alpha, AngularProfile angular, double scale,
                               int truncation_radius, const std::vector<Weight>& near_field) {
  if (d < 1) throw Error(ErrorCode::UnsupportedDimension, "dimension must be >= 1");
  if (d > 4) throw Error(ErrorCode::UnsupportedDimension, "heavy-tailed kernels support d <= 4");
  if (!(alpha.value > 0.0 && alpha.value < 2.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 2)");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  }
  if (truncation_radius < 1) {
    throw Error(ErrorCode::InvalidArgument, "truncation radius must be >= 1");
  }

  WalkSpec w;
  w.dim_ = d;
  w.kind_ = KernelKind::HeavyTail;
  w.alpha_ = alpha;
  w.scale_ = scale;
  w.truncation_radius_ = truncation_radius;
  w.variance_ = std::numeric_limits<double>::infinity();
  w.isotropic_part_ = std::make_shared<HeavyTailSymbol>(d, alpha.value);
  const double s = d + alpha.value;

  // In d = 1 every symmetric profile is constant.
  if (angular && d == 1) {
    const double u[1] = {1.0};
    const double h = angular(std::span<const double>(u, 1));
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw Error(ErrorCode::NonPositiveAngular, "angular profile must be positive");
    }
    w.scale_ = scale * h;
    angular = {};
  }
  if (angular) {
    if (d > 3) throw Error(ErrorCode::UnsupportedDimension, "anisotropic profiles support d <= 3");
    double mean = 0.0;
    bool reflect = true;
    for_sphere_nodes(d, [&](std::span<const double> u, double wt) {
      for (int i = 0; i < d; ++i) {
        std::vector<double> f(u.begin(), u.end());
        f[i] = -f[i];
        if (angular(f) != angular(u)) reflect = false;
      }
      const double h = angular(u);
      std::vector<double> m(u.begin(), u.end());
      for (double& c : m) c = -c;
      const double hm = angular(m);
      if (!(h > 0.0) || !(hm > 0.0) || !std::isfinite(h)) {
        throw Error(ErrorCode::NonPositiveAngular, "angular profile must be positive");
      }
      if (std::abs(h - hm) > 1e-12 * std::abs(h)) {
        throw Error(ErrorCode::InvalidArgument, "angular profile must be symmetric");
      }
      mean += wt * h;
    });
    w.angular_ = angular;
    w.angular_mean_ = mean;
    w.reflection_symmetric_ = reflect;

    // Mean-zero remainder summed directly inside the box.
    double max_dev = 0.0;
    Site z(d, -truncation_radius);
    while (true) {
      if (!is_zero(z) && is_positive_rep(z)) {
        const double r = norm(z);
        std::vector<double> u(d);
        for (int i = 0; i < d; ++i) u[i] = static_cast<double>(z[i]) / r;
        const double dev = angular(u) - mean;
        max_dev = std::max(max_dev, std::abs(dev));
        w.anisotropic_.push_back({z, scale * dev * std::pow(r, -s)});
      }
      int i = 0;
      for (; i < d; ++i) {
        if (++z[i] <= truncation_radius) break;
        z[i] = -truncation_radius;
      }
      if (i == d) break;
    }
    w.tail_bound_ = 2.0 * scale * max_dev * sphere_area(d) *
                    std::pow(static_cast<double>(truncation_radius), -alpha.value) / alpha.value;
  }

  // a0 from the isotropic lattice sum plus the directly summed corrections.
  double total = w.scale_ * w.angular_mean_ * w.isotropic_part_->lattice_zeta();
  for (const auto& a : w.anisotropic_) total += 2.0 * a.rate;

  if (!near_field.empty()) {
    bool changed = false;
    w.rate_table_ = symmetrize(d, near_field, changed, true);
    w.symmetrized_ = changed;
    w.reflection_symmetric_ = w.reflection_symmetric_ && table_reflection_symmetric(w.rate_table_);
    for (const auto& [z, r] : w.rate_table_) {
      if (r <= 0.0) throw Error(ErrorCode::NegativeRate, "near-field rates must be positive");
      w.weights_.push_back({z, r});
      if (!is_positive_rep(z)) continue;
      // Replace the power law (isotropic + anisotropic parts) at z and -z.
      const double r_norm = norm(z);
      double h = w.angular_mean_;
      if (w.angular_) {
        std::vector<double> u(d);
        for (int i = 0; i < d; ++i) u[i] = static_cast<double>(z[i]) / r_norm;
        h = w.angular_(u);
      }
      double power = w.scale_ * h * std::pow(r_norm, -s);
      if (w.angular_) {
        long sup = 0;
        for (long c : z) sup = std::max(sup, std::labs(c));
        // Outside the box only the isotropic part is represented.
        if (sup > truncation_radius) power = w.scale_ * w.angular_mean_ * std::pow(r_norm, -s);
      }
      const double delta = r - power;
      w.half_.push_back({z, delta});
      total += 2.0 * delta;
    }
  }
  w.a0_ = -total;
  w.local_coefficient_ = w.scale_ * w.angular_mean_ * w.isotropic_part_->singular_coefficient();
  if (w.tail_bound_ == 0.0) w.tail_bound_ = 1e-15 * total;
  return w;
}

WalkSpec simple_walk(int d) {
  std::vector<Weight> weights;
  for (int i = 0; i < d; ++i) {
    Site e(d, 0);
    e[i] = 1;
    weights.push_back({e, 0.5 / d});
    e[i] = -1;
    weights.push_back({e, 0.5 / d});
  }
  return build_finite_range_walk(d, weights);
}

Recurrence classify_recurrence(const WalkSpec& walk) {
  if (walk.kind() == KernelKind::FiniteRange) {
    return walk.dim() <= 2 ? Recurrence::G0Infinite : Recurrence::G0Finite;
  }
  if (walk.dim() == 1) {
    const auto& a = walk.alpha();
    const bool at_least_one = a.exact ? (*a.exact >= Rational::of(1, 1)) : a.value >= 1.0;
    return at_least_one ? Recurrence::G0Infinite : Recurrence::G0Finite;
  }
  return Recurrence::G0Finite;
}

bool generates_lattice(int d, const std::vector<Site>& vectors) {
  std::vector<std::vector<long>> rows;
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != d) {
      throw Error(ErrorCode::InvalidArgument, "vector has wrong dimension");
    }
    rows.push_back(v);
  }
  // Integer row echelon form by Euclidean elimination; the lattice index is
  // the product of the pivots.
  std::size_t pivot_row = 0;
  for (int c = 0; c < d; ++c) {
    while (true) {
      std::size_t best = rows.size();
      for (std::size_t r = pivot_row; r < rows.size(); ++r) {
        if (rows[r][c] != 0 && (best == rows.size() || std::labs(rows[r][c]) < std::labs(rows[best][c]))) {
          best = r;
        }
      }
      if (best == rows.size()) return false;
      std::swap(rows[pivot_row], rows[best]);
      bool cleared = true;
      for (std::size_t r = pivot_row + 1; r < rows.size(); ++r) {
        if (rows[r][c] == 0) continue;
        const long q = rows[r][c] / rows[pivot_row][c];
        for (int k = c; k < d; ++k) rows[r][k] -= q * rows[pivot_row][k];
        if (rows[r][c] != 0) cleared = false;
      }
      if (cleared) break;
    }
    if (std::labs(rows[pivot_row][c]) != 1) return false;
    ++pivot_row;
  }
  return true;
}

BranchingLaw::BranchingLaw(std::map<int, double> rates) : rates_(std::move(rates)) {
  double total = 0.0;
  double first = 0.0;
  for (const auto& [n, b] : rates_) {
    if (n < 0 || n == 1) {
      throw Error(ErrorCode::InvalidArgument, "offspring rates are keyed by n >= 0, n != 1");
    }
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw Error(ErrorCode::NegativeRate, "offspring rates must be nonnegative");
    }
    total += b;
    first += n * b;
  }
  b1_ = -total;
  beta1_ = first + b1_;
}

BranchingLaw BranchingLaw::binary_fission(double beta) { return BranchingLaw({{2, beta}}); }

}  // namespace brw
