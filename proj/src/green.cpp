#include "brw/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "brw/error.hpp"
#include "brw/parallel.hpp"
#include "brw/quadrature.hpp"

namespace brw {

namespace {

constexpr std::size_t kBlock = 2048;
constexpr double kMassFloor = 1e-14;

int rule_points_per_axis(int d) {
  switch (d) {
    case 1: return 20;
    case 2: return 12;
    case 3: return 8;
    case 4: return 6;
    default: return 7;
  }
}

const PanelRule& panel_rule(int d) {
  static std::mutex m;
  static std::map<int, PanelRule> rules;
  std::lock_guard<std::mutex> lock(m);
  auto it = rules.find(d);
  if (it == rules.end()) it = rules.emplace(d, default_panel_rule(d)).first;
  return it->second;
}

Site difference(const Site& x, const Site& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "points differ in dimension");
  Site r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = y[i] - x[i];
  return r;
}

void check_dim(const WalkSpec& w, const Site& r) {
  if (static_cast<int>(r.size()) != w.dim()) {
    throw Error(ErrorCode::InvalidArgument, "point dimension does not match the walk");
  }
}

}  // namespace

double default_green_tolerance(int d) {
  if (d <= 3) return 1e-9;
  if (d == 4) return 1e-7;
  return 1e-6;
}

GreenFunction::GreenFunction(WalkSpec walk, GreenOptions options)
    : walk_(std::move(walk)),
      tol_(options.rel_tol > 0.0 ? options.rel_tol : default_green_tolerance(walk_.dim())),
      max_levels_(options.max_levels),
      orthant_(walk_.reflection_symmetric()),
      cache_budget_(std::size_t{24} << 20) {
  if (walk_.dim() > 6) throw Error(ErrorCode::UnsupportedDimension, "Green functions support d <= 6");
}

GreenFunction::Mesh GreenFunction::build_mesh(int level, int sub, bool inner) const {
  const int d = walk_.dim();
  const PanelRule& rule = panel_rule(d);
  const double h = std::numbers::pi * std::ldexp(1.0, -level);
  const double half = 0.5 * h;
  // Orthant meshes use the evenness of phi in every coordinate; otherwise
  // only theta -> -theta is used and theta_0 >= 0.
  const double factor = (orthant_ ? std::ldexp(1.0, d) : 2.0) / std::pow(2.0 * std::numbers::pi, d);

  std::vector<std::vector<double>> lows;  // lower corners of cells of side `half`
  if (inner) {
    std::vector<double> lo(d, orthant_ ? 0.0 : -half);
    lo[0] = 0.0;
    lows.push_back(lo);
  } else {
    const int lo_idx = orthant_ ? 0 : -2;
    std::vector<int> c(d, lo_idx);
    c[0] = 0;
    while (true) {
      bool interior = true;
      for (int i = 0; i < d; ++i) interior = interior && (c[i] == 0 || c[i] == -1);
      if (!interior) {
        std::vector<double> lo(d);
        for (int i = 0; i < d; ++i) lo[i] = c[i] * half;
        lows.push_back(lo);
      }
      int i = 0;
      for (; i < d; ++i) {
        if (++c[i] <= 1) break;
        c[i] = (i == 0) ? 0 : lo_idx;
      }
      if (i == d) break;
    }
  }

  Mesh m;
  for (const auto& lo : lows) {
    // Inner half-space cells are twice as wide off the first axis.
    std::vector<double> side(d, half);
    if (inner && !orthant_) {
      for (int i = 1; i < d; ++i) side[i] = h;
    }
    std::vector<int> s(d, 0);
    std::vector<int> subs(d, sub);
    if (inner && !orthant_) {
      for (int i = 1; i < d; ++i) subs[i] = 2 * sub;
    }
    double jac = factor;
    for (int i = 0; i < d; ++i) jac *= 0.5 * side[i] / subs[i];
    while (true) {
      for (std::size_t p = 0; p < rule.size(); ++p) {
        for (int i = 0; i < d; ++i) {
          const double width = side[i] / subs[i];
          const double a = lo[i] + s[i] * width;
          m.theta.push_back(a + 0.5 * width * (rule.nodes[p * d + i] + 1.0));
        }
        m.weight.push_back(jac * rule.weights[p]);
      }
      int i = 0;
      for (; i < d; ++i) {
        if (++s[i] < subs[i]) break;
        s[i] = 0;
      }
      if (i == d) break;
    }
  }
  const std::size_t n = m.weight.size();
  m.phi.resize(n);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t p = b * kBlock; p < end; ++p) {
      m.phi[p] = walk_.symbol(std::span<const double>(&m.theta[p * d], d));
    }
  });
  return m;
}

std::shared_ptr<const GreenFunction::Mesh> GreenFunction::mesh(int level, int sub, bool inner) const {
  const auto key = std::make_tuple(level, sub, inner);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto built = std::make_shared<const Mesh>(build_mesh(level, sub, inner));
  std::lock_guard<std::mutex> lock(mutex_);
  const std::size_t nodes = built->weight.size() * static_cast<std::size_t>(walk_.dim() + 2);
  if (cached_nodes_ + nodes <= cache_budget_) {
    cache_.emplace(key, built);
    cached_nodes_ += nodes;
  }
  return built;
}

std::vector<Estimate> GreenFunction::integrate(const Integrand& f, const std::vector<Site>& rs) const {
  const int d = walk_.dim();
  const std::size_t nr = rs.size();
  for (const auto& r : rs) check_dim(walk_, r);
  long max_l1 = 0;
  for (const auto& r : rs) {
    long l1 = 0;
    for (long c : r) l1 += std::labs(c);
    max_l1 = std::max(max_l1, l1);
  }
  const double resolve = rule_points_per_axis(d) / 3.0;
  auto subdivisions = [&](double side) {
    return std::max(1, static_cast<int>(std::ceil(side * static_cast<double>(max_l1) / resolve)));
  };

  int min_level = 2;
  if (f.scale_hint > 0.0) {
    const double k = std::log2(std::numbers::pi / f.scale_hint);
    if (k > min_level) min_level = static_cast<int>(std::ceil(k)) + 1;
  }
  const double ratio = f.singular ? std::pow(2.0, f.s_eff - d) : 0.0;
  if (f.singular && !(ratio < 1.0)) {
    throw Error(ErrorCode::PreconditionViolated, "integrand is not integrable at the origin");
  }

  // Per-axis largest |r_i|; cos(m theta_i) for m up to it comes from the
  // Chebyshev recurrence once per node and is shared by all displacements.
  std::vector<long> axis_max(static_cast<std::size_t>(d), 0);
  std::vector<std::size_t> axis_offset(static_cast<std::size_t>(d) + 1, 0);
  for (const auto& r : rs) {
    for (int i = 0; i < d; ++i) axis_max[i] = std::max(axis_max[i], std::labs(r[i]));
  }
  for (int i = 0; i < d; ++i) axis_offset[i + 1] = axis_offset[i] + static_cast<std::size_t>(axis_max[i]) + 1;

  // Accumulates sum_p w g(phi) trig_j over a mesh, blockwise in fixed order.
  auto accumulate = [&](const Mesh& m, std::vector<double>& out, double* mass) {
    const std::size_t n = m.weight.size();
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(blocks * (nr + 1), 0.0);
    parallel_for(blocks, [&](std::size_t b) {
      double* acc = &partial[b * (nr + 1)];
      std::vector<double> cosm(axis_offset[d]);
      const std::size_t end = std::min(n, (b + 1) * kBlock);
      for (std::size_t p = b * kBlock; p < end; ++p) {
        const double wg = m.weight[p] * f.g(m.phi[p]);
        acc[nr] += std::abs(wg);
        const double* th = &m.theta[p * d];
        if (orthant_) {
          for (int i = 0; i < d; ++i) {
            double* c = &cosm[axis_offset[i]];
            c[0] = 1.0;
            if (axis_max[i] == 0) continue;
            const double c1 = std::cos(th[i]);
            c[1] = c1;
            for (long k = 2; k <= axis_max[i]; ++k) c[k] = 2.0 * c1 * c[k - 1] - c[k - 2];
          }
        }
        for (std::size_t j = 0; j < nr; ++j) {
          const Site& r = rs[j];
          double t;
          if (orthant_) {
            // Average of cos(theta . r) over coordinate sign flips.
            if (f.trig == Trig::Cos) {
              t = 1.0;
              for (int i = 0; i < d; ++i) t *= cosm[axis_offset[i] + static_cast<std::size_t>(std::labs(r[i]))];
            } else {
              t = 0.0;  // 1 - prod(1 - a_i) with a_i = 1 - cos(theta_i r_i)
              for (int i = 0; i < d; ++i) {
                if (r[i] == 0) continue;
                const double a = 1.0 - cosm[axis_offset[i] + static_cast<std::size_t>(std::labs(r[i]))];
                t += a * (1.0 - t);
              }
            }
          } else {
            double dot = 0.0;
            for (int i = 0; i < d; ++i) dot += th[i] * static_cast<double>(r[i]);
            if (f.trig == Trig::Cos) {
              t = std::cos(dot);
            } else {
              const double s = std::sin(0.5 * dot);
              t = 2.0 * s * s;
            }
          }
          acc[j] += wg * t;
        }
      }
    });
    out.assign(nr, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
      for (std::size_t j = 0; j < nr; ++j) out[j] += partial[b * (nr + 1) + j];
      if (mass) *mass += partial[b * (nr + 1) + nr];
    }
  };

  std::vector<double> total(nr, 0.0), pred(nr, 0.0), prev(nr, 0.0), delta(nr, 0.0);
  std::vector<double> shell, inner;
  double mass = 0.0;
  int streak = 0;
  bool done = false;
  for (int k = 0; k < max_levels_; ++k) {
    const double h = std::numbers::pi * std::ldexp(1.0, -k);
    accumulate(*mesh(k, subdivisions(0.5 * h), false), shell, &mass);
    for (std::size_t j = 0; j < nr; ++j) total[j] += shell[j];
    if (f.singular) {
      for (std::size_t j = 0; j < nr; ++j) pred[j] = total[j] + shell[j] * ratio / (1.0 - ratio);
    } else {
      accumulate(*mesh(k, subdivisions(0.5 * h), true), inner, nullptr);
      for (std::size_t j = 0; j < nr; ++j) pred[j] = total[j] + inner[j];
    }
    if (k > 0) {
      bool ok = true;
      for (std::size_t j = 0; j < nr; ++j) {
        delta[j] = std::abs(pred[j] - prev[j]);
        if (delta[j] > tol_ * std::abs(pred[j]) + kMassFloor * mass) ok = false;
      }
      streak = (ok && k >= min_level) ? streak + 1 : 0;
      if (streak >= 2) {
        done = true;
        break;
      }
    }
    prev = pred;
  }
  std::vector<Estimate> out(nr);
  for (std::size_t j = 0; j < nr; ++j) {
    out[j].value = pred[j];
    out[j].err = delta[j] + walk_.symbol_tail_bound() * mass;
    out[j].converged = done;
  }
  return out;
}

std::vector<Estimate> GreenFunction::green_many(double lambda, const std::vector<Site>& r) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be finite and nonnegative");
  }
  const double s = walk_.local_exponent();
  Integrand f;
  if (lambda == 0.0) {
    if (classify_recurrence(walk_) == Recurrence::G0Infinite) {
      std::vector<Estimate> out(r.size());
      for (auto& e : out) e.value = std::numeric_limits<double>::infinity();
      return out;
    }
    f.g = [](double phi) { return 1.0 / (-phi); };
    f.singular = true;
    f.s_eff = s;
  } else {
    f.g = [lambda](double phi) { return 1.0 / (lambda - phi); };
    f.scale_hint = std::pow(lambda / walk_.local_coefficient(), 1.0 / s);
  }
  return integrate(f, r);
}

GreenValue GreenFunction::green(double lambda, const Site& x, const Site& y) const {
  const Site r = difference(x, y);
  const Estimate e = green_many(lambda, {r})[0];
  GreenValue g;
  g.lambda = lambda;
  g.x = x;
  g.y = y;
  g.value = e.value;
  g.infinite = std::isinf(e.value);
  g.err = e.err;
  g.converged = e.converged;
  return g;
}

GreenValue GreenFunction::green_zero(const Site& x, const Site& y) const { return green(0.0, x, y); }

std::vector<Estimate> GreenFunction::deficit_many(double lambda, const std::vector<Site>& r) const {
  if (classify_recurrence(walk_) == Recurrence::G0Infinite) {
    throw Error(ErrorCode::NotTransient, "G_0 is infinite for this walk");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be finite and nonnegative");
  }
  if (lambda == 0.0) return std::vector<Estimate>(r.size());
  const double s = walk_.local_exponent();
  Integrand f;
  f.g = [lambda](double phi) { return lambda / ((-phi) * (lambda - phi)); };
  f.singular = true;
  f.s_eff = s;
  f.scale_hint = std::pow(lambda / walk_.local_coefficient(), 1.0 / s);
  return integrate(f, r);
}

double GreenFunction::deficit(double lambda, const Site& x, const Site& y) const {
  return deficit_many(lambda, {difference(x, y)})[0].value;
}

std::vector<Estimate> GreenFunction::potential_many(double lambda, const std::vector<Site>& r) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be finite and nonnegative");
  }
  Integrand f;
  f.g = [lambda](double phi) { return 1.0 / (lambda - phi); };
  f.trig = Trig::OneMinusCos;
  if (lambda > 0.0) {
    f.scale_hint = std::pow(lambda / walk_.local_coefficient(), 1.0 / walk_.local_exponent());
  }
  return integrate(f, r);
}

HeatValue GreenFunction::transition_probability(double t, const Site& x, const Site& y) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "t must be >= 0");
  HeatValue v;
  v.t = t;
  v.x = x;
  v.y = y;
  const Site r = difference(x, y);
  check_dim(walk_, r);
  if (t == 0.0) {
    v.value = std::all_of(r.begin(), r.end(), [](long c) { return c == 0; }) ? 1.0 : 0.0;
    return v;
  }
  Integrand f;
  f.g = [t](double phi) { return std::exp(t * phi); };
  f.scale_hint = std::pow(1.0 / (walk_.local_coefficient() * t), 1.0 / walk_.local_exponent());
  const Estimate e = integrate(f, {r})[0];
  v.value = std::clamp(e.value, 0.0, 1.0);
  v.err = e.err;
  v.converged = e.converged;
  return v;
}

double GreenFunction::laplace_consistency(double lambda, const Site& x, const Site& y,
                                          double t_max) const {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (!(t_max > 0.0) || std::exp(-lambda * t_max) / lambda > 1e-7) {
    throw Error(ErrorCode::PreconditionViolated, "t_max too small: e^{-lambda t_max} tail not negligible");
  }
  const GaussLegendre gl = gauss_legendre(20);
  double integral = 0.0;
  double a = 0.0, b = std::min(0.25, t_max);
  while (a < t_max) {
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double t = a + 0.5 * (b - a) * (gl.nodes[i] + 1.0);
      integral += 0.5 * (b - a) * gl.weights[i] * std::exp(-lambda * t) *
                  transition_probability(t, x, y).value;
    }
    a = b;
    b = std::min(t_max, 2.0 * b);
  }
  return std::abs(integral - green(lambda, x, y).value);
}

Estimate GreenFunction::inverse_square_integral() const {
  const double s = walk_.local_exponent();
  if (!(walk_.dim() > 2.0 * s)) {
    throw Error(ErrorCode::PreconditionViolated, "int 1/phi^2 diverges unless d > 2 s");
  }
  Integrand f;
  f.g = [](double phi) { return 1.0 / (phi * phi); };
  f.singular = true;
  f.s_eff = 2.0 * s;
  return integrate(f, {Site(walk_.dim(), 0)})[0];
}

Estimate GreenFunction::inverse_square_time_domain() const {
  const int d = walk_.dim();
  const double s = walk_.local_exponent();
  const double decay = d / s;
  if (!(decay > 2.0)) {
    throw Error(ErrorCode::PreconditionViolated, "int t p(t) dt diverges unless d > 2 s");
  }
  const Site origin(d, 0);
  const GaussLegendre gl = gauss_legendre(12);
  double integral = 0.0;
  double a = 0.0, b = 0.5;
  const double t_end = 1 << 22;
  while (a < t_end) {
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double t = a + 0.5 * (b - a) * (gl.nodes[i] + 1.0);
      integral += 0.5 * (b - a) * gl.weights[i] * t * transition_probability(t, origin, origin).value;
    }
    a = b;
    b = 2.0 * b;
  }
  // Tail from p(t) ~ c t^{-d/s}.
  const double p_end = transition_probability(t_end, origin, origin).value;
  const double p_half = transition_probability(0.5 * t_end, origin, origin).value;
  const double tail = p_end * t_end * t_end / (decay - 2.0);
  const double tail_alt = p_half * std::pow(2.0, -decay) * t_end * t_end / (decay - 2.0);
  return {integral + tail, std::abs(tail - tail_alt), true};
}

GreenValue green_lambda(const WalkSpec& walk, double lambda, const Site& x, const Site& y,
                        double rel_tol) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  return GreenFunction(walk, {rel_tol}).green(lambda, x, y);
}

GreenValue green_zero(const WalkSpec& walk, const Site& x, const Site& y, double rel_tol) {
  return GreenFunction(walk, {rel_tol}).green_zero(x, y);
}

HeatValue transition_probability(const WalkSpec& walk, double t, const Site& x, const Site& y) {
  return GreenFunction(walk).transition_probability(t, x, y);
}

double laplace_consistency(const WalkSpec& walk, double lambda, const Site& x, const Site& y,
                           double t_max) {
  return GreenFunction(walk).laplace_consistency(lambda, x, y, t_max);
}

double green_deficit(const WalkSpec& walk, double lambda, const Site& x, const Site& y) {
  return GreenFunction(walk).deficit(lambda, x, y);
}

}  // namespace brw
