#include "brw/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include "brw/box_operator.hpp"
#include "brw/error.hpp"
#include "brw/krylov.hpp"
#include "brw/parallel.hpp"

namespace brw {

namespace {

// Jump law a(z) / |a0|: exact table over |z|_inf <= R plus, for heavy tails,
// a continuous power-law tail rounded to the lattice.
class JumpSampler {
 public:
  explicit JumpSampler(const WalkSpec& walk) : d_(walk.dim()), alpha_(walk.alpha().value) {
    std::vector<double> w;
    if (!walk.heavy_tail()) {
      for (const auto& x : walk.weights()) {
        table_.push_back(x.z);
        w.push_back(x.rate);
      }
    } else {
      // Largest box with at most ~1e6 entries.
      const long cap = static_cast<long>((std::pow(1e6, 1.0 / d_) - 1.0) / 2.0);
      radius_ = std::min<long>(walk.truncation_radius(), std::max<long>(cap, 1));
      Site z(static_cast<std::size_t>(d_), -radius_);
      double inside = 0.0;
      while (true) {
        bool zero = true;
        for (long c : z) zero = zero && c == 0;
        if (!zero) {
          const double r = walk.rate(z);
          table_.push_back(z);
          w.push_back(r);
          inside += r;
        }
        int i = 0;
        while (i < d_ && z[static_cast<std::size_t>(i)] == radius_) z[static_cast<std::size_t>(i++)] = -radius_;
        if (i == d_) break;
        ++z[static_cast<std::size_t>(i)];
      }
      tail_mass_ = std::max(0.0, walk.total_rate() - inside);
      if (!walk.isotropic()) {
        angular_ = walk.angular();
        // Envelope for direction rejection, with a margin over sampled maxima.
        std::mt19937_64 rng(1);
        std::vector<double> u(static_cast<std::size_t>(d_));
        for (int k = 0; k < 4096; ++k) {
          direction(rng, u);
          h_max_ = std::max(h_max_, angular_(u));
        }
        h_max_ *= 1.1;
      }
    }
    w.push_back(tail_mass_);
    pick_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }

  template <class Rng>
  void sample(Rng& rng, Site& step) {
    const std::size_t k = pick_(rng);
    if (k < table_.size()) {
      step = table_[k];
      return;
    }
    // Tail: |z| has density proportional to r^(-1-alpha) beyond the box.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> u(static_cast<std::size_t>(d_));
    step.assign(static_cast<std::size_t>(d_), 0);
    while (true) {
      direction(rng, u);
      if (angular_ && unit(rng) * h_max_ > angular_(u)) continue;
      const double r = (radius_ + 0.5) * std::pow(1.0 - unit(rng), -1.0 / alpha_);
      long sup = 0;
      for (int i = 0; i < d_; ++i) {
        const double c = std::round(r * u[static_cast<std::size_t>(i)]);
        // Clamped far beyond any source so repeated jumps cannot overflow.
        step[static_cast<std::size_t>(i)] = static_cast<long>(std::clamp(c, -1e15, 1e15));
        sup = std::max(sup, std::abs(step[static_cast<std::size_t>(i)]));
      }
      if (sup > radius_) return;
    }
  }

 private:
  template <class Rng>
  void direction(Rng& rng, std::vector<double>& u) const {
    std::normal_distribution<double> g;
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (auto& x : u) {
        x = g(rng);
        n2 += x * x;
      }
    } while (n2 == 0.0);
    const double n = std::sqrt(n2);
    for (auto& x : u) x /= n;
  }

  int d_;
  double alpha_;
  long radius_ = 0;
  std::vector<Site> table_;
  double tail_mass_ = 0.0;
  AngularProfile angular_;
  double h_max_ = 0.0;
  std::discrete_distribution<std::size_t> pick_;
};

void check_dim(const Site& x, int d, const char* what) {
  if (static_cast<int>(x.size()) != d) throw Error(ErrorCode::InvalidArgument, std::string(what) + " has wrong dimension");
}

std::vector<double> checked_times(const std::vector<double>& times) {
  if (times.empty()) throw Error(ErrorCode::InvalidArgument, "time grid is empty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i]) || (i > 0 && !(times[i] > times[i - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "times must be finite, nonnegative and increasing");
    }
  }
  return times;
}

struct Replicate {
  std::vector<double> total;
  std::vector<std::vector<double>> at;
  std::size_t censor = 0;  // first censored time index
};

}  // namespace

void SimulationConfig::validate() const {
  const int d = walk.dim();
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw Error(ErrorCode::InvalidArgument, "t_max must be positive");
  if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 1");
  if (population_cap < 1) throw Error(ErrorCode::InvalidArgument, "population cap must be positive");
  sources.validate(d);
  if (std::abs(branching.beta1() - sources.beta) > 1e-12 * std::max(1.0, std::abs(sources.beta))) {
    throw Error(ErrorCode::InvalidArgument, "branching law f'(1) must equal the source intensity beta");
  }
  check_dim(start, d, "start");
  for (const auto& p : probes) check_dim(p, d, "probe");
  if (!times.empty()) {
    checked_times(times);
    if (times.back() > t_max) throw Error(ErrorCode::InvalidArgument, "times must not exceed t_max");
  }
}

std::vector<double> default_times(double t_max) {
  std::vector<double> t;
  for (double s = 0.0; s < t_max; s += 1.0) t.push_back(s);
  t.push_back(t_max);
  return t;
}

MomentSeries simulate(const SimulationConfig& config) {
  config.validate();
  const std::vector<double> times = config.times.empty() ? default_times(config.t_max) : config.times;
  const std::size_t nt = times.size();
  const std::size_t np = config.probes.size();
  const std::set<Site> sources(config.sources.points.begin(), config.sources.points.end());
  std::vector<std::pair<int, double>> offspring;  // n != 1 with cumulative rate
  double branch_rate = 0.0;
  for (auto [n, b] : config.branching.rates()) {
    if (b > 0.0) {
      branch_rate += b;
      offspring.emplace_back(n, branch_rate);
    }
  }
  const double jump_rate = config.walk.total_rate();
  JumpSampler sampler(config.walk);
  const double horizon = times.back();
  const double cap = static_cast<double>(config.population_cap);

  std::vector<Replicate> reps(config.replicates);
  parallel_for(config.replicates, [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(std::uint64_t{r} >> 32)};
    std::mt19937_64 rng(seq);
    std::exponential_distribution<double> clock(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Replicate& rep = reps[r];
    rep.total.assign(nt, 0.0);
    rep.at.assign(np, std::vector<double>(nt, 0.0));
    rep.censor = nt;
    // Each particle is followed to the horizon or its death; offspring wait on a stack.
    std::vector<std::pair<Site, double>> stack{{config.start, 0.0}};
    Site step;
    while (!stack.empty()) {
      auto [x, t] = std::move(stack.back());
      stack.pop_back();
      while (true) {
        if (rep.censor < nt && t >= times[rep.censor]) break;
        const bool at_source = branch_rate > 0.0 && sources.count(x) > 0;
        const double rate = jump_rate + (at_source ? branch_rate : 0.0);
        const double t_next = t + clock(rng) / rate;
        // Occupation of grid times in [t, t_next).
        auto k = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin());
        for (; k < std::min(nt, rep.censor) && times[k] < t_next; ++k) {
          rep.total[k] += 1.0;
          for (std::size_t p = 0; p < np; ++p) {
            if (config.probes[p] == x) rep.at[p][k] += 1.0;
          }
          if (rep.total[k] > cap) rep.censor = k;
        }
        if (t_next > horizon) break;
        t = t_next;
        if (unit(rng) * rate < jump_rate) {
          sampler.sample(rng, step);
          for (std::size_t i = 0; i < x.size(); ++i) x[i] += step[i];
          continue;
        }
        const double pick = unit(rng) * branch_rate;
        int n = offspring.back().first;
        for (auto [m, c] : offspring) {
          if (pick < c) {
            n = m;
            break;
          }
        }
        if (n == 0) break;
        for (int c = 1; c < n; ++c) stack.emplace_back(x, t);
      }
    }
    for (std::size_t k = rep.censor; k < nt; ++k) {
      rep.total[k] = std::numeric_limits<double>::quiet_NaN();
      for (auto& a : rep.at) a[k] = std::numeric_limits<double>::quiet_NaN();
    }
  });

  MomentSeries out;
  out.times = times;
  out.probes = config.probes;
  out.m1_total.assign(nt, 0.0);
  out.stderr.assign(nt, 0.0);
  out.used.assign(nt, 0);
  out.count_min.assign(nt, std::numeric_limits<double>::infinity());
  out.count_max.assign(nt, -std::numeric_limits<double>::infinity());
  out.m1_at.assign(np, std::vector<double>(nt, 0.0));
  for (std::size_t k = 0; k < nt; ++k) {
    double s = 0.0, s2 = 0.0;
    std::size_t n = 0;
    for (const auto& rep : reps) {
      if (k >= rep.censor) continue;
      const double v = rep.total[k];
      ++n;
      s += v;
      s2 += v * v;
      out.count_min[k] = std::min(out.count_min[k], v);
      out.count_max[k] = std::max(out.count_max[k], v);
      for (std::size_t p = 0; p < np; ++p) out.m1_at[p][k] += rep.at[p][k];
    }
    out.used[k] = n;
    if (n == 0) {
      if (k + 1 == nt) throw Error(ErrorCode::CapExceededEverywhere, "every replicate hit the population cap; shrink t_max");
      continue;
    }
    const double dn = static_cast<double>(n);
    out.m1_total[k] = s / dn;
    for (auto& a : out.m1_at) a[k] /= dn;
    const double var = n > 1 ? std::max(0.0, (s2 - s * s / dn) / (dn - 1.0)) : 0.0;
    out.stderr[k] = std::sqrt(var / dn);
  }
  out.censored_fraction = 1.0 - static_cast<double>(out.used.back()) / static_cast<double>(config.replicates);
  out.replicate_totals.reserve(reps.size());
  for (auto& rep : reps) out.replicate_totals.push_back(std::move(rep.total));
  return out;
}

MomentSeries ode_m1(const WalkSpec& walk, const SourceConfig& sources, long L, const std::vector<double>& times,
                    const Site& start, const std::vector<Site>& probes) {
  sources.validate(walk.dim());
  checked_times(times);
  check_dim(start, walk.dim(), "start");
  for (const auto& p : probes) check_dim(p, walk.dim(), "probe");
  const BoxOperator op(walk, sources.points, sources.beta, L);
  if (!op.inside(start)) throw Error(ErrorCode::BoxTooSmall, "start lies outside the box");
  const LinearMap apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { op.apply(in, out); };
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(op.size()));
  v[static_cast<Eigen::Index>(op.index(start))] = 1.0;

  MomentSeries out;
  out.times = times;
  out.probes = probes;
  out.m1_total.assign(times.size(), 0.0);
  out.stderr.assign(times.size(), 0.0);
  out.used.assign(times.size(), 1);
  out.m1_at.assign(probes.size(), std::vector<double>(times.size(), 0.0));
  constexpr double kLocalTol = 1e-8;
  double t = 0.0;
  double step = 1.0 / std::max(1.0, op.norm_bound());
  for (std::size_t k = 0; k < times.size(); ++k) {
    while (t < times[k]) {
      const double h = std::min(step, times[k] - t);
      double err = 0.0;
      Eigen::VectorXd next = expm_action(apply, v, h, 40, &err);
      if (err > kLocalTol * next.norm() && h > 1e-12) {
        step = 0.5 * h;
        continue;
      }
      v = std::move(next);
      t += h;
      if (err < 0.1 * kLocalTol * v.norm()) step = 2.0 * h;
    }
    double total = 0.0, edge = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i) {
      const double x = v[static_cast<Eigen::Index>(i)];
      total += x;
      if (op.on_boundary(i)) edge += std::abs(x);
    }
    if (edge > 1e-4 * std::abs(total)) {
      throw Error(ErrorCode::BoxTooSmall, "boundary holds more than 1e-4 of the mass; enlarge L");
    }
    out.m1_total[k] = total;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      out.m1_at[p][k] = op.inside(probes[p]) ? v[static_cast<Eigen::Index>(op.index(probes[p]))] : 0.0;
    }
  }
  out.count_min = out.m1_total;
  out.count_max = out.m1_total;
  return out;
}

GrowthRate estimate_growth_rate(const MomentSeries& series, double t0, double t1) {
  if (!(t1 > t0)) throw Error(ErrorCode::InvalidArgument, "window must have t1 > t0");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    if (series.times[k] >= t0 && series.times[k] <= t1) idx.push_back(k);
  }
  if (idx.size() < 2) throw Error(ErrorCode::InvalidArgument, "window holds fewer than two times");
  double tm = 0.0;
  for (std::size_t k : idx) {
    if (!(series.m1_total[k] > 0.0)) throw Error(ErrorCode::NonPositiveValues, "m1_total must be positive in the window");
    tm += series.times[k];
  }
  tm /= static_cast<double>(idx.size());
  double sxx = 0.0;
  for (std::size_t k : idx) sxx += (series.times[k] - tm) * (series.times[k] - tm);
  GrowthRate g;
  for (std::size_t k : idx) g.rate += (series.times[k] - tm) / sxx * std::log(series.m1_total[k]);

  if (!series.replicate_totals.empty()) {
    // Linearized slope per replicate, over replicates alive through the window.
    double s = 0.0, s2 = 0.0;
    std::size_t n = 0;
    for (const auto& rep : series.replicate_totals) {
      double x = 0.0;
      bool alive = true;
      for (std::size_t k : idx) {
        if (std::isnan(rep[k])) {
          alive = false;
          break;
        }
        x += (series.times[k] - tm) / sxx * rep[k] / series.m1_total[k];
      }
      if (!alive) continue;
      ++n;
      s += x;
      s2 += x * x;
    }
    if (n > 1) {
      const double dn = static_cast<double>(n);
      g.stderr = std::sqrt(std::max(0.0, (s2 - s * s / dn) / (dn - 1.0)) / dn);
    }
  } else {
    double v = 0.0;
    for (std::size_t k : idx) {
      const double w = (series.times[k] - tm) / sxx;
      const double sl = series.stderr[k] / series.m1_total[k];
      v += w * w * sl * sl;
    }
    g.stderr = std::sqrt(v);
  }
  return g;
}

}  // namespace brw
