#include "brw/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "brw/error.hpp"
#include "brw/parallel.hpp"

namespace brw {

double lambert_w_lower(double x) {
  const double branch = -std::exp(-1.0);
  if (x == branch) return -1.0;
  if (!(x > branch && x < 0.0)) throw Error(ErrorCode::DomainError, "lower Lambert branch needs -1/e <= x < 0");
  double w;
  if (x < -0.25) {
    // Series about the branch point in p = -sqrt(2 (1 + e x)).
    const double p = -std::sqrt(2.0 * (1.0 + std::numbers::e * x));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    const double l1 = std::log(-x);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
  }
  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (f == 0.0) break;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    double next = w - step;
    if (next > -1.0) next = 0.5 * (w - 1.0);  // stay on the lower branch
    const bool done = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w);
    w = next;
    if (done) break;
  }
  return w;
}

namespace {

// Tail exponent compared exactly when given as a rational.
struct Alpha {
  double value;
  std::optional<Rational> exact;

  int cmp(std::int64_t n, std::int64_t d) const {
    if (exact) {
      const auto c = *exact <=> Rational::of(n, d);
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    const double r = static_cast<double>(n) / static_cast<double>(d);
    return value < r ? -1 : (value > r ? 1 : 0);
  }
};

AsymptoticLaw make(Quantity q, LawForm form, LawVariable var, double exponent, int log_power = 0) {
  AsymptoticLaw law;
  law.quantity = q;
  law.form = form;
  law.variable = var;
  law.exponent = exponent;
  law.log_power = log_power;
  return law;
}

[[noreturn]] void unsupported(const std::string& what) { throw Error(ErrorCode::UnsupportedRegime, what); }

// Deficit law of a transient heavy tail; the lambda0 law follows by inversion.
AsymptoticLaw heavy_deficit(int d, const Alpha& a) {
  const auto q = Quantity::GreenDeficit;
  // Boundary alpha = d/2 between the power and linear regimes (d <= 3).
  if (d <= 3) {
    const int c = a.cmp(d, 2);
    if (c == 0) return make(q, LawForm::PowerTimesLog, LawVariable::Lambda, 1.0, 1);
    if (c > 0) return make(q, LawForm::Power, LawVariable::Lambda, (d - a.value) / a.value);
  }
  return make(q, LawForm::Linear, LawVariable::Lambda, 1.0);
}

AsymptoticLaw invert(const AsymptoticLaw& deficit, double d, double alpha) {
  switch (deficit.form) {
    case LawForm::Power:
      return make(Quantity::Lambda0, LawForm::Power, LawVariable::BetaExcess, alpha / (d - alpha));
    case LawForm::PowerTimesLog:
      return make(Quantity::Lambda0, LawForm::LambertW, LawVariable::BetaExcess, 1.0);
    default:
      return make(Quantity::Lambda0, LawForm::Linear, LawVariable::BetaExcess, 1.0);
  }
}

AsymptoticLaw law_for(Quantity quantity, WalkClass walk_class, int d, const std::optional<Alpha>& alpha,
                      std::size_t n_sources) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (n_sources < 1) throw Error(ErrorCode::InvalidArgument, "at least one source is required");
  AsymptoticLaw law;
  if (walk_class == WalkClass::FiniteVariance) {
    switch (quantity) {
      case Quantity::GreenSmallLambda:
        if (d == 1) law = make(quantity, LawForm::Power, LawVariable::Lambda, -0.5);
        else if (d == 2) law = make(quantity, LawForm::Log, LawVariable::Lambda, 1.0);
        else unsupported("G_lambda has a finite limit for d >= 3; use the deficit");
        break;
      case Quantity::GreenDeficit:
        if (d <= 2) unsupported("the deficit is undefined for a recurrent walk");
        if (d == 3) law = make(quantity, LawForm::Power, LawVariable::Lambda, 0.5);
        else if (d == 4) law = make(quantity, LawForm::PowerTimesLog, LawVariable::Lambda, 1.0, 1);
        else law = make(quantity, LawForm::Linear, LawVariable::Lambda, 1.0);
        break;
      case Quantity::Lambda0:
        if (d == 1) law = make(quantity, LawForm::Power, LawVariable::NBeta, 2.0);
        else if (d == 2) law = make(quantity, LawForm::Exponential, LawVariable::NBeta, 1.0);
        else if (d == 3) law = make(quantity, LawForm::Power, LawVariable::BetaExcess, 2.0);
        else if (d == 4) law = make(quantity, LawForm::PowerTimesLog, LawVariable::BetaExcess, 1.0, -1);
        else law = make(quantity, LawForm::Linear, LawVariable::BetaExcess, 1.0);
        break;
    }
    return law;
  }
  if (!alpha) throw Error(ErrorCode::InvalidArgument, "heavy tails need alpha");
  const Alpha& a = *alpha;
  if (a.cmp(0, 1) <= 0 || a.cmp(2, 1) >= 0) throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 2)");
  const bool recurrent = d == 1 && a.cmp(1, 1) >= 0;
  switch (quantity) {
    case Quantity::GreenSmallLambda:
      if (!recurrent) unsupported("G_lambda has a finite limit for a transient walk; use the deficit");
      if (a.cmp(1, 1) == 0) law = make(quantity, LawForm::Log, LawVariable::Lambda, 1.0);
      else law = make(quantity, LawForm::Power, LawVariable::Lambda, (1.0 - a.value) / a.value);
      break;
    case Quantity::GreenDeficit:
      if (recurrent) unsupported("the deficit is undefined for a recurrent walk");
      law = heavy_deficit(d, a);
      break;
    case Quantity::Lambda0:
      if (recurrent) {
        if (a.cmp(1, 1) == 0) law = make(quantity, LawForm::Exponential, LawVariable::NBeta, 1.0);
        else law = make(quantity, LawForm::Power, LawVariable::NBeta, a.value / (a.value - 1.0));
      } else {
        law = invert(heavy_deficit(d, a), d, a.value);
      }
      break;
  }
  return law;
}

}  // namespace

AsymptoticLaw predicted_law(Quantity quantity, WalkClass walk_class, int d, std::optional<Rational> alpha,
                            std::size_t n_sources) {
  std::optional<Alpha> a;
  if (alpha) a = Alpha{alpha->value(), alpha};
  AsymptoticLaw law = law_for(quantity, walk_class, d, a, n_sources);
  law.walk_class = walk_class;
  law.dim = d;
  law.alpha = walk_class == WalkClass::HeavyTail ? alpha : std::nullopt;
  law.sources = n_sources;
  return law;
}

AsymptoticLaw predicted_law(Quantity quantity, const WalkSpec& walk, std::size_t n_sources) {
  if (!walk.heavy_tail()) {
    return predicted_law(quantity, WalkClass::FiniteVariance, walk.dim(), std::nullopt, n_sources);
  }
  const auto& t = walk.alpha();
  AsymptoticLaw law = law_for(quantity, WalkClass::HeavyTail, walk.dim(), Alpha{t.value, t.exact}, n_sources);
  law.walk_class = WalkClass::HeavyTail;
  law.dim = walk.dim();
  law.alpha = t.exact;
  law.sources = n_sources;
  return law;
}

LinearFit fit_linear(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3) throw Error(ErrorCode::InvalidArgument, "a linear fit needs at least 3 samples");
  const double n = static_cast<double>(samples.size());
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : samples) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (auto [x, y] : samples) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InvalidArgument, "abscissae must not all coincide");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

PowerFit fit_exponent(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 4) throw Error(ErrorCode::InvalidArgument, "an exponent fit needs at least 4 samples");
  std::vector<std::pair<double, double>> logs;
  logs.reserve(samples.size());
  for (auto [u, v] : samples) {
    if (!(u > 0.0) || !(v > 0.0)) throw Error(ErrorCode::NonPositiveSample, "samples must be positive");
    logs.emplace_back(std::log(u), std::log(v));
  }
  const LinearFit l = fit_linear(logs);
  return {l.slope, std::exp(l.intercept), l.r2};
}

std::vector<double> AsymptoteGrid::values() const {
  if (points < 4) throw Error(ErrorCode::InvalidArgument, "grid needs at least 4 points");
  if (!(start > 0.0) || !(stop > 0.0) || start == stop) {
    throw Error(ErrorCode::InvalidArgument, "grid bounds must be positive and distinct");
  }
  std::vector<double> out(static_cast<std::size_t>(points));
  const double a = std::log(start), b = std::log(stop);
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
  return out;
}

AsymptoteReport check_asymptote(const WalkSpec& walk, const std::vector<Site>& sources, Quantity quantity,
                                const AsymptoteGrid& grid, double exponent_tol) {
  return check_asymptote(std::make_shared<const GreenFunction>(walk), sources, quantity, grid, exponent_tol);
}

AsymptoteReport check_asymptote(const std::shared_ptr<const GreenFunction>& green,
                                const std::vector<Site>& sources, Quantity quantity,
                                const AsymptoteGrid& grid, double exponent_tol) {
  const WalkSpec& walk = green->walk();
  AsymptoteReport rep;
  rep.law = predicted_law(quantity, walk, std::max<std::size_t>(1, sources.size()));
  const auto g = grid.values();
  const std::size_t n = g.size();
  rep.u.assign(n, 0.0);
  rep.v.assign(n, 0.0);
  const Site origin(static_cast<std::size_t>(walk.dim()), 0);
  if (quantity == Quantity::Lambda0) {
    const SpectralSolver solver(green, sources);
    rep.beta_c = solver.beta_critical();
    const double nsrc = static_cast<double>(sources.size());
    parallel_for(n, [&](std::size_t i) {
      const double beta = rep.beta_c > 0.0 ? rep.beta_c * (1.0 + g[i]) : g[i];
      const auto l = solver.lambda0(beta);
      if (!l) throw Error(ErrorCode::Subcritical, "grid point has no positive eigenvalue");
      rep.u[i] = rep.law.variable == LawVariable::NBeta ? nsrc * beta : beta - rep.beta_c;
      rep.v[i] = *l;
    });
  } else {
    parallel_for(n, [&](std::size_t i) {
      rep.u[i] = g[i];
      rep.v[i] = quantity == Quantity::GreenDeficit ? green->deficit_many(g[i], {origin})[0].value
                                                     : green->green_many(g[i], {origin})[0].value;
    });
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rep.u[a] < rep.u[b]; });
  const double u_min = rep.u[order.front()];

  const LawForm form = rep.law.form;
  const bool uses_log = form == LawForm::Log || form == LawForm::PowerTimesLog;
  if (uses_log && !(rep.u[order.back()] < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "logarithmic laws need the law variable below 1");
  }
  rep.predicted_exponent = rep.law.exponent;
  if (form == LawForm::Power || form == LawForm::Linear || form == LawForm::PowerTimesLog) {
    std::vector<std::pair<double, double>> s;
    for (std::size_t i : order) {
      double v = rep.v[i];
      if (form == LawForm::PowerTimesLog) v /= std::pow(std::log(1.0 / rep.u[i]), rep.law.log_power);
      s.emplace_back(rep.u[i], v);
    }
    const PowerFit f = fit_exponent(s);
    rep.fitted_exponent = f.slope;
    rep.constant = f.constant;
    rep.r2 = f.r2;
    rep.difference = std::abs(f.slope - rep.predicted_exponent);
    rep.pass = rep.difference <= exponent_tol;
  } else {
    // Transformed linear relation over the last decade of the grid.
    std::vector<std::pair<double, double>> lin, pw;
    for (std::size_t i : order) {
      if (rep.u[i] > 10.0 * u_min * (1.0 + 1e-12)) break;
      const double u = rep.u[i], v = rep.v[i];
      double x = 0.0, y = 0.0;
      switch (form) {
        case LawForm::Log:
          x = std::log(1.0 / u);
          y = v;
          break;
        case LawForm::Exponential:
          x = u;
          y = -1.0 / std::log(v);
          break;
        default:  // LambertW
          x = u;
          y = -v * std::log(v);
          break;
      }
      lin.emplace_back(x, y);
      pw.emplace_back(x, y);
    }
    const LinearFit f = fit_linear(lin);
    rep.r2 = f.r2;
    rep.constant = form == LawForm::Exponential ? 1.0 / f.slope : f.slope;
    rep.fitted_exponent = pw.size() >= 4 ? fit_exponent(pw).slope : 1.0;
    rep.difference = std::abs(rep.fitted_exponent - rep.predicted_exponent);
    rep.pass = f.slope > 0.0;
  }
  if (rep.r2 < 0.999) {
    throw Error(ErrorCode::InsufficientAsymptoticRange,
                "fit r2 = " + std::to_string(rep.r2) + " is below 0.999; move the grid closer to the limit");
  }
  rep.law.constant = rep.constant;
  rep.pass = rep.pass && rep.constant > 0.0;
  return rep;
}

NDependenceReport n_dependence_check(const WalkSpec& walk, const std::vector<double>& beta_grid,
                                     const std::vector<std::size_t>& n_list, long spacing, double tol,
                                     std::size_t tail) {
  if (classify_recurrence(walk) != Recurrence::G0Infinite) {
    throw Error(ErrorCode::PreconditionViolated, "the N dependence check needs a recurrent walk");
  }
  if (beta_grid.empty() || n_list.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid or N list");
  for (double b : beta_grid) {
    if (!(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta values must be positive");
  }
  NDependenceReport rep;
  const AsymptoticLaw law = predicted_law(Quantity::Lambda0, walk, 1);
  rep.log_ratio = law.form == LawForm::Exponential;
  auto green = std::make_shared<const GreenFunction>(walk);
  const SpectralSolver single(green, {Site(static_cast<std::size_t>(walk.dim()), 0)});
  std::vector<double> betas = beta_grid;
  std::sort(betas.begin(), betas.end());
  rep.pass = true;
  for (std::size_t nsrc : n_list) {
    if (nsrc < 1) throw Error(ErrorCode::InvalidArgument, "N must be positive");
    std::vector<Site> pts;
    for (std::size_t k = 0; k < nsrc; ++k) {
      Site p(static_cast<std::size_t>(walk.dim()), 0);
      p[0] = static_cast<long>(k) * spacing;
      pts.push_back(p);
    }
    const SpectralSolver multi(green, pts);
    NDependenceRow row;
    row.n = nsrc;
    row.beta = betas;
    row.ratio.assign(betas.size(), 0.0);
    parallel_for(betas.size(), [&](std::size_t i) {
      const double b = betas[i];
      const auto a = multi.lambda0(b);
      const auto c = single.lambda0(static_cast<double>(nsrc) * b);
      if (!a || !c) throw Error(ErrorCode::Subcritical, "no positive eigenvalue at a grid beta");
      row.ratio[i] = rep.log_ratio ? std::log(*a) / std::log(*c) : *a / *c;
    });
    const std::size_t m = std::min(tail, betas.size());
    for (std::size_t i = 0; i < m; ++i) row.worst_tail = std::max(row.worst_tail, std::abs(row.ratio[i] - 1.0));
    row.pass = row.worst_tail <= tol;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::GreenSmallLambda: return "green";
    case Quantity::GreenDeficit: return "deficit";
    case Quantity::Lambda0: return "lambda0";
  }
  return "";
}

std::string to_string(LawForm f) {
  switch (f) {
    case LawForm::Power: return "power";
    case LawForm::Linear: return "linear";
    case LawForm::PowerTimesLog: return "power_times_log";
    case LawForm::Log: return "log";
    case LawForm::Exponential: return "exponential";
    case LawForm::LambertW: return "lambert_w";
  }
  return "";
}

std::string to_string(LawVariable v) {
  switch (v) {
    case LawVariable::Lambda: return "lambda";
    case LawVariable::NBeta: return "n_beta";
    case LawVariable::BetaExcess: return "beta_excess";
  }
  return "";
}

Quantity parse_quantity(const std::string& text) {
  if (text == "green") return Quantity::GreenSmallLambda;
  if (text == "deficit") return Quantity::GreenDeficit;
  if (text == "lambda0") return Quantity::Lambda0;
  throw Error(ErrorCode::InvalidArgument, "quantity must be green, deficit or lambda0");
}

}  // namespace brw
