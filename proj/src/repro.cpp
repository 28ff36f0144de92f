#include "brw/repro.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "brw/asymptotics.hpp"
#include "brw/error.hpp"
#include "brw/simulator.hpp"

namespace brw {

namespace {

// Values from 30-digit quadrature of the Bessel representation.
constexpr double kWatson3 = 1.5163860591519762;
constexpr double kG3Axis[] = {0.51638605915197617, 0.25733588725419264, 0.0, 0.0, 0.096606452003637132};
// Newton iteration on W e^W = -0.1.
constexpr double kWm1At01 = -3.577152063957297;
// Root of 1 / sqrt(lambda^2 + 2 lambda) = 10.
constexpr double kLambda1D = 0.004987562112089031;

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... T>
std::string fmt(const char* f, T... a) {
  char buf[320];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

Json report_json(const AsymptoteReport& r) {
  return Json{{"form", to_string(r.law.form)},
              {"variable", to_string(r.law.variable)},
              {"predicted_exponent", r.predicted_exponent},
              {"fitted_exponent", r.fitted_exponent},
              {"constant", r.constant},
              {"r2", r.r2},
              {"beta_c", r.beta_c},
              {"u", r.u},
              {"v", r.v},
              {"pass", r.pass}};
}

void green_closed_form(ScenarioResult& s) {
  s.title = "closed-form Green function, d=1 nearest neighbour";
  const GreenFunction g(simple_walk(1));
  double worst = 0.0;
  for (int i = 0; i < 30; ++i) {
    const double lam = std::pow(10.0, -6.0 + 8.0 * i / 29.0);
    const double exact = 1.0 / std::sqrt(lam * lam + 2.0 * lam);
    worst = std::max(worst, std::abs(g.green_many(lam, {{0}})[0].value - exact) / exact);
  }
  s.data["max_rel_err"] = worst;
  s.notes.push_back(fmt("max relative error %.3e over 30 lambda in [1e-6, 1e2] (limit 1e-8)", worst));
  s.pass = worst <= 1e-8;
}

void watson(ScenarioResult& s) {
  s.title = "d=3 return constant and single-source critical intensity";
  const SpectralSolver solver(simple_walk(3), {{0, 0, 0}});
  const double g0 = 1.0 / solver.beta_critical();
  const double bc = solver.beta_critical();
  s.data["G0"] = g0;
  s.data["beta_c"] = bc;
  s.notes.push_back(fmt("G0(0,0) = %.10f, oracle %.10f, diff %.2e (limit 1e-6)", g0, kWatson3, g0 - kWatson3));
  s.notes.push_back(fmt("beta_c = %.10f, oracle %.10f (limit 1e-6)", bc, 1.0 / kWatson3));
  s.pass = std::abs(g0 - kWatson3) <= 1e-6 && std::abs(bc - 1.0 / kWatson3) <= 1e-6;
}

void pair_identity(ScenarioResult& s) {
  s.title = "two-source critical intensity equals 1/(G0 + G0(separation))";
  const auto walk = simple_walk(3);
  const auto green = std::make_shared<const GreenFunction>(walk);
  s.pass = true;
  for (long sep : {1L, 2L, 5L}) {
    const double bc = SpectralSolver(green, {{0, 0, 0}, {sep, 0, 0}}).beta_critical();
    const double g0 = green->green_zero({0, 0, 0}, {0, 0, 0}).value;
    const double gs = green->green_zero({0, 0, 0}, {sep, 0, 0}).value;
    const double rel = std::abs(bc * (g0 + gs) - 1.0);
    const double oracle = 1.0 / (kWatson3 + kG3Axis[sep - 1]);
    s.data["separations"].push_back(Json{{"s", sep}, {"beta_c", bc}, {"rel_identity", rel}, {"oracle", oracle}});
    s.notes.push_back(fmt("s=%ld: beta_c %.12f, identity residual %.1e (limit 1e-10), oracle diff %.1e",
                          sep, bc, rel, bc - oracle));
    s.pass = s.pass && rel <= 1e-10;
  }
}

void green_power_law(ScenarioResult& s) {
  s.title = "G_lambda ~ lambda^(-1/2) / sqrt(2) for d=1 nearest neighbour";
  const auto r = check_asymptote(simple_walk(1), {{0}}, Quantity::GreenSmallLambda, {1e-6, 1e-3, 13}, 0.005);
  const double c = 1.0 / std::sqrt(2.0);
  s.data = report_json(r);
  s.notes.push_back(fmt("fitted exponent %.5f (want -0.500 +- 0.005), constant %.6f (want %.6f +- 1%%)",
                        r.fitted_exponent, r.constant, c));
  s.pass = std::abs(r.fitted_exponent + 0.5) <= 0.005 && std::abs(r.constant / c - 1.0) <= 0.01;
}

void lambda0_d3(ScenarioResult& s) {
  s.title = "lambda0 ~ c (beta - beta_c)^2 for d=3 simple walk";
  const auto r = check_asymptote(simple_walk(3), {{0, 0, 0}}, Quantity::Lambda0, {1e-3, 5e-2, 10}, 0.05);
  s.data = report_json(r);
  s.notes.push_back(fmt("beta/beta_c in [1.001, 1.05]: fitted exponent %.4f (want 2.00 +- 0.05), c = %.5g",
                        r.fitted_exponent, r.constant));
  s.pass = r.pass;
}

void lambda0_heavy_1d(ScenarioResult& s) {
  s.title = "lambda0 ~ c (N beta)^3 for d=1, alpha=3/2";
  const auto walk = build_heavy_tail_walk(1, TailExponent::of(Rational::of(3, 2)));
  const auto green = std::make_shared<const GreenFunction>(walk);
  s.pass = true;
  const std::vector<std::vector<Site>> configs{{{0}}, {{0}, {1}}};
  for (const auto& pts : configs) {
    const auto r = check_asymptote(green, pts, Quantity::Lambda0, {1e-3, 5e-2, 10}, 0.1);
    s.data["fits"].push_back(report_json(r));
    s.notes.push_back(fmt("N=%zu: fitted exponent %.4f vs N beta (want 3.0 +- 0.1)", pts.size(), r.fitted_exponent));
    s.pass = s.pass && r.pass;
  }
  const auto n = n_dependence_check(walk, {1e-3, 2e-3, 4e-3, 8e-3}, {2}, 1, 0.02, 3);
  const auto& row = n.rows[0];
  s.data["ratio_beta"] = row.beta;
  s.data["ratio"] = row.ratio;
  s.notes.push_back(fmt("lambda0(beta,2)/lambda0(2beta,1) at beta=%.0e,%.0e,%.0e: %.5f %.5f %.5f (want 1 +- 2%%)",
                        row.beta[0], row.beta[1], row.beta[2], row.ratio[0], row.ratio[1], row.ratio[2]));
  s.pass = s.pass && row.pass;
}

void lambda0_heavy_2d(ScenarioResult& s) {
  s.title = "lambda0 ~ c (beta - beta_c)^(alpha/(d-alpha)) for d=2, alpha=3/2";
  const auto walk = build_heavy_tail_walk(2, TailExponent::of(Rational::of(3, 2)));
  const auto r = check_asymptote(walk, {{0, 0}}, Quantity::Lambda0, {1e-5, 1e-3, 10}, 0.15);
  s.data = report_json(r);
  s.notes.push_back(fmt("beta/beta_c - 1 in [1e-5, 1e-3]: fitted exponent %.4f (want 3.0 +- 0.15)", r.fitted_exponent));
  s.pass = r.pass;
}

void lambert_regime(ScenarioResult& s) {
  s.title = "lambda0 ln lambda0 ~ -c (beta - beta_c) for d=1, alpha=1/2";
  const auto walk = build_heavy_tail_walk(1, TailExponent::of(Rational::of(1, 2)));
  const auto r = check_asymptote(walk, {{0}}, Quantity::Lambda0, {1e-6, 1e-3, 10});
  const double u = r.u.front(), v = r.v.front();
  const double predicted = std::exp(lambert_w_lower(-r.constant * u));
  const double err = std::abs(predicted / v - 1.0);
  s.data = report_json(r);
  s.data["lambert_prediction"] = predicted;
  s.data["lambert_rel_err"] = err;
  s.notes.push_back(fmt("last-decade linear fit r2 %.6f (want >= 0.999), c = %.5g", r.r2, r.constant));
  s.notes.push_back(fmt("exp(W(-c (beta-beta_c))) = %.6e vs lambda0 = %.6e at the smallest beta: %.2f%% (limit 5%%)",
                        predicted, v, 100.0 * err));
  s.pass = r.r2 >= 0.999 && err <= 0.05;
}

void operator_oracle(ScenarioResult& s) {
  s.title = "truncated operator against the Green-function root, d=1, beta=0.1";
  const auto walk = simple_walk(1);
  const SourceConfig src{{{0}}, 0.1};
  const double l0 = *lambda0(walk, src);
  double prev = -INFINITY, prev_res = 0.0;
  bool monotone = true;
  double last = 0.0;
  for (long L : {256L, 512L, 1024L, 2048L}) {
    const auto t = truncated_operator_eigen(walk, src, L, 1);
    last = t.eigenvalues[0];
    // Once the eigenvector has decayed the exact increments are far below
    // rounding, so steps are compared up to the Lanczos residual bounds.
    const double res = t.residuals[0];
    s.data["boxes"].push_back(Json{{"L", L}, {"lambda", last}, {"residual", res}, {"converged", t.converged}});
    s.notes.push_back(fmt("L=%ld: %.16f (residual %.1e)", L, last, res));
    monotone = monotone && t.converged && last >= prev - (res + prev_res);
    prev = last;
    prev_res = res;
  }
  const double rel = std::abs(last / l0 - 1.0);
  s.notes.push_back(fmt("lambda0 = %.15f, relative difference at L=2048 %.2e (limit 1e-4), nondecreasing: %s", l0, rel,
                        monotone ? "yes" : "no"));
  s.data["lambda0"] = l0;
  s.pass = rel <= 1e-4 && monotone;
}

double ones_deviation(const SpectralSolver& solver, const GreenFunction& g, double lam) {
  const auto m = solver.gamma(lam).value;
  const double diag = g.green_many(lam, {Site(2, 0)})[0].value;
  return (m.array() / diag - 1.0).abs().maxCoeff();
}

void ones_limit(ScenarioResult& s) {
  s.title = "Gamma(lambda) / G_lambda tends to the all-ones matrix, d=2, N=3";
  // Fast axis e1 so that the sources, spaced along it, are close in the
  // walk's own length scale.
  const auto walk = build_finite_range_walk(2, {{{1, 0}, 400.0}, {{-1, 0}, 400.0}, {{0, 1}, 0.5}, {{0, -1}, 0.5}});
  const std::vector<Site> pts{{0, 0}, {1, 0}, {2, 0}};
  auto green = std::make_shared<const GreenFunction>(walk);
  const SpectralSolver solver(green, pts);
  double prev = INFINITY;
  bool decreasing = true;
  double last = 0.0;
  for (double lam : {1e-3, 1e-4, 1e-5, 1e-6}) {
    last = ones_deviation(solver, *green, lam);
    s.data["deviation"].push_back(Json{{"lambda", lam}, {"max_dev", last}});
    s.notes.push_back(fmt("lambda=%.0e: max |Gamma_ij/G_lambda - 1| = %.4f", lam, last));
    decreasing = decreasing && last < prev;
    prev = last;
  }
  s.pass = last <= 0.05 && decreasing;
  const auto iso = simple_walk(2);
  auto ig = std::make_shared<const GreenFunction>(iso);
  const double iso_dev = ones_deviation(SpectralSolver(ig, pts), *ig, 1e-6);
  s.data["isotropic_deviation"] = iso_dev;
  s.notes.push_back(fmt("info: isotropic nearest-neighbour walk at lambda=1e-6 gives %.4f", iso_dev));
}

void spectrum_count(ScenarioResult& s) {
  s.title = "at most N positive eigenvalues and a simple leading one, 20 random configurations";
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 3), count(1, 5), coord(-3, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::map<int, std::shared_ptr<const GreenFunction>> greens;
  s.pass = true;
  for (int c = 0; c < 20; ++c) {
    const int d = dim(rng);
    const int n = count(rng);
    std::vector<Site> pts;
    while (static_cast<int>(pts.size()) < n) {
      Site p(static_cast<std::size_t>(d));
      for (auto& x : p) x = coord(rng);
      if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
    }
    if (!greens.count(d)) greens[d] = std::make_shared<const GreenFunction>(simple_walk(d));
    const SpectralSolver solver(greens[d], pts);
    const double bc = solver.beta_critical();
    const double beta = bc > 0.0 ? bc * (1.0 + 4.0 * unit(rng)) : 0.05 + 2.0 * unit(rng);
    const auto r = solver.positive_spectrum(beta);
    const bool ok = static_cast<int>(r.eigenvalues.size()) <= n &&
                    (r.eigenvalues.size() < 2 || r.eigenvalues[0] > r.eigenvalues[1]);
    s.data["cases"].push_back(Json{{"d", d}, {"N", n}, {"beta", beta}, {"eigenvalues", r.eigenvalues}, {"ok", ok}});
    s.pass = s.pass && ok;
  }
  s.notes.push_back(s.pass ? "all 20 cases satisfy count <= N and lambda0 > lambda1" : "a case violated the bounds");
}

void simulation(ScenarioResult& s) {
  s.title = "Monte Carlo growth rate against lambda0, d=1, beta=0.1";
  const auto walk = simple_walk(1);
  SimulationConfig c{walk, {{{0}}, 0.1}, BranchingLaw::binary_fission(0.1), 60.0, 10000, 20240601, {0}, 1000000, {}, {}};
  const auto mc = simulate(c);
  const auto g = estimate_growth_rate(mc, 20.0, 60.0);
  const double rel = std::abs(g.rate / kLambda1D - 1.0);
  s.notes.push_back(fmt("MC rate over [20, 60] = %.6f +- %.6f, lambda0 = %.7f, relative difference %.1f%% (limit 10%%)",
                        g.rate, g.stderr, kLambda1D, 100.0 * rel));
  const auto ode = ode_m1(walk, c.sources, 400, mc.times, {0});
  const auto go = estimate_growth_rate(ode, 20.0, 60.0);
  double worst = 0.0;
  for (std::size_t k = 1; k < mc.times.size(); ++k) {
    worst = std::max(worst, std::abs(mc.m1_total[k] - ode.m1_total[k]) / mc.stderr[k]);
  }
  const auto late = ode_m1(walk, c.sources, 4000, {1000.0, 1500.0, 2000.0}, {0});
  const double late_rate = estimate_growth_rate(late, 1000.0, 2000.0).rate;
  s.notes.push_back(fmt("info: exact first-moment rate over [20, 60] = %.6f; MC within %.2f stderr of it at every t",
                        go.rate, worst));
  s.notes.push_back(fmt("info: exact first-moment rate over [1000, 2000] = %.7f, so the window is pre-asymptotic",
                        late_rate));
  SimulationConfig z = c;
  z.sources.beta = 0.0;
  z.branching = BranchingLaw::binary_fission(0.0);
  const auto still = simulate(z);
  bool conserved = true;
  for (std::size_t k = 0; k < still.times.size(); ++k) {
    conserved = conserved && still.count_min[k] == 1.0 && still.count_max[k] == 1.0;
  }
  s.notes.push_back(std::string("beta=0: every replicate holds exactly one particle at every time: ") +
                    (conserved ? "yes" : "no"));
  s.data = Json{{"mc_rate", g.rate},         {"mc_rate_stderr", g.stderr}, {"lambda0", kLambda1D},
                {"ode_rate_window", go.rate}, {"ode_rate_late", late_rate}, {"max_z", worst},
                {"conserved", conserved}};
  s.pass = rel <= 0.1 && conserved;
}

void lambert_suite(ScenarioResult& s) {
  s.title = "lower Lambert W branch";
  const bool branch = lambert_w_lower(-std::exp(-1.0)) == -1.0;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double x = -std::exp(-1.0) * unit(rng);
    if (x == 0.0) x = -1e-300;
    const double w = lambert_w_lower(x);
    worst = std::max(worst, std::abs(w * std::exp(w) - x) / std::abs(x));
  }
  const double w01 = lambert_w_lower(-0.1);
  s.notes.push_back(fmt("W(-1/e) = -1 exactly: %s", branch ? "yes" : "no"));
  s.notes.push_back(fmt("max relative identity residual over 1000 random x: %.2e (limit 1e-12)", worst));
  s.notes.push_back(fmt("W(-0.1) = %.12f, oracle %.12f", w01, kWm1At01));
  s.data = Json{{"branch_exact", branch}, {"max_residual", worst}, {"w_minus_0_1", w01}};
  s.pass = branch && worst < 1e-12 && std::abs(w01 - kWm1At01) <= 1e-5;
}

void heat_tail(ScenarioResult& s) {
  s.title = "p(t,0,0) ~ h t^(-d/alpha) for d=1, alpha=3/2";
  const GreenFunction g(build_heavy_tail_walk(1, TailExponent::of(Rational::of(3, 2))));
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i <= 8; ++i) {
    const double t = std::pow(10.0, 2.0 + 2.0 * i / 8.0);
    pts.emplace_back(t, g.transition_probability(t, {0}, {0}).value);
  }
  const auto f = fit_exponent(pts);
  s.data = Json{{"slope", f.slope}, {"h", f.constant}, {"r2", f.r2}};
  s.notes.push_back(fmt("log-log slope over t in [1e2, 1e4] = %.5f (want -0.6667 +- 0.02), h = %.5g", f.slope, f.constant));
  s.pass = std::abs(f.slope + 2.0 / 3.0) <= 0.02;
}

struct Entry {
  void (*run)(ScenarioResult&);
  double time_limit;  // seconds, 0 = none
};

const std::map<int, Entry>& table() {
  static const std::map<int, Entry> t{
      {1, {green_closed_form, 10.0}}, {2, {watson, 60.0}},          {3, {pair_identity, 0.0}},
      {4, {green_power_law, 0.0}},    {5, {lambda0_d3, 300.0}},     {6, {lambda0_heavy_1d, 0.0}},
      {7, {lambda0_heavy_2d, 0.0}},   {8, {lambert_regime, 0.0}},   {9, {operator_oracle, 0.0}},
      {10, {ones_limit, 0.0}},        {11, {spectrum_count, 0.0}},  {12, {simulation, 300.0}},
      {13, {lambert_suite, 0.0}},     {14, {heat_tail, 0.0}},
  };
  return t;
}

}  // namespace

std::vector<int> scenario_ids() {
  std::vector<int> ids;
  for (const auto& [k, v] : table()) ids.push_back(k);
  return ids;
}

int scenario_for(const std::string& id) {
  static const std::map<std::string, int> laws{{"1i", 4}, {"2iii", 5}, {"4i", 6}, {"4iii", 7}, {"4iv", 8}};
  if (auto it = laws.find(id); it != laws.end()) return it->second;
  try {
    std::size_t used = 0;
    const int n = std::stoi(id, &used);
    if (used == id.size() && table().count(n)) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + id + "'");
}

ScenarioResult run_scenario(int criterion) {
  const auto it = table().find(criterion);
  if (it == table().end()) throw Error(ErrorCode::InvalidArgument, "unknown scenario " + std::to_string(criterion));
  ScenarioResult s;
  s.criterion = criterion;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    it->second.run(s);
  } catch (const Error& e) {
    s.pass = false;
    s.notes.push_back(std::string("error: ") + e.what());
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (it->second.time_limit > 0.0 && s.seconds > it->second.time_limit) {
    s.pass = false;
    s.notes.push_back(fmt("runtime %.1f s exceeds the %.0f s budget", s.seconds, it->second.time_limit));
  }
  return s;
}

Json to_json(const ScenarioResult& r) {
  return Json{{"criterion", r.criterion}, {"title", r.title}, {"pass", r.pass},
              {"notes", r.notes},         {"data", r.data},   {"seconds", r.seconds}};
}

}  // namespace brw
