#include "brw/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "brw/asymptotics.hpp"
#include "brw/error.hpp"
#include "brw/io.hpp"
#include "brw/parallel.hpp"
#include "brw/repro.hpp"
#include "brw/simulator.hpp"
#include "brw/spectral.hpp"

#ifndef BRW_VERSION
#define BRW_VERSION "0.0.0"
#endif

namespace brw {

namespace {

/// A check that ran to completion but missed its tolerance.
struct CheckFailed {
  std::string message;
};

struct Options {
  std::string config;
  std::string sources;
  std::string out;
  std::string manifest;
  std::optional<double> tol;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
};

/// State shared by a subcommand run: parsed inputs and what goes into the
/// manifest.
struct Run {
  Options opt;
  Json config;   // null when not given
  Json sources;  // null when not given
  Json tolerances = Json::object();
  Json info = Json::object();
  std::ostringstream body;

  const Json& need_config() {
    if (opt.config.empty()) throw Error(ErrorCode::InvalidArgument, "--config is required");
    return config;
  }
  SourceConfig need_sources(int d) {
    if (opt.sources.empty()) throw Error(ErrorCode::InvalidArgument, "--sources is required");
    SourceConfig s = sources_from_json(sources);
    s.validate(d);
    return s;
  }
  std::shared_ptr<const GreenFunction> green(const WalkSpec& walk) {
    GreenOptions g;
    if (opt.tol) g.rel_tol = *opt.tol;
    auto f = std::make_shared<const GreenFunction>(walk, g);
    tolerances["green_rel_tol"] = f->tolerance();
    return f;
  }
};

using Handler = void (*)(CLI::App&, Run&, std::function<void()>&);

std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + '\n';
}

std::string site_label(const Site& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += '_';
    s += std::to_string(x[i]);
  }
  return s;
}

Site to_site(const std::vector<long>& v, int d, const char* flag) {
  if (v.empty()) return Site(static_cast<std::size_t>(d), 0);
  if (static_cast<int>(v.size()) != d) {
    throw Error(ErrorCode::InvalidArgument, std::string(flag) + " needs " + std::to_string(d) + " coordinates");
  }
  return v;
}

void spectral_header(Run& run) { run.body << "beta,lambda_i,index,residual\n"; }

void spectral_row(Run& run, double beta, double lambda, std::size_t index, double residual) {
  run.body << csv_line({format_double(beta), format_double(lambda), std::to_string(index), format_double(residual)});
}

// Subcommands. Each registers its flags and sets `action`.

void green_cmd(CLI::App& app, Run& run, std::function<void()>& action) {
  auto lambdas = std::make_shared<std::vector<double>>();
  auto x = std::make_shared<std::vector<long>>();
  auto y = std::make_shared<std::vector<long>>();
  app.add_option("--lambda", *lambdas, "Spectral parameters (0 for the Green function at zero)")
      ->required()
      ->delimiter(',');
  app.add_option("--x", *x, "First site, comma separated (default origin)")->delimiter(',');
  app.add_option("--y", *y, "Second site, comma separated (default origin)")->delimiter(',');
  action = [&run, lambdas, x, y] {
    const WalkSpec walk = walk_from_json(run.need_config());
    const int d = walk.dim();
    const Site xs = to_site(*x, d, "--x"), ys = to_site(*y, d, "--y");
    const auto g = run.green(walk);
    std::vector<std::string> head{"lambda"};
    for (int i = 1; i <= d; ++i) head.push_back("dx_" + std::to_string(i));
    head.insert(head.end(), {"value", "err"});
    run.body << csv_line(head);
    for (double lam : *lambdas) {
      const GreenValue v = lam == 0.0 ? g->green_zero(xs, ys) : g->green(lam, xs, ys);
      std::vector<std::string> row{format_double(lam)};
      for (int i = 0; i < d; ++i) row.push_back(std::to_string(xs[i] - ys[i]));
      row.insert(row.end(), {format_double(v.value), format_double(v.err)});
      run.body << csv_line(row);
    }
  };
}

void beta_c_cmd(CLI::App&, Run& run, std::function<void()>& action) {
  action = [&run] {
    const WalkSpec walk = walk_from_json(run.need_config());
    const SourceConfig src = run.need_sources(walk.dim());
    const SpectralSolver solver(run.green(walk), src.points);
    // Each row is the intensity at which lambda_index reaches 0.
    spectral_header(run);
    spectral_row(run, solver.beta_critical(), 0.0, 0, 0.0);
    if (const auto c1 = solver.beta_c1(); c1 && std::isfinite(*c1)) spectral_row(run, *c1, 0.0, 1, 0.0);
  };
}

void lambda0_cmd(CLI::App& app, Run& run, std::function<void()>& action) {
  auto beta = std::make_shared<std::optional<double>>();
  app.add_option("--beta", *beta, "Source intensity (overrides the sources file)");
  action = [&run, beta] {
    const WalkSpec walk = walk_from_json(run.need_config());
    SourceConfig src = run.need_sources(walk.dim());
    if (*beta) src.beta = **beta;
    const SpectralSolver solver(run.green(walk), src.points);
    double residual = 0.0;
    const auto l0 = solver.eigenvalue(0, src.beta, &residual);
    if (!l0) {
      throw Error(ErrorCode::Subcritical,
                  "beta = " + format_double(src.beta) + " does not exceed beta_c = " + format_double(solver.beta_critical()));
    }
    spectral_header(run);
    spectral_row(run, src.beta, *l0, 0, residual);
  };
}

void spectrum_cmd(CLI::App& app, Run& run, std::function<void()>& action) {
  auto beta = std::make_shared<std::optional<double>>();
  app.add_option("--beta", *beta, "Source intensity (overrides the sources file)");
  action = [&run, beta] {
    const WalkSpec walk = walk_from_json(run.need_config());
    SourceConfig src = run.need_sources(walk.dim());
    if (*beta) src.beta = **beta;
    const SpectralSolver solver(run.green(walk), src.points);
    const SpectralResult r = solver.positive_spectrum(src.beta);
    spectral_header(run);
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) spectral_row(run, src.beta, r.eigenvalues[i], i, r.residuals[i]);
    run.info["beta_c"] = r.beta_c;
    run.info["leading_simple"] = r.leading_simple;
    run.info["weakly_supercritical"] = r.weakly_supercritical;
  };
}

void truncated_cmd(CLI::App& app, Run& run, std::function<void()>& action) {
  auto boxes = std::make_shared<std::vector<long>>();
  auto beta = std::make_shared<std::optional<double>>();
  auto k = std::make_shared<std::size_t>(0);
  app.add_option("--box", *boxes, "Box half-widths L, increasing")->required()->delimiter(',');
  app.add_option("--beta", *beta, "Source intensity (overrides the sources file)");
  app.add_option("--k", *k, "Eigenvalues per box (default N + 1)");
  action = [&run, boxes, beta, k] {
    const WalkSpec walk = walk_from_json(run.need_config());
    SourceConfig src = run.need_sources(walk.dim());
    if (*beta) src.beta = **beta;
    std::sort(boxes->begin(), boxes->end());
    const double tol = run.opt.tol.value_or(1e-4);
    run.tolerances["agreement_rel_tol"] = tol;
    const auto l0 = lambda0(walk, src);
    if (!l0) throw Error(ErrorCode::Subcritical, "beta does not exceed beta_c");
    run.body << "beta,lambda_i,index,residual,source\n";
    run.body << csv_line({format_double(src.beta), format_double(*l0), "0", "0", "green"});
    double prev = -INFINITY, prev_res = 0.0, last = 0.0;
    bool monotone = true;
    for (long L : *boxes) {
      const TruncatedEigen t = truncated_operator_eigen(walk, src, L, *k);
      for (std::size_t i = 0; i < t.eigenvalues.size(); ++i) {
        run.body << csv_line({format_double(src.beta), format_double(t.eigenvalues[i]), std::to_string(i),
                              format_double(t.residuals[i]), "box:" + std::to_string(L)});
      }
      // Steps below the Lanczos residual bounds plus rounding of ||H|| are
      // noise, not decrease.
      last = t.eigenvalues.at(0);
      const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * (walk.total_rate() + std::abs(src.beta));
      monotone = monotone && t.converged && last >= prev - (t.residuals[0] + prev_res + rounding);
      prev = last;
      prev_res = t.residuals[0];
    }
    const double rel = std::abs(last / *l0 - 1.0);
    run.info["relative_difference"] = rel;
    run.info["nondecreasing"] = monotone;
    if (rel > tol || !monotone) {
      throw CheckFailed{"largest box differs from lambda0 by " + format_double(rel) +
                        (monotone ? "" : " and the box sequence is not nondecreasing")};
    }
  };
}

void asymptote_cmd(CLI::App& app, Run& run, std::function<void()>& action) {
  struct Args {
    std::string quantity;
    AsymptoteGrid grid;
    std::string alpha;
  };
  auto a = std::make_shared<Args>();
  app.add_option("--quantity", a->quantity, "green, deficit or lambda0")->required();
  app.add_option("--grid-start", a->grid.start, "Smallest grid value")->required();
  app.add_option("--grid-stop", a->grid.stop, "Largest grid value")->required();
  app.add_option("--grid-points", a->grid.points, "Number of log-spaced grid points")->required();
  app.add_option("--alpha", a->alpha, "Tail exponent as a rational string, e.g. 3/2");
  action = [&run, a] {
    Json kernel = run.need_config();
    if (!a->alpha.empty()) {
      if (kernel.value("kind", "") != "heavy_tail") {
        throw Error(ErrorCode::InvalidArgument, "--alpha applies only to heavy_tail kernels");
      }
      kernel["alpha"] = Rational::parse(a->alpha).to_string();
    }
    const WalkSpec walk = walk_from_json(kernel);
    const Quantity q = parse_quantity(a->quantity);
    std::vector<Site> points{Site(static_cast<std::size_t>(walk.dim()), 0)};
    if (!run.opt.sources.empty()) points = run.need_sources(walk.dim()).points;
    const double tol = run.opt.tol.value_or(0.05);
    run.tolerances["exponent_tol"] = tol;
    const AsymptoteReport r = check_asymptote(run.green(walk), points, q, a->grid, tol);
    Json j{{"predicted_exponent", r.predicted_exponent},
           {"fitted_exponent", r.fitted_exponent},
           {"constant", r.constant},
           {"r2", r.r2},
           {"pass", r.pass},
           {"law", to_string(r.law.form)},
           {"variable", to_string(r.law.variable)},
           {"log_power", r.law.log_power},
           {"beta_c", r.beta_c},
           {"u", r.u},
           {"v", r.v}};
    run.body << j.dump(2) << '\n';
    if (!r.pass) throw CheckFailed{"fitted law does not match the prediction"};
  };
}

void n_check_cmd(CLI::App& app, Run& run, std::function<void()>& action) {
  struct Args {
    std::vector<double> beta;
    std::vector<std::size_t> n{2};
    long spacing = 5;
    std::size_t tail = 3;
  };
  auto a = std::make_shared<Args>();
  app.add_option("--beta", a->beta, "Intensity grid")->required()->delimiter(',');
  app.add_option("--n", a->n, "Source counts to compare with N = 1")->delimiter(',');
  app.add_option("--spacing", a->spacing, "Source spacing along e1");
  app.add_option("--tail", a->tail, "Number of smallest intensities checked");
  action = [&run, a] {
    const WalkSpec walk = walk_from_json(run.need_config());
    const double tol = run.opt.tol.value_or(0.02);
    run.tolerances["ratio_tol"] = tol;
    const NDependenceReport r = n_dependence_check(walk, a->beta, a->n, a->spacing, tol, a->tail);
    run.body << "n,beta,ratio\n";
    for (const auto& row : r.rows) {
      for (std::size_t i = 0; i < row.beta.size(); ++i) {
        run.body << csv_line({std::to_string(row.n), format_double(row.beta[i]), format_double(row.ratio[i])});
      }
    }
    run.info["log_ratio"] = r.log_ratio;
    if (!r.pass) throw CheckFailed{"ratios do not approach 1 within the tolerance"};
  };
}

void moment_csv(Run& run, const MomentSeries& m) {
  std::vector<std::string> head{"t", "m1_total", "stderr"};
  for (const Site& p : m.probes) head.push_back("m1_at_" + site_label(p));
  run.body << csv_line(head);
  for (std::size_t i = 0; i < m.times.size(); ++i) {
    std::vector<std::string> row{format_double(m.times[i]), format_double(m.m1_total[i]), format_double(m.stderr[i])};
    for (const auto& col : m.m1_at) row.push_back(format_double(col[i]));
    run.body << csv_line(row);
  }
}

void simulate_cmd(CLI::App&, Run& run, std::function<void()>& action) {
  action = [&run] {
    const Json& kernel = run.need_config();
    const WalkSpec walk = walk_from_json(kernel);
    SimulationConfig c = simulation_from_json(kernel, run.need_sources(walk.dim()));
    if (run.opt.seed) c.seed = *run.opt.seed;
    const MomentSeries m = simulate(c);
    moment_csv(run, m);
    run.info["seed"] = c.seed;
    run.info["replicates"] = c.replicates;
    run.info["censored_fraction"] = m.censored_fraction;
  };
}

void ode_cmd(CLI::App& app, Run& run, std::function<void()>& action) {
  auto box = std::make_shared<long>(0);
  app.add_option("--box", *box, "Box half-width L")->required();
  action = [&run, box] {
    const Json& kernel = run.need_config();
    const WalkSpec walk = walk_from_json(kernel);
    const SimulationConfig c = simulation_from_json(kernel, run.need_sources(walk.dim()));
    const auto times = c.times.empty() ? default_times(c.t_max) : c.times;
    run.tolerances["local_step_tol"] = 1e-8;
    moment_csv(run, ode_m1(walk, c.sources, *box, times, c.start, c.probes));
  };
}

void repro_cmd(CLI::App& app, Run& run, std::function<void()>& action) {
  auto id = std::make_shared<std::string>();
  auto all = std::make_shared<bool>(false);
  app.add_option("--theorem", *id, "Law id (1i, 2iii, 4i, 4iii, 4iv) or criterion number");
  app.add_flag("--all", *all, "Run every acceptance scenario");
  action = [&run, id, all] {
    std::vector<int> ids;
    if (*all) {
      ids = scenario_ids();
    } else if (!id->empty()) {
      ids.push_back(scenario_for(*id));
    } else {
      throw Error(ErrorCode::InvalidArgument, "give --theorem or --all");
    }
    Json reports = Json::array();
    bool pass = true;
    for (int n : ids) {
      const ScenarioResult r = run_scenario(n);
      reports.push_back(to_json(r));
      pass = pass && r.pass;
    }
    run.body << (ids.size() == 1 ? reports[0] : reports).dump(2) << '\n';
    if (!pass) throw CheckFailed{"scenario failed"};
  };
}

struct Command {
  const char* name;
  const char* help;
  Handler handler;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list{
      {"green", "Green function G_lambda(x, y)", green_cmd},
      {"beta-c", "Critical intensities beta_c and beta_c1", beta_c_cmd},
      {"lambda0", "Leading eigenvalue at a given intensity", lambda0_cmd},
      {"spectrum", "All positive eigenvalues", spectrum_cmd},
      {"truncated-check", "Leading eigenvalue on finite boxes against the Green-function root", truncated_cmd},
      {"asymptote-check", "Fit a computed quantity against its predicted law", asymptote_cmd},
      {"n-check", "Source-count dependence for recurrent walks", n_check_cmd},
      {"simulate", "Monte Carlo first moments", simulate_cmd},
      {"ode-m1", "First moments from the deterministic evolution", ode_cmd},
      {"repro", "Run acceptance scenarios", repro_cmd},
  };
  return list;
}

std::string usage() {
  std::string s = "usage: brw_spectra <subcommand> [options]\n\nsubcommands:\n";
  for (const auto& c : commands()) {
    std::string name = c.name;
    name.resize(18, ' ');
    s += "  " + name + c.help + "\n";
  }
  return s + "\nRun brw_spectra <subcommand> --help for its options.\n";
}

int resolve_threads(const Options& opt) {
  if (opt.threads) return *opt.threads;
  if (const char* env = std::getenv("BRW_SPECTRA_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "BRW_SPECTRA_THREADS must be an integer");
    }
  }
  return 1;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text) || !f.flush()) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
}

}  // namespace

const char* tool_version() { return BRW_VERSION; }

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : commands()) n.emplace_back(c.name);
    return n;
  }();
  return names;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    (args.empty() ? err : out) << usage();
    return args.empty() ? kExitValidation : kExitOk;
  }
  if (args[0] == "--version") {
    out << tool_version() << '\n';
    return kExitOk;
  }
  const auto cmd = std::find_if(commands().begin(), commands().end(), [&](const Command& c) { return args[0] == c.name; });
  if (cmd == commands().end()) {
    err << error_name(ErrorCode::UnknownSubcommand) << ": '" << args[0] << "'\n" << usage();
    return kExitValidation;
  }

  const auto started = std::chrono::steady_clock::now();
  Run run;
  CLI::App app{cmd->help, std::string("brw_spectra ") + cmd->name};
  app.add_option("--config", run.opt.config, "Kernel or simulation JSON");
  app.add_option("--sources", run.opt.sources, "Sources JSON {\"points\": [...], \"beta\": b}");
  app.add_option("--out", run.opt.out, "Output file (default stdout)");
  app.add_option("--manifest", run.opt.manifest, "Run manifest path (default <out>.manifest.json)");
  app.add_option("--tol", run.opt.tol, "Tolerance of the subcommand");
  app.add_option("--threads", run.opt.threads, "Worker threads (default BRW_SPECTRA_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", run.opt.seed, "Random seed (simulate)");
  std::function<void()> action;
  cmd->handler(app, run, action);

  int code = kExitOk;
  std::string message;
  try {
    std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << error_name(ErrorCode::InvalidArgument) << ": " << e.what() << '\n';
    return kExitValidation;
  }

  bool wrote = false;
  try {
    set_thread_count(resolve_threads(run.opt));
    if (!run.opt.config.empty()) run.config = read_json_file(run.opt.config);
    if (!run.opt.sources.empty()) run.sources = read_json_file(run.opt.sources);
    try {
      action();
    } catch (const CheckFailed& f) {
      code = kExitNumerical;
      message = "check failed: " + f.message;
    }
    if (run.opt.out.empty()) {
      out << run.body.str();
    } else {
      write_file(run.opt.out, run.body.str());
    }
    wrote = true;
  } catch (const Error& e) {
    code = is_validation_error(e.code()) ? kExitValidation : kExitNumerical;
    message = e.what();
  } catch (const Json::exception& e) {
    code = kExitValidation;
    message = std::string(error_name(ErrorCode::ConfigParse)) + ": " + e.what();
  } catch (const std::exception& e) {
    code = kExitNumerical;
    message = e.what();
  }
  if (!message.empty()) err << message << '\n';

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  Json manifest{{"subcommand", cmd->name},
                {"config_digest", config_digest(Json{{"config", run.config}, {"sources", run.sources}})},
                {"version", tool_version()},
                {"tolerances", run.tolerances},
                {"threads", thread_count()},
                {"wall_clock_seconds", seconds},
                {"outputs", Json::array()},
                {"exit_code", code}};
  if (wrote && !run.opt.out.empty()) manifest["outputs"].push_back(run.opt.out);
  if (!run.info.empty()) manifest["info"] = run.info;
  if (!message.empty()) manifest["error"] = message;
  std::string manifest_path = run.opt.manifest;
  if (manifest_path.empty() && !run.opt.out.empty()) manifest_path = run.opt.out + ".manifest.json";
  try {
    if (manifest_path.empty()) {
      err << manifest.dump() << '\n';
    } else {
      write_file(manifest_path, manifest.dump(2) + "\n");
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    if (code == kExitOk) code = kExitValidation;
  }
  return code;
}

}  // namespace brw
