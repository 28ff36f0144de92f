#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "brw/cli.hpp"
#include "brw/io.hpp"

namespace fs = std::filesystem;
using namespace brw;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("brw_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    write("k1.json", R"({"d": 1, "kind": "finite_range", "weights": [[[1], 0.5], [[-1], 0.5]]})");
    write("k1r.json", R"({"weights": [[[1], 0.5], [[-1], 0.5]], "kind": "finite_range", "d": 1})");
    const double s = 1.0 / 6.0;
    Json k3{{"d", 3}, {"kind", "finite_range"}, {"weights", Json::array()}};
    for (int i = 0; i < 3; ++i) {
      for (int sign : {1, -1}) {
        Json z = Json::array({0, 0, 0});
        z[i] = sign;
        k3["weights"].push_back(Json::array({z, s}));
      }
    }
    write("k3.json", k3.dump());
    write("s1.json", R"({"points": [[0, 0, 0]], "beta": 1.0})");
    write("s1d.json", R"({"points": [[0]], "beta": 0.1})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }
  std::string read(const std::string& name) const {
    std::ifstream f(path(name));
    return {std::istreambuf_iterator<char>(f), {}};
  }

  fs::path dir_;
};

// Last CSV row, split on commas.
std::vector<std::string> last_row(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  std::vector<std::string> cells;
  std::istringstream row(last);
  while (std::getline(row, line, ',')) cells.push_back(line);
  return cells;
}

}  // namespace

TEST_F(Cli, GreenClosedForm) {
  const auto r = run({"green", "--config", path("k1.json"), "--lambda", "1", "--x", "0", "--y", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "lambda,dx_1,value,err");
  EXPECT_NEAR(std::stod(last_row(r.out).at(2)), 0.5773503, 1e-7);
}

TEST_F(Cli, GreenNegativeDisplacement) {
  const auto r = run({"green", "--config", path("k1.json"), "--lambda", "1", "--x=-2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto row = last_row(r.out);
  EXPECT_EQ(row.at(1), "-2");
  // 1/sqrt(3) times ((2 - sqrt(3)))^2 for the d=1 walk at lambda = 1.
  const double rho = 2.0 - std::sqrt(3.0);
  EXPECT_NEAR(std::stod(row.at(2)), rho * rho / std::sqrt(3.0), 1e-9);
}

TEST_F(Cli, BetaCritical) {
  const auto r = run({"beta-c", "--config", path("k3.json"), "--sources", path("s1.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(std::stod(last_row(r.out).at(0)), 0.659463, 1e-6);
}

TEST_F(Cli, Lambda0AndSubcritical) {
  auto r = run({"lambda0", "--config", path("k1.json"), "--sources", path("s1d.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(std::stod(last_row(r.out).at(1)), 0.0049876, 1e-7);
  r = run({"lambda0", "--config", path("k3.json"), "--sources", path("s1.json"), "--beta", "0.5"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("Subcritical"), std::string::npos);
}

TEST_F(Cli, UnknownSubcommand) {
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("UnknownSubcommand"), std::string::npos);
  EXPECT_EQ(run({}).code, kExitValidation);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"green", "--help"}).code, kExitOk);
}

TEST_F(Cli, ConfigParseReportsLocation) {
  write("bad.json", "{\"d\": 1,\n  \"kind\": }");
  auto r = run({"green", "--config", path("bad.json"), "--lambda", "1"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("ConfigParse"), std::string::npos);
  EXPECT_NE(r.err.find(":2:"), std::string::npos) << r.err;

  write("field.json", R"({"d": 1, "kind": "finite_range", "weights": [[[1], "x"]]})");
  r = run({"green", "--config", path("field.json"), "--lambda", "1"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("weights"), std::string::npos) << r.err;
}

TEST_F(Cli, BadFlagIsValidationError) {
  EXPECT_EQ(run({"green", "--config", path("k1.json")}).code, kExitValidation);  // --lambda missing
  EXPECT_EQ(run({"green", "--config", path("k1.json"), "--lambda", "x"}).code, kExitValidation);
  EXPECT_EQ(run({"green", "--config", path("k1.json"), "--lambda", "1", "--x", "1,2"}).code, kExitValidation);
  EXPECT_EQ(run({"green", "--config", path("missing.json"), "--lambda", "1"}).code, kExitValidation);
}

TEST_F(Cli, ToleranceFailureIsNumerical) {
  const auto r = run({"truncated-check", "--config", path("k1.json"), "--sources", path("s1d.json"), "--box", "64",
                      "--k", "1", "--tol", "1e-30"});
  EXPECT_EQ(r.code, kExitNumerical) << r.err;
  const auto ok = run({"truncated-check", "--config", path("k1.json"), "--sources", path("s1d.json"), "--box",
                       "256,512", "--k", "1"});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
}

TEST_F(Cli, ManifestNextToOutput) {
  const auto r = run({"green", "--config", path("k1.json"), "--lambda", "1,0.5", "--out", path("g.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json m = parse_json(read("g.csv.manifest.json"));
  EXPECT_EQ(m["subcommand"], "green");
  EXPECT_EQ(m["version"], tool_version());
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_TRUE(m["tolerances"].contains("green_rel_tol"));
  ASSERT_EQ(m["outputs"].size(), 1u);
  EXPECT_TRUE(fs::exists(m["outputs"][0].get<std::string>()));
  EXPECT_EQ(m["config_digest"].get<std::string>().size(), 16u);
}

TEST_F(Cli, DigestStableUnderKeyReordering) {
  run({"green", "--config", path("k1.json"), "--lambda", "1", "--out", path("a.csv")});
  run({"green", "--config", path("k1r.json"), "--lambda", "1", "--out", path("b.csv")});
  const Json a = parse_json(read("a.csv.manifest.json"));
  const Json b = parse_json(read("b.csv.manifest.json"));
  EXPECT_EQ(a["config_digest"], b["config_digest"]);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
  // A real change of content changes the digest.
  write("k1x.json", R"({"d": 1, "kind": "finite_range", "weights": [[[1], 0.5], [[-1], 0.5], [[2], 0.1]]})");
  run({"green", "--config", path("k1x.json"), "--lambda", "1", "--out", path("c.csv")});
  EXPECT_NE(parse_json(read("c.csv.manifest.json"))["config_digest"], a["config_digest"]);
}

TEST_F(Cli, ConfigRoundTrip) {
  for (const char* text : {R"({"d": 1, "kind": "finite_range", "weights": [[[1], 0.5], [[-1], 0.5], [[3], 0.25]]})",
                           R"({"d": 2, "kind": "heavy_tail", "alpha": "3/2", "scale": 2.0, "truncation_radius": 32,
                               "weights": [[[1, 0], 3.0]]})"}) {
    const WalkSpec w = walk_from_json(parse_json(text));
    const Json once = walk_to_json(w);
    const Json twice = walk_to_json(walk_from_json(parse_json(canonical_json(once))));
    EXPECT_EQ(canonical_json(once), canonical_json(twice));
  }
  const SourceConfig s = sources_from_json(parse_json(R"({"beta": 0.25, "points": [[0, 1], [2, -1]]})"));
  const SourceConfig back = sources_from_json(parse_json(canonical_json(sources_to_json(s))));
  EXPECT_EQ(back.points, s.points);
  EXPECT_EQ(back.beta, s.beta);
}

TEST_F(Cli, OutputIndependentOfThreads) {
  const std::vector<std::string> base{"spectrum", "--config", path("k3.json"), "--sources", path("s3.json")};
  write("s3.json", R"({"points": [[0, 0, 0], [1, 0, 0], [3, 0, 0]], "beta": 1.2})");
  auto one = base, four = base;
  one.insert(one.end(), {"--threads", "1"});
  four.insert(four.end(), {"--threads", "4"});
  const auto a = run(one), b = run(four);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  ::setenv("BRW_SPECTRA_THREADS", "3", 1);
  const auto c = run(base);
  ::unsetenv("BRW_SPECTRA_THREADS");
  EXPECT_EQ(a.out, c.out);
  EXPECT_NE(c.err.find("\"threads\":3"), std::string::npos) << c.err;
}

TEST_F(Cli, SimulateSeedReproducible) {
  write("sim.json", R"({"d": 1, "kind": "finite_range", "weights": [[[1], 0.5], [[-1], 0.5]],
                        "t_max": 3, "replicates": 100, "probes": [[0]], "times": [0, 1, 3]})");
  const std::vector<std::string> args{"simulate", "--config", path("sim.json"), "--sources", path("s1d.json"),
                                      "--seed", "11"};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "t,m1_total,stderr,m1_at_0");
  const auto ode = run({"ode-m1", "--config", path("sim.json"), "--sources", path("s1d.json"), "--box", "40"});
  ASSERT_EQ(ode.code, kExitOk) << ode.err;
  EXPECT_EQ(ode.out.substr(0, ode.out.find('\n')), "t,m1_total,stderr,m1_at_0");
}

TEST_F(Cli, AsymptoteCheckJson) {
  write("h1.json", R"({"d": 1, "kind": "heavy_tail", "alpha": "3/2"})");
  const auto r = run({"asymptote-check", "--config", path("h1.json"), "--quantity", "deficit", "--grid-start", "1e-6",
                      "--grid-stop", "1e-3", "--grid-points", "8", "--alpha", "1/2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = parse_json(r.out);
  for (const char* key : {"predicted_exponent", "fitted_exponent", "constant", "r2", "pass"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["predicted_exponent"], 1.0);
  EXPECT_TRUE(j["pass"].get<bool>());
  const auto bad = run({"asymptote-check", "--config", path("k1.json"), "--quantity", "green", "--grid-start",
                        "1e-6", "--grid-stop", "1e-3", "--grid-points", "8", "--alpha", "1/2"});
  EXPECT_EQ(bad.code, kExitValidation);
}

TEST_F(Cli, ReproLawId) {
  const auto r = run({"repro", "--theorem", "4i"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = parse_json(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_NEAR(j["data"]["fits"][0]["fitted_exponent"].get<double>(), 3.0, 0.1);
  EXPECT_EQ(run({"repro", "--theorem", "9z"}).code, kExitValidation);
}
