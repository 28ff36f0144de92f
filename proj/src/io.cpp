#include "brw/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "brw/error.hpp"

namespace brw {

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigParse, "field '" + field + "': " + what);
}

const Json& require(const Json& j, const std::string& key) {
  if (!j.is_object()) field_error(key, "enclosing value is not an object");
  auto it = j.find(key);
  if (it == j.end()) field_error(key, "missing");
  return *it;
}

double as_number(const Json& j, const std::string& field) {
  if (!j.is_number()) field_error(field, "expected a number");
  return j.get<double>();
}

long as_integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) field_error(field, "expected an integer");
  return j.get<long>();
}

Site as_site(const Json& j, const std::string& field, int d) {
  if (!j.is_array()) field_error(field, "expected an array of integers");
  Site s;
  for (std::size_t i = 0; i < j.size(); ++i) s.push_back(as_integer(j[i], field + "[" + std::to_string(i) + "]"));
  if (d > 0 && static_cast<int>(s.size()) != d) field_error(field, "expected " + std::to_string(d) + " coordinates");
  return s;
}

std::vector<Weight> as_weights(const Json& j, const std::string& field, int d) {
  if (!j.is_array()) field_error(field, "expected an array of [[z...], rate] pairs");
  std::vector<Weight> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != 2) field_error(f, "expected [[z...], rate]");
    out.push_back({as_site(j[i][0], f + "[0]", d), as_number(j[i][1], f + "[1]")});
  }
  return out;
}

Json site_json(const Site& s) { return Json(s); }

}  // namespace

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::ConfigParse,
                origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigParse, path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

WalkSpec walk_from_json(const Json& j) {
  const long d = as_integer(require(j, "d"), "d");
  if (d < 1) field_error("d", "must be positive");
  const Json& kind = require(j, "kind");
  if (!kind.is_string()) field_error("kind", "expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "finite_range") {
    return build_finite_range_walk(static_cast<int>(d), as_weights(require(j, "weights"), "weights", static_cast<int>(d)));
  }
  if (k != "heavy_tail") field_error("kind", "expected \"finite_range\" or \"heavy_tail\"");
  const Json& a = require(j, "alpha");
  TailExponent alpha;
  if (a.is_string()) {
    try {
      alpha = TailExponent::of(Rational::parse(a.get<std::string>()));
    } catch (const Error& e) {
      field_error("alpha", e.what());
    }
  } else {
    alpha = TailExponent::of(as_number(a, "alpha"));
  }
  const double scale = j.contains("scale") ? as_number(j["scale"], "scale") : 1.0;
  const long radius = j.contains("truncation_radius") ? as_integer(j["truncation_radius"], "truncation_radius") : 64;
  std::vector<Weight> near;
  if (j.contains("weights")) near = as_weights(j["weights"], "weights", static_cast<int>(d));
  return build_heavy_tail_walk(static_cast<int>(d), alpha, {}, scale, static_cast<int>(radius), near);
}

Json walk_to_json(const WalkSpec& walk) {
  Json j;
  j["d"] = walk.dim();
  Json w = Json::array();
  for (const auto& x : walk.weights()) w.push_back(Json::array({site_json(x.z), x.rate}));
  j["weights"] = w;
  if (!walk.heavy_tail()) {
    j["kind"] = "finite_range";
    return j;
  }
  if (!walk.isotropic()) {
    throw Error(ErrorCode::InvalidArgument, "anisotropic angular profiles have no JSON form");
  }
  j["kind"] = "heavy_tail";
  const auto& a = walk.alpha();
  if (a.exact) j["alpha"] = a.exact->to_string();
  else j["alpha"] = a.value;
  j["scale"] = walk.scale();
  j["truncation_radius"] = walk.truncation_radius();
  return j;
}

SourceConfig sources_from_json(const Json& j) {
  SourceConfig s;
  const Json& pts = require(j, "points");
  if (!pts.is_array()) field_error("points", "expected an array of lattice points");
  for (std::size_t i = 0; i < pts.size(); ++i) s.points.push_back(as_site(pts[i], "points[" + std::to_string(i) + "]", 0));
  s.beta = j.contains("beta") ? as_number(j["beta"], "beta") : 0.0;
  return s;
}

Json sources_to_json(const SourceConfig& sources) {
  Json pts = Json::array();
  for (const auto& p : sources.points) pts.push_back(site_json(p));
  return Json{{"points", pts}, {"beta", sources.beta}};
}

SimulationConfig simulation_from_json(const Json& kernel, const SourceConfig& sources) {
  SimulationConfig c{walk_from_json(kernel), sources, BranchingLaw::binary_fission(sources.beta), 0.0, 1, 0, {}, 1000000, {}, {}};
  const int d = c.walk.dim();
  if (kernel.contains("branching")) {
    const Json& b = require(kernel["branching"], "b");
    if (!b.is_object()) field_error("branching.b", "expected an object of offspring counts to rates");
    std::map<int, double> rates;
    for (auto it = b.begin(); it != b.end(); ++it) {
      int n = 0;
      try {
        std::size_t used = 0;
        n = std::stoi(it.key(), &used);
        if (used != it.key().size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        field_error("branching.b." + it.key(), "key must be an integer offspring count");
      }
      rates[n] = as_number(it.value(), "branching.b." + it.key());
    }
    c.branching = BranchingLaw(rates);
  }
  c.t_max = as_number(require(kernel, "t_max"), "t_max");
  if (kernel.contains("replicates")) c.replicates = static_cast<std::size_t>(as_integer(kernel["replicates"], "replicates"));
  if (kernel.contains("seed")) c.seed = kernel["seed"].get<std::uint64_t>();
  if (kernel.contains("cap")) c.population_cap = static_cast<std::size_t>(as_integer(kernel["cap"], "cap"));
  c.start = kernel.contains("start") ? as_site(kernel["start"], "start", d) : Site(static_cast<std::size_t>(d), 0);
  if (kernel.contains("probes")) {
    const Json& p = kernel["probes"];
    if (!p.is_array()) field_error("probes", "expected an array of lattice points");
    for (std::size_t i = 0; i < p.size(); ++i) c.probes.push_back(as_site(p[i], "probes[" + std::to_string(i) + "]", d));
  }
  if (kernel.contains("times")) {
    const Json& t = kernel["times"];
    if (!t.is_array()) field_error("times", "expected an array of numbers");
    for (std::size_t i = 0; i < t.size(); ++i) c.times.push_back(as_number(t[i], "times[" + std::to_string(i) + "]"));
  }
  return c;
}

std::string canonical_json(const Json& j) { return j.dump(); }

std::string config_digest(const Json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical_json(j)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

}  // namespace brw
