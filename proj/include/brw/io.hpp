#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "brw/simulator.hpp"

namespace brw {

using Json = nlohmann::json;

/// Parses text; ConfigParse with line and column on malformed input.
Json parse_json(const std::string& text, const std::string& origin = "input");
Json read_json_file(const std::string& path);

/// Kernel descriptor:
///   {"d", "kind": "finite_range" | "heavy_tail", "weights": [[[z...], rate], ...],
///    "alpha": "3/2" or number, "scale", "truncation_radius"}
/// For heavy tails "weights" lists near-field overrides.
WalkSpec walk_from_json(const Json& j);
Json walk_to_json(const WalkSpec& walk);

/// {"points": [[...], ...], "beta": number}
SourceConfig sources_from_json(const Json& j);
Json sources_to_json(const SourceConfig& sources);

/// Kernel fields plus "branching": {"b": {"0": r0, "2": r2, ...}}, "t_max",
/// "replicates", "seed", "cap", "start", "probes", "times". Without a
/// branching block the law is binary fission at the source beta.
SimulationConfig simulation_from_json(const Json& kernel, const SourceConfig& sources);

/// Compact dump with sorted keys; stable under key reordering of the input.
std::string canonical_json(const Json& j);
/// 64-bit FNV-1a of the canonical dump, as 16 hex digits.
std::string config_digest(const Json& j);

/// 17 significant digits with a "." separator regardless of locale.
std::string format_double(double x);

}  // namespace brw
