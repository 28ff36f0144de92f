#pragma once

#include <string>
#include <vector>

#include "brw/io.hpp"

namespace brw {

struct ScenarioResult {
  int criterion = 0;
  std::string title;
  bool pass = false;
  std::vector<std::string> notes;  // human-readable findings
  Json data;                       // machine-readable details
  double seconds = 0.0;
};

/// Acceptance scenarios numbered 1..14.
std::vector<int> scenario_ids();
/// Accepts a scenario number or one of the law ids 1i, 2iii, 4i, 4iii, 4iv.
int scenario_for(const std::string& id);
ScenarioResult run_scenario(int criterion);

Json to_json(const ScenarioResult& r);

}  // namespace brw
