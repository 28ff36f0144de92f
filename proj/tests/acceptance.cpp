#include <cstdio>

#include "brw/repro.hpp"

int main() {
  int failed = 0;
  for (int id : brw::scenario_ids()) {
    const auto r = brw::run_scenario(id);
    std::printf("[%s] criterion %2d: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", id, r.title.c_str(), r.seconds);
    for (const auto& n : r.notes) std::printf("         %s\n", n.c_str());
    std::fflush(stdout);
    failed += r.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(brw::scenario_ids().size()) - failed,
              brw::scenario_ids().size());
  return failed == 0 ? 0 : 1;
}
