#pragma once

#include <string>
#include <vector>

namespace gridslam {

struct SelftestResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Property suites runnable in a deployed build: rendering identities,
// uncertainty bounds, optimizer behavior, gradient spot checks, scheduler
// semantics, metric invariances, meshing oracles and loader round trips.
std::vector<SelftestResult> run_selftests(uint64_t seed = 0);

} // namespace gridslam
