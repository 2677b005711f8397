#pragma once

#include <cstdio>

// One pass/fail line per acceptance criterion.
inline void report_criterion(int number, bool pass, const char* description) {
    std::printf("[criterion %2d] %s  %s\n", number, pass ? "PASS" : "FAIL", description);
    std::fflush(stdout);
}
