#pragma once

#include <span>
#include <vector>

namespace gridslam {

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    int t = 0;

    void reset(size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
        t = 0;
    }
};

// Standard Adam with bias correction. Lazily sizes the state on first use;
// throws on a grad/values length mismatch. Deterministic: same inputs give
// bitwise identical outputs.
void adam_step(std::span<double> values, std::span<const double> grad, AdamState& state,
               double lr, const AdamParams& params = {});

} // namespace gridslam
