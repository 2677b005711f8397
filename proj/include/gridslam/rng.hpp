#pragma once

#include <cstdint>
#include <random>

namespace gridslam {

// Seeded random stream with explicit value derivations, so that runs are
// bitwise reproducible for a fixed seed independent of the standard
// library's distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : gen_(seed ^ 0x9e3779b97f4a7c15ull) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

    // Standard normal via Box-Muller, one value per call (the twin is cached).
    double normal();

    // Independent substream derived from this stream's seed path.
    Rng fork(uint64_t stream_id) {
        return Rng(next_u64() ^ (stream_id * 0xbf58476d1ce4e5b9ull));
    }

private:
    std::mt19937_64 gen_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

} // namespace gridslam
