#include "gridslam/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gridslam {

int thread_count() {
    static const int n = [] {
        if (const char* env = std::getenv("GRIDSLAM_THREADS")) {
            const int v = std::atoi(env);
            if (v >= 1) return v;
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }();
    return n;
}

void parallel_chunks(size_t n, const std::function<void(int, size_t, size_t)>& fn) {
    if (n == 0) return;
    const int workers = std::min<size_t>(thread_count(), n);
    if (workers == 1) {
        fn(0, 0, n);
        return;
    }
    const size_t per = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int c = 0; c < workers; ++c) {
        const size_t begin = std::min(n, per * static_cast<size_t>(c));
        const size_t end = std::min(n, begin + per);
        if (begin >= end) break;
        pool.emplace_back([&fn, c, begin, end] { fn(c, begin, end); });
    }
    for (auto& t : pool) t.join();
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    parallel_chunks(n, [&fn](int, size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) fn(i);
    });
}

} // namespace gridslam
