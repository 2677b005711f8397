#pragma once

#include <cstddef>
#include <functional>

namespace gridslam {

// Worker count: GRIDSLAM_THREADS env var, else hardware concurrency.
int thread_count();

// Splits [0, n) into exactly thread_count() contiguous chunks and runs
// fn(chunk_index, begin, end) on worker threads. Chunk boundaries depend
// only on n and the thread count, never on scheduling, so chunk-local
// accumulation followed by an in-order merge is deterministic.
void parallel_chunks(size_t n, const std::function<void(int, size_t, size_t)>& fn);

// Convenience element-wise form.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

} // namespace gridslam
