#pragma once

#include <cstdint>
#include <functional>

namespace poselift {

// Worker cap shared by all internally-parallel operations. Defaults to the
// POSELIFT_THREADS environment variable, falling back to hardware
// concurrency. Results never depend on the value; only wall time does.
int worker_threads();
void set_worker_threads(int threads);

// Splits [0, n) into one contiguous chunk per worker and runs
// fn(chunk_index, begin, end) on each. Blocks until all chunks finish.
// Exceptions from workers are rethrown on the calling thread.
void parallel_chunks(
    std::int64_t n,
    const std::function<void(int, std::int64_t, std::int64_t)>& fn);

// Convenience: fn(i) for i in [0, n), statically partitioned.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

// Deterministic pairwise summation of values[0..n); bounds floating drift and
// gives the same result regardless of how the values were produced.
double pairwise_sum(const double* values, std::int64_t n);

}  // namespace poselift
