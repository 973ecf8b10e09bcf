#include "poselift/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace poselift {

namespace {

std::atomic<int> g_worker_threads{0};

int detect_threads() {
  if (const char* env = std::getenv("POSELIFT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

int worker_threads() {
  int v = g_worker_threads.load(std::memory_order_relaxed);
  if (v <= 0) {
    v = detect_threads();
    g_worker_threads.store(v, std::memory_order_relaxed);
  }
  return v;
}

void set_worker_threads(int threads) {
  g_worker_threads.store(threads > 0 ? threads : 0,
                         std::memory_order_relaxed);
}

void parallel_chunks(
    std::int64_t n,
    const std::function<void(int, std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  const int workers =
      static_cast<int>(std::min<std::int64_t>(worker_threads(), n));
  if (workers <= 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto run = [&](int chunk) {
    const std::int64_t begin = n * chunk / workers;
    const std::int64_t end = n * (chunk + 1) / workers;
    try {
      fn(chunk, begin, end);
    } catch (...) {
      errors[static_cast<std::size_t>(chunk)] = std::current_exception();
    }
  };
  for (int c = 1; c < workers; ++c) pool.emplace_back(run, c);
  run(0);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t)>& fn) {
  parallel_chunks(n, [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) fn(i);
  });
}

double pairwise_sum(const double* values, std::int64_t n) {
  if (n <= 0) return 0.0;
  if (n <= 8) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) sum += values[i];
    return sum;
  }
  const std::int64_t half = n / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

}  // namespace poselift
