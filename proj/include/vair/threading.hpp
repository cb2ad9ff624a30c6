#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace vair {

// Process-wide worker cap set once by the CLI; 1 disables threading.
int thread_count();
void set_thread_count(int n);

// Runs fn(i) for i in [0, n) on up to thread_count() workers in contiguous
// blocks. Callers guarantee disjoint writes per index, so results are
// identical for every worker count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  int workers = thread_count();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t k = std::min<std::size_t>(std::size_t(workers), n);
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (std::size_t t = 0; t < k; ++t) {
    std::size_t lo = n * t / k, hi = n * (t + 1) / k;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace vair
