#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace coagss {

// Worker cap: COAGSS_THREADS env var if set, hardware concurrency otherwise.
inline int worker_count() {
  if (const char* env = std::getenv("COAGSS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(cap, 64);
  }
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  return std::min(64, hw);
}

// Static block partition over [0, n). Each index writes only its own outputs
// and performs its reductions in a fixed order, so results are bit-identical
// for any thread count.
template <typename F>
void parallel_for(std::ptrdiff_t n, F&& body) {
  if (n <= 0) return;
  const int workers = std::min<std::ptrdiff_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::ptrdiff_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::ptrdiff_t lo = w * chunk;
    const std::ptrdiff_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::ptrdiff_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace coagss
