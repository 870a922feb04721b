#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace yamabe {

// Worker count for the certification sweeps.  YAMABE_ANCIENTS_THREADS caps it;
// results never depend on the value because every task writes its own slot.
inline int thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  int nt = hw == 0 ? 1 : int(hw);
  if (const char* env = std::getenv("YAMABE_ANCIENTS_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) nt = std::min<long>(v, 256);
  }
  return std::max(1, nt);
}

// Runs body(i) for i in [0, n).  Work is split into contiguous chunks, one per
// worker; callers must make body(i) touch disjoint state per index.
template <class F>
void parallel_for(std::int64_t n, F&& body) {
  if (n <= 0) return;
  const int nt = std::min<std::int64_t>(thread_count(), n);
  if (nt == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::int64_t chunk = (n + nt - 1) / nt;
  for (int w = 0; w < nt; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::int64_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace yamabe
