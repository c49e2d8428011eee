#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace densehar {

// Worker count for parallel_for. DENSEHAR_THREADS caps it; default is the
// hardware concurrency.
inline unsigned worker_count() {
  static const unsigned cached = [] {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("DENSEHAR_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end != env && v >= 1) n = std::min<long>(v, 512);
    }
    return n;
  }();
  return cached;
}

// Runs fn(i) for i in [0, n). Each index must own a disjoint slice of the
// output, so results are bit-identical for any worker count. Static
// contiguous partition, no work stealing.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (std::size_t i = 0; i < std::min(chunk, n); ++i) fn(i);
  for (auto& t : pool) t.join();
}

}  // namespace densehar
