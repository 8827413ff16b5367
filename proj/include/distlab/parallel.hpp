#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace distlab {

// Static-chunked parallel loop. Each index is processed exactly once and the
// work function writes only to its own slot, so results are independent of the
// thread count; reports produced on 1 and N threads are byte-identical.
inline void parallel_for(size_t n, int threads,
                         const std::function<void(size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  size_t t = static_cast<size_t>(threads);
  if (t > n) t = n;
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (size_t w = 0; w < t; ++w) {
    size_t lo = n * w / t, hi = n * (w + 1) / t;
    pool.emplace_back([lo, hi, &fn] {
      for (size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace distlab
