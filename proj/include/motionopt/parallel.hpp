#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace motionopt {

// Splits [0, n) into at most `threads` contiguous chunks and runs
// fn(begin, end) on each, joining before return. Chunking only decides
// which worker fills which output slots; callers must write disjoint
// slots so results are identical to a sequential pass.
inline void parallel_chunks(std::size_t n, unsigned threads,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (threads <= 1 || n < 2) {
    fn(0, n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace motionopt
