#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace phasetop {

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread count; callers write per-index outputs
/// and reduce sequentially afterwards.
template <typename Body>
void parallelChunks(int n, int threads, Body&& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int k = 0; k < threads; ++k) {
    const int begin = static_cast<int>(static_cast<long>(n) * k / threads);
    const int end = static_cast<int>(static_cast<long>(n) * (k + 1) / threads);
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace phasetop
