// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ATTNSLICE_PARALLEL_HPP
#define ATTNSLICE_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace attnslice {

inline unsigned recommended_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Run fn(i) for i in [0, n). Work is split into contiguous chunks, one per
/// thread; each index owns its output slot, so results are schedule-independent.
template <typename F>
void parallel_for(std::size_t n, F&& fn, unsigned threads = 0) {
  threads = std::min<std::size_t>(recommended_threads(threads), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace attnslice

#endif  // ATTNSLICE_PARALLEL_HPP
