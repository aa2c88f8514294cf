#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cubeclust {

// Deterministic work splitting: [0, n) is cut into chunks whose boundaries
// depend only on n, never on the worker count. Workers race only over *which*
// thread runs a chunk; all chunk outputs must go to chunk- or item-indexed
// slots so results are identical for any worker count. On exceptions the one
// from the smallest chunk index is rethrown.
template <typename Fn>
void parallel_chunks(std::size_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  const std::size_t max_chunks = 64;
  const std::size_t chunks = n < max_chunks ? n : max_chunks;
  auto bounds = [&](std::size_t c) {
    const std::size_t lo = n * c / chunks;
    const std::size_t hi = n * (c + 1) / chunks;
    return std::pair<std::size_t, std::size_t>(lo, hi);
  };
  if (workers <= 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [lo, hi] = bounds(c);
      fn(lo, hi, c);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errs(chunks);
  auto work = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        auto [lo, hi] = bounds(c);
        fn(lo, hi, c);
      } catch (...) {
        errs[c] = std::current_exception();
      }
    }
  };
  const int nt = workers < static_cast<int>(chunks) ? workers : static_cast<int>(chunks);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  for (std::size_t c = 0; c < chunks; ++c)
    if (errs[c]) std::rethrow_exception(errs[c]);
}

// Convenience wrapper when every item writes only to its own output slot.
template <typename Fn>
void parallel_items(std::size_t n, int workers, Fn&& fn) {
  parallel_chunks(n, workers, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t i = lo; i < hi; ++i) fn(i);
  });
}

}  // namespace cubeclust
