#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace primlib {

/// Runs body(i) for i in [0, count) across up to `threads` worker threads.
///
/// Work is claimed by atomic counter, so the set of (i -> result slot)
/// pairs is independent of scheduling; callers that write to a
/// slot-per-index buffer get bit-identical results for any thread count.
/// The first exception thrown by any body is rethrown on the caller.
template <typename Body>
void parallel_for(int count, int threads, Body&& body) {
  if (count <= 0) return;
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& worker : pool) worker.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace primlib
