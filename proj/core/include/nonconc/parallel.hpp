#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nonconc {

// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware
// concurrency). fn must only write to per-index state. The first exception
// thrown by any task is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned workers = threads == 0 ? hw : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace nonconc
