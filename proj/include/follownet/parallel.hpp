#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace follownet {

/// Runs body(block) for block in [0, block_count) on up to `threads` workers.
///
/// Blocks are claimed dynamically, so callers that need a deterministic result
/// must write per-block outputs and reduce them in block order afterwards.
/// The first exception thrown by any block is rethrown on the calling thread.
template <class Body>
void parallel_for_blocks(std::size_t block_count, unsigned threads, Body&& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), block_count));
  if (workers <= 1) {
    for (std::size_t b = 0; b < block_count; ++b) {
      body(b);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t b = next.fetch_add(1); b < block_count; b = next.fetch_add(1)) {
      try {
        body(b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next = block_count;
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned i = 1; i < workers; ++i) {
      pool.emplace_back(worker);
    }
    worker();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

/// Default worker count: hardware concurrency, at least 1.
inline unsigned default_thread_count() noexcept {
  return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace follownet
