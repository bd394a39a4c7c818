#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace sirvar {

inline unsigned default_thread_count() noexcept {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers.
///
/// Work is handed out through an atomic counter; callers write results into
/// slot i so the outcome is independent of scheduling. If any body throws,
/// the exception from the lowest failing index is rethrown after all workers
/// have joined.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (count == 0) return;
  threads = std::max(1u, threads);
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(threads, count));

  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  }

  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace sirvar
