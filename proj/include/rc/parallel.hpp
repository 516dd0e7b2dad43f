#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/parallel_sort.h>
#include <tbb/task_arena.h>

namespace rc {

namespace detail {

inline std::size_t default_thread_count() {
  if (const char* env = std::getenv("RC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct ThreadState {
  std::mutex mu;
  std::size_t count = default_thread_count();
  std::unique_ptr<tbb::task_arena> arena;
};

inline ThreadState& thread_state() {
  static ThreadState state;
  return state;
}

inline tbb::task_arena& arena() {
  auto& st = thread_state();
  std::lock_guard lock(st.mu);
  if (!st.arena || st.arena->max_concurrency() != static_cast<int>(st.count)) {
    st.arena = std::make_unique<tbb::task_arena>(static_cast<int>(st.count));
  }
  return *st.arena;
}

}  // namespace detail

/// Caps worker parallelism for every parallel kernel in the library.
inline void set_thread_count(std::size_t n) {
  auto& st = detail::thread_state();
  std::lock_guard lock(st.mu);
  st.count = std::max<std::size_t>(1, n);
}

inline std::size_t thread_count() {
  auto& st = detail::thread_state();
  std::lock_guard lock(st.mu);
  return st.count;
}

/// Calls fn(i) for every i in [begin, end). Iterations must be independent;
/// results never depend on the thread count.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn, std::size_t grain = 64) {
  if (begin >= end) return;
  if (thread_count() == 1 || end - begin <= grain) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  detail::arena().execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(begin, end, grain),
                      [&](const tbb::blocked_range<std::size_t>& r) {
                        for (std::size_t i = r.begin(); i != r.end(); ++i) fn(i);
                      });
  });
}

/// Comparison sort; output is deterministic whenever `less` is a strict total order.
template <class It, class Less>
void parallel_sort(It first, It last, Less less) {
  if (thread_count() == 1) {
    std::sort(first, last, less);
    return;
  }
  detail::arena().execute([&] { tbb::parallel_sort(first, last, less); });
}

}  // namespace rc
