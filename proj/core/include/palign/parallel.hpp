#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace palign {

/// Worker count used when a caller passes 0: the PLATONIC_ALIGN_THREADS
/// environment variable if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t default_thread_count();

inline std::size_t resolve_threads(std::size_t requested) {
  return requested == 0 ? default_thread_count() : requested;
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers using a static
/// contiguous partition. Callers write results into slot i, so output does
/// not depend on the worker count. If any call throws, the exception from
/// the lowest-numbered chunk is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::min(resolve_threads(threads), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  workers.reserve(threads);
  const std::size_t chunk = count / threads;
  const std::size_t extra = count % threads;
  std::size_t begin = 0;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t end = begin + chunk + (t < extra ? 1 : 0);
    workers.emplace_back([&fn, &errors, t, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace palign
