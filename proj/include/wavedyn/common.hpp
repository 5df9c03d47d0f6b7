#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wavedyn {

// Base error for all failures raised by this library. Subclasses carry
// domain-specific payloads (solver residuals, config field paths).
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid-input guard used at public API boundaries.
inline void ensure(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

// Run fn(0..count-1) over up to n_threads threads, strided so every index
// is visited exactly once. Results must go to per-index slots; then the
// outcome does not depend on scheduling. The first exception thrown by a
// worker is rethrown after all workers join.
inline void parallel_for(std::size_t count, int n_threads,
                         const std::function<void(std::size_t)>& fn) {
  ensure(n_threads >= 1, "parallel_for: thread count must be >= 1");
  std::size_t nt = std::min<std::size_t>(n_threads, count);
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(nt);
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < count; i += nt) fn(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errs) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace wavedyn
