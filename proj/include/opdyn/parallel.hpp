#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace opdyn {

/// Static worker pool. Work items are written to index-addressed slots, so
/// results never depend on scheduling.
struct Executor {
  std::size_t workers = 1;

  template <class Fn>
  void parallel_for(std::size_t n, Fn&& fn) const {
    const std::size_t w = std::min(std::max<std::size_t>(workers, 1), n);
    if (w <= 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    // lowest index wins, as in the sequential order
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
};

}  // namespace opdyn
