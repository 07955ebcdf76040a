#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rde {

// Striped parallel map: runs fn(i) for i in [0, count). fn must confine its
// writes to slot i of any shared output so results are independent of the
// thread count; aggregation stays with the caller. The first exception in
// replicate order is rethrown after all workers join.
inline void parallel_for(std::int64_t count, int threads,
                         const std::function<void(std::int64_t)>& fn) {
  if (threads < 1) threads = 1;
  if (threads == 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::int64_t i = w; i < count; i += threads) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace rde
