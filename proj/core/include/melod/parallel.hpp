#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace melod {

/// Static-partition parallel map over [0, n). Results must be written to
/// preallocated slots indexed by i so the outcome does not depend on the
/// worker count. The lowest-index exception is rethrown.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int w = std::min(workers, n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    const int lo = static_cast<int>(static_cast<long long>(n) * t / w);
    const int hi = static_cast<int>(static_cast<long long>(n) * (t + 1) / w);
    threads.emplace_back([lo, hi, &fn, &errors] {
      for (int i = lo; i < hi; ++i) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace melod
