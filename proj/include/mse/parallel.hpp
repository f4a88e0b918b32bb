#ifndef MSE_PARALLEL_HPP
#define MSE_PARALLEL_HPP

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace mse {

/// Index-ordered parallel map: results land in slot i regardless of worker
/// scheduling, so batch output is deterministic.
inline void parallel_for(long n, const std::function<void(long)>& body,
                         unsigned max_threads = 0) {
  unsigned hw = max_threads ? max_threads : std::thread::hardware_concurrency();
  if (hw < 2 || n < 2) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  hw = std::min<unsigned>(hw, static_cast<unsigned>(n));
  std::vector<std::thread> pool;
  std::atomic<long> next{0};
  for (unsigned t = 0; t < hw; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace mse

#endif
