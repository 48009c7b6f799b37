#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace psrl {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n). Tasks must write only to their own index slot;
// then results are identical for every worker count and schedule.
inline void parallel_for(int n, int n_workers, const std::function<void(int)>& fn) {
  n_workers = resolve_workers(n_workers);
  if (n <= 0) return;
  if (n_workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int spawn = std::min(n_workers, n);
  pool.reserve(spawn);
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace psrl
