#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace hjreach {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Static fork-join split of [0, count) into contiguous ranges. Each index is
/// processed exactly once by one worker; callers keep determinism by writing
/// only to slots derived from the index.
template <class Fn>
inline void parallel_for(long long count, int workers, Fn&& fn) {
  workers = std::max(1, std::min<long long>(workers, count));
  if (workers <= 1 || count <= 1) {
    fn(0LL, count);
    return;
  }
  const long long chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const long long begin = w * chunk;
    const long long end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace hjreach
