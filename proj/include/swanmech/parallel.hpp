#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace swanmech {

// Worker cap: SWANMECH_THREADS if set, otherwise hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("SWANMECH_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [0, total) into contiguous chunks, runs fold(chunk_accumulator,
// begin, end) on workers, then merges chunk accumulators in chunk order so the
// result is schedule-independent.
template <typename Acc, typename Fold, typename Merge>
Acc chunked_reduce(std::int64_t total, Acc init, Fold fold, Merge merge,
                   std::int64_t min_parallel = 100'000) {
  const int workers = total >= min_parallel ? std::min<std::int64_t>(thread_count(), 64) : 1;
  if (workers <= 1) {
    Acc acc = init;
    fold(acc, 0, total);
    return acc;
  }
  const std::int64_t chunk = (total + workers - 1) / workers;
  std::vector<Acc> parts(static_cast<size_t>(workers), init);
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = w * chunk;
    const std::int64_t end = std::min(total, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&parts, w, begin, end, &fold] { fold(parts[static_cast<size_t>(w)], begin, end); });
  }
  for (auto& t : threads) t.join();
  Acc acc = init;
  for (const auto& p : parts) merge(acc, p);
  return acc;
}

} // namespace swanmech
