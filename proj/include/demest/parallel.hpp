#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace demest {

/// Thread count used when a caller passes 0: the DEMEST_THREADS environment
/// variable if set, otherwise hardware concurrency.
inline int default_thread_count() {
  if (const char* env = std::getenv("DEMEST_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

inline int resolve_threads(int threads) {
  return threads > 0 ? threads : default_thread_count();
}

/// Runs f(block) for block in [0, blocks). Work is claimed dynamically, so
/// callers that need determinism must write per-block outputs and reduce
/// them in block order afterwards. The first exception thrown by any block
/// is rethrown on the calling thread after all workers finish.
template <class F>
void parallel_for(size_t blocks, int threads, F&& f) {
  threads = resolve_threads(threads);
  if (threads <= 1 || blocks <= 1) {
    for (size_t b = 0; b < blocks; ++b) f(b);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      size_t b = next.fetch_add(1);
      if (b >= blocks || failed.load()) return;
      try {
        f(b);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  size_t nthreads = std::min<size_t>(threads, blocks);
  pool.reserve(nthreads);
  for (size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Splitmix64, used to derive independent RNG streams from (seed, block).
inline uint64_t mix_seed(uint64_t seed, uint64_t block) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (block + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace demest
