#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sapg {

template <class T, class F>
std::vector<T> map_runs(std::int64_t runs, std::uint64_t master_seed, int threads, F&& f) {
  std::vector<T> out(static_cast<std::size_t>(std::max<std::int64_t>(runs, 0)));
  if (runs <= 0) return out;
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::int64_t>(workers, runs));

  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    constexpr std::int64_t kChunk = 64;
    while (true) {
      const std::int64_t begin = next.fetch_add(kChunk);
      if (begin >= runs) return;
      const std::int64_t end = std::min(runs, begin + kChunk);
      try {
        for (std::int64_t i = begin; i < end; ++i) {
          RandomStream rng(child_seed(master_seed, static_cast<std::uint64_t>(i)));
          out[static_cast<std::size_t>(i)] = f(i, rng);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(runs);
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace sapg
