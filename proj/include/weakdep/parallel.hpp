#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace weakdep {

struct Parallel {
  unsigned threads = 1;
};

// Calls fn(begin, end) on contiguous shards of [0, count). Callers write results by index,
// so the outcome does not depend on the thread count or scheduling.
template <class F>
void parallel_for(std::size_t count, Parallel par, F&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, par.threads), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex guard;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Splits [0, count) into fixed blocks of `block` items, runs fn(begin, end) -> Acc per block on
// the pool and returns the per-block results in block order.
template <class Acc, class F>
std::vector<Acc> blocked_map(std::size_t count, std::size_t block, Parallel par, F&& fn) {
  const std::size_t nblocks = (count + block - 1) / block;
  std::vector<Acc> out(nblocks);
  parallel_for(nblocks, par, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) out[b] = fn(b * block, std::min(count, (b + 1) * block));
  });
  return out;
}

}  // namespace weakdep
