#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hubscan {

template <typename Result, typename Fn>
std::vector<Result> run_sharded(std::size_t n, std::size_t shard_size, std::size_t workers, Fn fn) {
  shard_size = std::max<std::size_t>(1, shard_size);
  const std::size_t shards = (n + shard_size - 1) / shard_size;
  std::vector<Result> results(shards);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t s = next.fetch_add(1);
      if (s >= shards) return;
      try {
        results[s] = fn(s * shard_size, std::min(n, (s + 1) * shard_size), s);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = shards;
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(1, workers), std::max<std::size_t>(1, shards));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace hubscan
