#include "crowdprop/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace crowdprop {

void parallel_for_blocks(std::size_t n, unsigned threads, std::size_t block_size,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (block_size == 0) block_size = 1;
  const std::size_t block_count = (n + block_size - 1) / block_size;

  if (threads <= 1 || block_count == 1) {
    for (std::size_t b = 0; b < block_count; ++b) {
      const std::size_t begin = b * block_size;
      fn(begin, std::min(begin + block_size, n));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= block_count) return;
      const std::size_t begin = b * block_size;
      try {
        fn(begin, std::min(begin + block_size, n));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  const unsigned worker_count =
      static_cast<unsigned>(std::min<std::size_t>(threads, block_count));
  std::vector<std::thread> pool;
  pool.reserve(worker_count);
  for (unsigned t = 0; t < worker_count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace crowdprop
