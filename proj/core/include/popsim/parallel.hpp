#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace popsim {

// Fans independent trials out over worker threads. Each trial must write
// only to its own slot (index it by the trial id), so the merged result is
// the same no matter how many workers ran.
template <class F>
void parallel_trials(std::uint64_t trials, F&& f, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || trials < 2) {
    for (std::uint64_t t = 0; t < trials; ++t) f(t);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::uint64_t t = next.fetch_add(1);
        if (t >= trials || failed.load()) return;
        try {
          f(t);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace popsim
