#include "stitch/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>

namespace stitch {

void parallel_for(long n, int threads,
                  const std::function<void(long, long)>& fn) {
  if (n <= 0) return;
  threads = std::max(1, threads);
  const long chunks = std::min<long>(threads, n);
  if (chunks == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(chunks);
  const long base = n / chunks;
  const long rem = n % chunks;
  long start = 0;
  for (long c = 0; c < chunks; ++c) {
    const long len = base + (c < rem ? 1 : 0);
    const long begin = start;
    const long end = start + len;
    start = end;
    pool.emplace_back([&, c, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void parallel_invoke(const std::vector<std::function<void()>>& tasks,
                     int threads) {
  if (tasks.empty()) return;
  if (threads <= 1 || tasks.size() == 1) {
    for (const auto& t : tasks) t();
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(tasks.size());
  for (std::size_t i = 1; i < tasks.size(); ++i) {
    pool.emplace_back([&, i] {
      try {
        tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  try {
    tasks[0]();
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace stitch
