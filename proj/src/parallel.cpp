#include "causalwr/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace causalwr {

namespace {
std::atomic<unsigned> g_thread_limit{std::max(1u, std::thread::hardware_concurrency())};
thread_local bool t_inside = false;

struct InsideGuard {
  bool saved = t_inside;
  InsideGuard() { t_inside = true; }
  ~InsideGuard() { t_inside = saved; }
};
}

void set_thread_limit(unsigned threads) { g_thread_limit = std::max(1u, threads); }

unsigned thread_limit() { return g_thread_limit.load(); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = t_inside ? 1 : std::min<std::size_t>(thread_limit(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    InsideGuard guard;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace causalwr
