#include "core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace lcamv {

namespace {

std::atomic<int> g_threads{-1};

int resolve_default() {
  if (const char* env = std::getenv("LCAMV_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 0;  // auto
}

}  // namespace

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n); }

int thread_count() {
  int n = g_threads.load();
  if (n == -1) {
    n = resolve_default();
    g_threads.store(n);
  }
  if (n == 0) {
    unsigned hc = std::thread::hardware_concurrency();
    n = hc == 0 ? 1 : static_cast<int>(hc);
  }
  return n;
}

void parallel_rows(int rows, const std::function<void(int, int)>& fn) {
  if (rows <= 0) return;
  int workers = std::min(thread_count(), rows);
  if (workers <= 1) {
    fn(0, rows);
    return;
  }
  // Fixed partition: worker i owns rows [i*rows/W, (i+1)*rows/W).
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int i = 0; i < workers; ++i) {
    int begin = static_cast<int>(static_cast<long long>(rows) * i / workers);
    int end = static_cast<int>(static_cast<long long>(rows) * (i + 1) / workers);
    pool.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace lcamv
