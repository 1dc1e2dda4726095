#include "nsbfm/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace nsbfm {

namespace {

int default_threads() {
  if (const char* env = std::getenv("NSBFM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::atomic<int>& thread_setting() {
  static std::atomic<int> n{default_threads()};
  return n;
}

thread_local bool in_worker = false;

}  // namespace

int num_threads() { return thread_setting().load(); }

void set_num_threads(int n) { thread_setting().store(std::max(1, n)); }

void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& body) {
  if (n <= 0) return;
  const std::ptrdiff_t workers = std::min<std::ptrdiff_t>(num_threads(), n);
  if (workers <= 1 || in_worker) {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run_chunk = [&](std::ptrdiff_t w) {
    in_worker = true;
    const std::ptrdiff_t begin = n * w / workers;
    const std::ptrdiff_t end = n * (w + 1) / workers;
    try {
      for (std::ptrdiff_t i = begin; i < end; ++i) body(i);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
    in_worker = false;
  };
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (std::ptrdiff_t w = 1; w < workers; ++w) pool.emplace_back(run_chunk, w);
  run_chunk(0);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace nsbfm
