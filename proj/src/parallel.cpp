#include "sbfa/parallel.hpp"

#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace sbfa {

int worker_count() {
  static const int n = [] {
    if (const char* env = std::getenv("SBFA_WORKERS")) {
      const int v = std::atoi(env);
      if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
  }();
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = static_cast<std::size_t>(worker_count());
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t t = std::min(workers, n);
  std::vector<std::exception_ptr> errors(t);
  std::vector<std::thread> threads;
  threads.reserve(t);
  for (std::size_t w = 0; w < t; ++w) {
    threads.emplace_back([&, w] {
      const std::size_t lo = n * w / t;
      const std::size_t hi = n * (w + 1) / t;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace sbfa
