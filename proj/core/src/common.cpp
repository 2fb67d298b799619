#include "aslks/common.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>

namespace aslks {

const char* dtype_name(DType d) { return d == DType::f32 ? "f32" : "f64"; }

DType dtype_from_name(const std::string& name) {
  if (name == "f32") return DType::f32;
  if (name == "f64") return DType::f64;
  throw SpecError("unknown dtype '" + name + "' (expected f32 or f64)");
}

namespace {

int threads_from_env() {
  const char* env = std::getenv("ASLKS_THREADS");
  int n = 0;
  if (env != nullptr) n = std::atoi(env);
  if (n <= 0) n = int(std::thread::hardware_concurrency());
  return std::max(1, n);
}

std::atomic<int>& thread_cap() {
  static std::atomic<int> cap{threads_from_env()};
  return cap;
}

}  // namespace

int max_threads() { return thread_cap().load(); }

void set_max_threads(int n) {
  thread_cap().store(n <= 0 ? std::max(1, int(std::thread::hardware_concurrency()))
                            : n);
}

void parallel_for(std::int64_t count, std::int64_t min_chunk,
                  const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (count <= 0) return;
  min_chunk = std::max<std::int64_t>(1, min_chunk);
  int workers = int(std::min<std::int64_t>(max_threads(),
                                           (count + min_chunk - 1) / min_chunk));
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::int64_t chunk = (count + workers - 1) / workers;
  for (int t = 0; t < workers; ++t) {
    std::int64_t lo = t * chunk;
    std::int64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace aslks
