#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace aslks {

inline constexpr const char* kVersion = "0.1.0";

// Exit-code contract shared by the CLI and the test drivers.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

enum class DType { f32, f64 };

const char* dtype_name(DType d);
DType dtype_from_name(const std::string& name);  // "f32" | "f64"

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thread cap for inner operator parallelism. Initialized from ASLKS_THREADS
// (0 or unset means hardware concurrency); settable at runtime.
int max_threads();
void set_max_threads(int n);

// Runs fn(begin, end) over disjoint chunks of [0, count). Work is split into
// contiguous ranges, one per worker, so every output element is produced by
// exactly one task; results are bitwise independent of the thread count.
// min_chunk is the smallest range worth a thread; below that runs inline.
void parallel_for(std::int64_t count, std::int64_t min_chunk,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace aslks
