#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aslks/common.hpp"

namespace aslks {

struct VerifyCase {
  std::string name;
  bool passed = false;
  double max_err = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
};

struct VerifyReport {
  std::string suite;
  std::string dtype;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<VerifyCase> cases;
  bool all_passed = false;
  double wall_ms = 0.0;  // diagnostic only; never serialized
};

// Suites: "tensor", "asc", "lksc", "c2f", "metrics", or "all". Unknown
// names raise SpecError. Results are deterministic in (suite, seed, dtype)
// and independent of the thread cap.
VerifyReport run_verify_suite(const std::string& suite, std::uint64_t seed,
                              DType dtype);

bool is_known_suite(const std::string& suite);

// Canonical JSON for the report. Excludes wall_ms so reports from identical
// inputs are byte-identical regardless of machine and thread count.
std::string verify_report_json(const VerifyReport& r);

// Test hook: when the environment variable ASLKS_INJECT_FAILURE names a
// case (or is "1"), that case's fixture is perturbed before comparison so
// failure reporting and exit codes can be exercised end to end.
bool failure_injected_for(const std::string& case_name);

}  // namespace aslks
