#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aslks/verify.hpp"

using namespace aslks;

TEST_CASE("suite names") {
  for (const char* s : {"all", "tensor", "asc", "lksc", "c2f", "metrics"})
    CHECK(is_known_suite(s));
  CHECK_FALSE(is_known_suite("bogus"));
  CHECK_THROWS_AS(run_verify_suite("bogus", 1, DType::f64), SpecError);
}

TEST_CASE("reports are consistent and carry the run parameters") {
  const VerifyReport r = run_verify_suite("metrics", 9, DType::f64);
  CHECK(r.suite == "metrics");
  CHECK(r.seed == 9);
  CHECK(r.dtype == "f64");
  CHECK(r.version == kVersion);
  CHECK_FALSE(r.cases.empty());
  bool every = true;
  for (const auto& c : r.cases) {
    every = every && c.passed;
    CHECK(c.seed == 9);
    CHECK(c.name.rfind("metrics/", 0) == 0);
  }
  CHECK(r.all_passed == every);
  CHECK(r.wall_ms >= 0.0);
}

TEST_CASE("canonical JSON excludes timing and round-trips key fields") {
  const VerifyReport r = run_verify_suite("metrics", 4, DType::f32);
  const std::string json = verify_report_json(r);
  CHECK(json.find("wall") == std::string::npos);
  CHECK(json.find("\"suite\": \"metrics\"") != std::string::npos);
  CHECK(json.find("\"dtype\": \"f32\"") != std::string::npos);
  // Identical runs serialize identically.
  CHECK(json == verify_report_json(run_verify_suite("metrics", 4, DType::f32)));
}

TEST_CASE("the all suite concatenates every module") {
  const VerifyReport r = run_verify_suite("all", 2, DType::f64);
  bool tensor = false, asc = false, lksc = false, c2f = false, metrics = false;
  for (const auto& c : r.cases) {
    tensor = tensor || c.name.rfind("tensor/", 0) == 0;
    asc = asc || c.name.rfind("asc/", 0) == 0;
    lksc = lksc || c.name.rfind("lksc/", 0) == 0;
    c2f = c2f || c.name.rfind("c2f/", 0) == 0;
    metrics = metrics || c.name.rfind("metrics/", 0) == 0;
  }
  CHECK(tensor);
  CHECK(asc);
  CHECK(lksc);
  CHECK(c2f);
  CHECK(metrics);
  CHECK(r.all_passed);
}
