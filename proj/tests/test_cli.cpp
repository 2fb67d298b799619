#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "aslks/io.hpp"
#include "test_util.hpp"

using testutil::cli_path;
using testutil::run_command;

TEST_CASE("cli binary path is provided") { REQUIRE_FALSE(cli_path().empty()); }

TEST_CASE("verify exits 0 on a passing suite and emits a JSON report") {
  const auto r = run_command(cli_path() +
                             " verify --suite metrics --seed 11 --dtype f64 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"format\": \"aslks-verify-report\"") != std::string::npos);
  CHECK(r.output.find("\"all_passed\": true") != std::string::npos);
  CHECK(r.output.find("\"seed\": 11") != std::string::npos);
  CHECK(r.output.find("\"dtype\": \"f64\"") != std::string::npos);
}

TEST_CASE("unknown suites are usage errors with exit 2") {
  const auto r = run_command(cli_path() + " verify --suite bogus 2>/dev/null");
  CHECK(r.exit_code == 2);
}

TEST_CASE("unknown dtype and malformed flags exit 2") {
  CHECK(run_command(cli_path() + " verify --dtype f16 2>/dev/null").exit_code == 2);
  CHECK(run_command(cli_path() + " verify --nope 2>/dev/null").exit_code == 2);
  CHECK(run_command(cli_path() + " 2>/dev/null").exit_code == 2);
}

TEST_CASE("the documented corruption hook forces exit 1 naming the case") {
  const auto r = run_command(
      "ASLKS_INJECT_FAILURE=asc/degenerate_equality " + cli_path() +
      " verify --suite asc --seed 5 --dtype f64 2>/dev/null");
  CHECK(r.exit_code == 1);
  const auto fail_at = r.output.find("asc/degenerate_equality");
  REQUIRE(fail_at != std::string::npos);
  CHECK(r.output.find("\"status\": \"fail\"", fail_at) != std::string::npos);
  CHECK(r.output.find("\"all_passed\": false") != std::string::npos);
}

TEST_CASE("verify reports are byte-identical for a fixed seed") {
  const std::string cmd =
      cli_path() + " verify --suite metrics --seed 3 --dtype f32 2>/dev/null";
  const auto a = run_command(cmd);
  const auto b = run_command(cmd);
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
}

TEST_CASE("bench verifies before timing and reports the MAC ratio") {
  const auto r = run_command(
      cli_path() +
      " bench --input 1,2,32,32 --kernel 51 --tile 5 --repeats 3 --seed 2 --dtype f64 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"verified\": true") != std::string::npos);
  CHECK(r.output.find("0.20569") != std::string::npos);  // 535/2601
  CHECK(r.output.find("\"decomposed\": 535") != std::string::npos);
  CHECK(r.output.find("\"direct\": 2601") != std::string::npos);
  const auto doc = nlohmann::json::parse(r.output);
  for (const char* path : {"direct", "decomposed"}) {
    const double lo = doc.at("time_ms").at(path).at("min").get<double>();
    const double med = doc.at("time_ms").at(path).at("median").get<double>();
    CHECK(lo > 0.0);
    CHECK(med >= lo);
  }
}

TEST_CASE("bench rejects repeats below 3") {
  const auto r = run_command(cli_path() + " bench --repeats 2 2>/dev/null");
  CHECK(r.exit_code == 2);
}

TEST_CASE("bench degenerate plan K = A still verifies") {
  // All three branches collapse to single zero-shift tiles; the dense embed
  // is their kernel sum, so the gate passes and the analytic ratio is the
  // three-branch count 3A^2 / A^2.
  const auto r = run_command(
      cli_path() +
      " bench --input 1,2,16,16 --kernel 5 --tile 5 --repeats 3 --dtype f64 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"verified\": true") != std::string::npos);
  CHECK(r.output.find("\"decomposed\": 75") != std::string::npos);
  CHECK(r.output.find("\"direct\": 25") != std::string::npos);
}

TEST_CASE("bench consumes a saved plan document") {
  aslks::SplitMix64 rng(4);
  aslks::LkscSpec spec{.channels = 3, .kh = 11, .kw = 9, .tile = 3};
  const auto plan = aslks::make_lksc_plan<double>(spec, rng);
  const std::string base = testutil::temp_path("bench_plan");
  aslks::save_lksc_plan(base + ".json", base + ".t4pk", plan);

  const auto r = run_command(cli_path() + " bench --input 1,3,24,24 --config " +
                             base + ".json --repeats 3 --dtype f64 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"verified\": true") != std::string::npos);
  CHECK(r.output.find("\"decomposed\": 69") != std::string::npos);  // 33+27+9
  CHECK(r.output.find("\"direct\": 99") != std::string::npos);      // 11*9

  // A channel mismatch against --input is a usage error.
  CHECK(run_command(cli_path() + " bench --input 1,4,24,24 --config " + base +
                    ".json --repeats 3 --dtype f64 2>/dev/null")
            .exit_code == 2);
  std::remove((base + ".json").c_str());
  std::remove((base + ".t4pk").c_str());
}

TEST_CASE("flops emits stack totals and the direction check") {
  const std::string cfg = testutil::temp_path("stack") + ".json";
  testutil::write_file(cfg, R"([
    {"variant": "lkscm", "c_in": 64, "c_out": 64, "n": 1, "kernel": 51, "tile": 5},
    {"variant": "standard", "c_in": 64, "c_out": 64, "n": 1}
  ])");
  const auto r = run_command(cli_path() + " flops --config " + cfg +
                             " --input 1,64,32,32 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"configured_params_leq_dense\": true") !=
        std::string::npos);
  CHECK(r.output.find("\"baseline_standard\"") != std::string::npos);

  const std::string out_base = testutil::temp_path("cost");
  const auto r2 = run_command(cli_path() + " flops --config " + cfg +
                              " --out " + out_base + " 2>/dev/null");
  CHECK(r2.exit_code == 0);
  std::ifstream csv(out_base + ".csv");
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "stack,block,variant,params,macs");
  std::remove(cfg.c_str());
  std::remove((out_base + ".json").c_str());
  std::remove((out_base + ".csv").c_str());
}

TEST_CASE("flops parse failures exit 2 with the offending record") {
  const std::string cfg = testutil::temp_path("badstack") + ".json";
  testutil::write_file(cfg, R"([{"variant": "ascm", "c_in": 8}])");
  const auto r = run_command(cli_path() + " flops --config " + cfg + " 2>&1");
  CHECK(r.exit_code == 2);
  CHECK(run_command(cli_path() + " flops --config /nonexistent.json 2>/dev/null")
            .exit_code == 2);
  std::remove(cfg.c_str());
}

TEST_CASE("metrics prints the hand fixture to four decimals") {
  const std::string det = testutil::temp_path("det") + ".json";
  const std::string gt = testutil::temp_path("gt") + ".json";
  testutil::write_file(det, R"([
    {"image_id": "img0", "class_id": 0, "box": [0, 0, 10, 10], "confidence": 0.9},
    {"image_id": "img0", "class_id": 1, "box": [50, 50, 60, 60], "confidence": 0.8},
    {"image_id": "img0", "class_id": 1, "box": [20, 20, 30, 30], "confidence": 0.6}
  ])");
  testutil::write_file(gt, R"([
    {"image_id": "img0", "class_id": 0, "box": [0, 0, 10, 10]},
    {"image_id": "img0", "class_id": 1, "box": [20, 20, 30, 30]}
  ])");
  const auto r = run_command(cli_path() + " metrics --detections " + det +
                             " --ground-truth " + gt + " --n-classes 2 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"map50\": 0.7500") != std::string::npos);
  CHECK(r.output.find("[1.0000, 0.5000]") != std::string::npos);

  SUBCASE("empty detections give 0.0000") {
    testutil::write_file(det, "[]");
    const auto r2 = run_command(cli_path() + " metrics --detections " + det +
                                " --ground-truth " + gt +
                                " --n-classes 2 2>/dev/null");
    CHECK(r2.exit_code == 0);
    CHECK(r2.output.find("\"map50\": 0.0000") != std::string::npos);
  }
  SUBCASE("schema violations exit 2") {
    testutil::write_file(det, R"([{"image_id": "x"}])");
    CHECK(run_command(cli_path() + " metrics --detections " + det +
                      " --ground-truth " + gt + " --n-classes 2 2>/dev/null")
              .exit_code == 2);
  }
  std::remove(det.c_str());
  std::remove(gt.c_str());
}

TEST_CASE("--out writes the report to a file") {
  const std::string out = testutil::temp_path("report") + ".json";
  const auto r = run_command(cli_path() +
                             " verify --suite metrics --seed 1 --out " + out +
                             " 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.output.empty());
  std::ifstream in(out);
  REQUIRE(in.good());
  std::string first;
  std::getline(in, first);
  CHECK(first == "{");
  std::remove(out.c_str());
}
