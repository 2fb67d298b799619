#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aslks/c2f.hpp"
#include "aslks/io.hpp"
#include "aslks/lksc.hpp"
#include "aslks/verify.hpp"

namespace {

using aslks::kExitOk;
using aslks::kExitUsage;
using aslks::kExitVerifyFailed;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw aslks::ParseError("cannot open '" + out_path + "' for writing");
  out << text;
}

std::array<int, 4> parse_shape(const std::string& text) {
  std::array<int, 4> dims{};
  int at = 0;
  std::size_t pos = 0;
  while (at < 4) {
    std::size_t next = text.find(',', pos);
    const std::string part = text.substr(pos, next - pos);
    try {
      dims[at] = std::stoi(part);
    } catch (const std::exception&) {
      throw aslks::ParseError("--input: '" + part + "' is not an integer");
    }
    ++at;
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (at != 4)
    throw aslks::ParseError("--input expects N,C,H,W, got '" + text + "'");
  for (int d : dims)
    if (d < 1) throw aslks::ParseError("--input dims must be >= 1");
  return dims;
}

int cmd_verify(const std::string& suite, std::uint64_t seed,
               const std::string& dtype, const std::string& out_path) {
  if (!aslks::is_known_suite(suite)) {
    std::cerr << "unknown suite '" << suite
              << "': expected all|tensor|asc|lksc|c2f|metrics\n";
    return kExitUsage;
  }
  const aslks::VerifyReport report =
      aslks::run_verify_suite(suite, seed, aslks::dtype_from_name(dtype));
  emit(aslks::verify_report_json(report), out_path);
  int failed = 0;
  for (const auto& c : report.cases) failed += c.passed ? 0 : 1;
  std::fprintf(stderr, "suite %s: %zu cases, %d failed, %.1f ms\n",
               suite.c_str(), report.cases.size(), failed, report.wall_ms);
  return report.all_passed ? kExitOk : kExitVerifyFailed;
}

template <typename T>
int run_bench(const std::array<int, 4>& shape, int kernel, int tile,
              int repeats, std::uint64_t seed, const std::string& plan_path,
              const std::string& out_path) {
  using clock = std::chrono::steady_clock;
  const auto [n, c, h, w] = shape;
  aslks::SplitMix64 rng(seed);
  aslks::LkscPlan<T> plan;
  if (plan_path.empty()) {
    aslks::LkscSpec spec{.channels = c, .kh = kernel, .kw = kernel,
                         .tile = tile};
    spec.validate();
    plan = aslks::make_lksc_plan<T>(spec, rng);
  } else {
    plan = aslks::load_lksc_plan<T>(plan_path);
    if (plan.spec.channels != c)
      throw aslks::ParseError("--config: plan has " +
                              std::to_string(plan.spec.channels) +
                              " channels but --input carries " +
                              std::to_string(c));
    kernel = plan.spec.kh;
    tile = plan.spec.tile;
  }
  aslks::Tensor4<T> x(n, c, h, w);
  aslks::fill_uniform(x, rng, -1.0, 1.0);

  // Correctness gate: no timings are reported for disagreeing paths.
  const aslks::Tensor4<T> direct = aslks::lksc_dense_direct(x, plan);
  const aslks::Tensor4<T> decomposed = aslks::lksc_linear(x, plan);
  const double diff = aslks::max_abs_diff(direct, decomposed);
  const double gate = aslks::Tensor4<T>::dtype() == aslks::DType::f64 ? 1e-12 : 1e-4;
  if (diff > gate) {
    std::cerr << "bench: decomposed output disagrees with the direct path (max abs "
              << diff << " > " << gate << "); refusing to time wrong results\n";
    return kExitVerifyFailed;
  }

  auto time_path = [&](auto&& fn) {
    fn();  // warm-up
    std::vector<double> ms;
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = clock::now();
      fn();
      ms.push_back(
          std::chrono::duration<double, std::milli>(clock::now() - t0).count());
    }
    std::sort(ms.begin(), ms.end());
    return std::pair<double, double>{ms.front(), ms[ms.size() / 2]};
  };
  const auto [direct_min, direct_med] =
      time_path([&] { aslks::lksc_dense_direct(x, plan); });
  const auto [dec_min, dec_med] =
      time_path([&] { aslks::lksc_linear(x, plan); });

  const long long dec_taps = aslks::lksc_branch_params_per_channel(plan.spec);
  const long long direct_taps = 1LL * plan.spec.kh * plan.spec.kw;
  const long long per_pos = 1LL * n * c * h * w;

  nlohmann::ordered_json doc;
  doc["format"] = "aslks-bench-report";
  doc["version"] = aslks::kVersion;
  doc["seed"] = seed;
  doc["dtype"] = aslks::dtype_name(aslks::Tensor4<T>::dtype());
  doc["input"] = {n, c, h, w};
  doc["kernel"] = {plan.spec.kh, plan.spec.kw};
  doc["tile"] = tile;
  doc["repeats"] = repeats;
  // The timed direct conv runs the zero-padded whole-tile extent.
  doc["dense_extent"] = {plan.branches[0].padded_rows,
                         plan.branches[1].padded_cols};
  doc["params_per_channel"] = {{"direct", direct_taps},
                               {"decomposed", dec_taps}};
  doc["macs"] = {{"direct", per_pos * direct_taps},
                 {"decomposed", per_pos * dec_taps}};
  doc["ratio"] = {{"params", double(dec_taps) / double(direct_taps)},
                  {"macs", double(dec_taps) / double(direct_taps)}};
  doc["verified"] = true;
  doc["max_abs_diff"] = diff;
  doc["time_ms"] = {{"direct", {{"min", direct_min}, {"median", direct_med}}},
                    {"decomposed", {{"min", dec_min}, {"median", dec_med}}}};
  emit(doc.dump(2) + "\n", out_path);
  return kExitOk;
}

int cmd_flops(const std::string& config_path, const std::string& input_text,
              const std::string& out_path) {
  const std::vector<aslks::C2fConfig> cfgs =
      aslks::load_block_stack(config_path);
  aslks::Shape4 input{1, cfgs.front().c_in, 64, 64};
  if (!input_text.empty()) {
    const auto d = parse_shape(input_text);
    input = {d[0], d[1], d[2], d[3]};
  }
  const auto configured =
      aslks::count_params_flops(cfgs, input, aslks::CostMode::as_configured);
  const auto baseline = aslks::count_params_flops(
      cfgs, input, aslks::CostMode::baseline_standard);
  const auto dense = aslks::count_params_flops(
      cfgs, input, aslks::CostMode::dense_large_kernel);
  const std::string json =
      aslks::cost_report_json(input, configured, baseline, dense);
  if (out_path.empty()) {
    std::cout << json;
  } else {
    emit(json, out_path + ".json");
    emit(aslks::cost_report_csv(configured, baseline, dense),
         out_path + ".csv");
  }
  return kExitOk;
}

int cmd_metrics(const std::string& det_path, const std::string& gt_path,
                int n_classes, const std::string& out_path) {
  const auto dets = aslks::load_detections(det_path);
  const auto gts = aslks::load_ground_truth(gt_path);
  const aslks::ApResult r = aslks::map50(dets, gts, n_classes);
  emit(aslks::ap_result_json(r), out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive shape / large kernel shift convolution verification harness"};
  app.set_version_flag("--version", aslks::kVersion);
  app.require_subcommand(1);

  std::string suite = "all", dtype = "f32", out_path;
  std::uint64_t seed = 1;
  std::string input_text = "1,16,128,128", config_path, det_path, gt_path;
  int kernel = 51, tile = 5, repeats = 5, n_classes = 1;

  CLI::App* verify = app.add_subcommand("verify", "Run oracle/invariant suites");
  verify->add_option("--suite", suite, "all|tensor|asc|lksc|c2f|metrics");
  verify->add_option("--seed", seed, "Random seed for all fixtures");
  verify->add_option("--dtype", dtype, "f32|f64");
  verify->add_option("--out", out_path, "Write the JSON report here");

  CLI::App* bench = app.add_subcommand(
      "bench", "Time direct large-kernel conv vs its shift decomposition");
  bench->add_option("--input", input_text, "N,C,H,W");
  bench->add_option("--kernel", kernel, "Large kernel extent K");
  bench->add_option("--tile", tile, "Small kernel extent A (odd)");
  bench->add_option("--repeats", repeats, "Timed repeats (>= 3)")
      ->check(CLI::Range(3, 1000000));
  bench->add_option("--seed", seed, "Random seed");
  bench->add_option("--dtype", dtype, "f32|f64");
  bench->add_option("--config", config_path,
                    "Saved LKSC plan JSON to time instead of random weights");
  bench->add_option("--out", out_path, "Write the JSON report here");

  CLI::App* flops = app.add_subcommand(
      "flops", "Parameter/MAC accounting for a C2f block stack");
  flops->add_option("--config", config_path, "Block-stack JSON")->required();
  flops->add_option("--input", input_text, "N,C,H,W (default 1,c_in,64,64)")
      ->default_val("");
  flops->add_option("--out", out_path, "Base path; writes <out>.json and <out>.csv");

  CLI::App* metrics =
      app.add_subcommand("metrics", "Per-class AP and mAP@50 for detection files");
  metrics->add_option("--detections", det_path, "Detections JSON")->required();
  metrics->add_option("--ground-truth", gt_path, "Ground-truth JSON")->required();
  metrics->add_option("--n-classes", n_classes, "Class count N")->required();
  metrics->add_option("--out", out_path, "Write the JSON result here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (verify->parsed()) return cmd_verify(suite, seed, dtype, out_path);
    if (bench->parsed()) {
      const auto shape = parse_shape(input_text);
      return aslks::dtype_from_name(dtype) == aslks::DType::f64
                 ? run_bench<double>(shape, kernel, tile, repeats, seed,
                                     config_path, out_path)
                 : run_bench<float>(shape, kernel, tile, repeats, seed,
                                    config_path, out_path);
    }
    if (flops->parsed()) return cmd_flops(config_path, input_text, out_path);
    if (metrics->parsed())
      return cmd_metrics(det_path, gt_path, n_classes, out_path);
  } catch (const aslks::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const aslks::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const aslks::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const aslks::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFailed;
  }
  return kExitUsage;
}
