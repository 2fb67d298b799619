#include <benchmark/benchmark.h>

#include "aslks/asc.hpp"
#include "aslks/c2f.hpp"
#include "aslks/lksc.hpp"

using namespace aslks;

namespace {

Tensor4f random_map(int n, int c, int h, int w, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Tensor4f x(n, c, h, w);
  fill_uniform(x, rng, -1.0, 1.0);
  return x;
}

LkscPlan<float> plan_for(int c, int k, int a) {
  SplitMix64 rng(99);
  LkscSpec spec{.channels = c, .kh = k, .kw = k, .tile = a};
  return make_lksc_plan<float>(spec, rng);
}

}  // namespace

static void BM_DenseLargeKernelDepthwise(benchmark::State& state) {
  const int k = int(state.range(0));
  const auto plan = plan_for(8, k, 5);
  const Tensor4f x = random_map(1, 8, 64, 64, 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(lksc_dense_direct(x, plan));
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_DenseLargeKernelDepthwise)->Arg(15)->Arg(31)->Arg(51);

static void BM_LkscDecomposed(benchmark::State& state) {
  const int k = int(state.range(0));
  const auto plan = plan_for(8, k, 5);
  const Tensor4f x = random_map(1, 8, 64, 64, 7);
  for (auto _ : state) benchmark::DoNotOptimize(lksc_linear(x, plan));
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_LkscDecomposed)->Arg(15)->Arg(31)->Arg(51);

static void BM_Conv3x3(benchmark::State& state) {
  SplitMix64 rng(3);
  ConvSpec s{.c_in = 16, .c_out = 16, .kh = 3, .kw = 3, .pad_h = 1, .pad_w = 1};
  const auto p = make_conv_params<float>(s, rng);
  const Tensor4f x = random_map(1, 16, 64, 64, 11);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_direct(x, p));
}
BENCHMARK(BM_Conv3x3);

static void BM_AscForward(benchmark::State& state) {
  SplitMix64 rng(5);
  AscSpec s;
  s.c_in = s.c_out = 16;
  s.kh = s.kw = 3;
  s.pad_h = s.pad_w = 1;
  s.groups = int(state.range(0));
  const auto p = make_asc_params<float>(s, rng);
  const Tensor4f x = random_map(1, 16, 32, 32, 13);
  const auto fields = asc_generate_fields(x, p);
  for (auto _ : state) benchmark::DoNotOptimize(asc_forward(x, p, fields));
}
BENCHMARK(BM_AscForward)->Arg(1)->Arg(4);

static void BM_C2fVariants(benchmark::State& state) {
  SplitMix64 rng(17);
  const auto variant = static_cast<C2fVariant>(state.range(0));
  C2fConfig cfg{.c_in = 32, .c_out = 32, .n = 1, .variant = variant,
                .kernel = variant == C2fVariant::lkscm ? 17 : 3};
  const auto blk = make_c2f_block<float>(cfg, rng);
  const Tensor4f x = random_map(1, 32, 32, 32, 19);
  for (auto _ : state) benchmark::DoNotOptimize(c2f_block_forward(x, blk));
}
BENCHMARK(BM_C2fVariants)->Arg(0)->Arg(1)->Arg(2);

BENCHMARK_MAIN();
