#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aslks/asc.hpp"
#include "aslks/io.hpp"
#include "aslks/oracle.hpp"
#include "test_util.hpp"

using namespace aslks;

namespace {

AscParams<double> fixture(int c, int k, int groups, SplitMix64& rng,
                          int pad = -1) {
  AscSpec s;
  s.c_in = s.c_out = c;
  s.kh = s.kw = k;
  s.pad_h = s.pad_w = pad >= 0 ? pad : (k - 1) / 2;
  s.groups = groups;
  return make_asc_params<double>(s, rng);
}

AscFields<double> degenerate(int n, int gk, int oh, int ow) {
  AscFields<double> f;
  f.offsets = Tensor4d(n, 2 * gk, oh, ow);
  f.modulation = Tensor4d(n, gk, oh, ow);
  for (auto& v : f.modulation.data) v = 1.0;
  return f;
}

}  // namespace

TEST_CASE("zero generator yields zero offsets and 0.5 modulation") {
  SplitMix64 rng(1);
  AscParams<double> p = fixture(4, 3, 2, rng);
  std::fill(p.generator.weights.begin(), p.generator.weights.end(), 0.0);
  std::fill(p.generator.bias.begin(), p.generator.bias.end(), 0.0);
  Tensor4d x(1, 4, 5, 5);
  fill_uniform(x, rng, -1, 1);
  const AscFields<double> f = asc_generate_fields(x, p);
  CHECK(f.offsets.c == 2 * 2 * 9);
  CHECK(f.modulation.c == 2 * 9);
  for (double v : f.offsets.data) CHECK(v == 0.0);
  for (double v : f.modulation.data) CHECK(v == 0.5);
}

TEST_CASE("large modulation bias saturates toward 1") {
  SplitMix64 rng(2);
  AscParams<double> p = fixture(2, 3, 1, rng);
  std::fill(p.generator.weights.begin(), p.generator.weights.end(), 0.0);
  std::fill(p.generator.bias.begin(), p.generator.bias.end(), 0.0);
  p.generator.bias[2 * 9 + 3] = 20.0;
  Tensor4d x(1, 2, 4, 4);
  fill_uniform(x, rng, -1, 1);
  const AscFields<double> f = asc_generate_fields(x, p);
  for (int oy = 0; oy < 4; ++oy)
    for (int ox = 0; ox < 4; ++ox)
      CHECK(std::abs(f.modulation.at(0, 3, oy, ox) - 1.0) < 1e-8);
}

TEST_CASE("generated fields are slices of the generator convolution") {
  SplitMix64 rng(3);
  const AscParams<double> p = fixture(4, 3, 2, rng);
  Tensor4d x(1, 4, 6, 6);
  fill_uniform(x, rng, -1, 1);
  const AscFields<double> f = asc_generate_fields(x, p);
  const Tensor4d raw = conv2d_direct(x, p.generator);
  CHECK(max_abs_diff(f.offsets, slice_channels(raw, 0, 36)) == 0.0);
  Tensor4d mod = slice_channels(raw, 36, 54);
  for (auto& v : mod.data) v = logistic(v);
  CHECK(max_abs_diff(f.modulation, mod) == 0.0);
}

TEST_CASE("channel mismatch raises a shape error") {
  SplitMix64 rng(4);
  const AscParams<double> p = fixture(4, 3, 2, rng);
  const Tensor4d bad(1, 3, 5, 5);
  CHECK_THROWS_AS(asc_generate_fields(bad, p), ShapeError);
  CHECK_THROWS_AS(
      asc_forward(bad, p, degenerate(1, 18, 5, 5)), ShapeError);
}

TEST_CASE("zero offsets and unit modulation reduce to grouped conv") {
  SplitMix64 rng(5);
  for (int groups : {1, 2, 4}) {
    for (int k : {1, 3}) {
      const AscParams<double> p = fixture(8, k, groups, rng);
      Tensor4d x(2, 8, 6, 6);
      fill_uniform(x, rng, -1, 1);
      const AscFields<double> f =
          degenerate(2, groups * k * k, p.spec.out_h(6), p.spec.out_w(6));
      ConvParams<double> cp;
      cp.spec = {.c_in = 8, .c_out = 8, .kh = k, .kw = k,
                 .pad_h = (k - 1) / 2, .pad_w = (k - 1) / 2, .groups = groups};
      cp.weights = p.base_weights;
      CHECK(max_abs_diff(asc_forward(x, p, f), conv2d_direct(x, cp)) == 0.0);
    }
  }
}

TEST_CASE("stride-2 fields align with the strided output grid") {
  SplitMix64 rng(31);
  AscSpec s;
  s.c_in = s.c_out = 4;
  s.kh = s.kw = 3;
  s.pad_h = s.pad_w = 1;
  s.stride = 2;
  s.groups = 2;
  const AscParams<double> p = make_asc_params<double>(s, rng);
  Tensor4d x(1, 4, 9, 9);
  fill_uniform(x, rng, -1, 1);
  const AscFields<double> gen = asc_generate_fields(x, p);
  CHECK(gen.offsets.h == s.out_h(9));
  CHECK(gen.offsets.w == s.out_w(9));
  // Degenerate fields reduce the strided operator to the strided conv.
  const AscFields<double> f = degenerate(1, 18, s.out_h(9), s.out_w(9));
  ConvParams<double> cp;
  cp.spec = {.c_in = 4, .c_out = 4, .kh = 3, .kw = 3, .stride = 2, .pad_h = 1,
             .pad_w = 1, .groups = 2};
  cp.weights = p.base_weights;
  CHECK(max_abs_diff(asc_forward(x, p, f), conv2d_direct(x, cp)) == 0.0);
}

TEST_CASE("zero modulation annihilates the output") {
  SplitMix64 rng(6);
  const AscParams<double> p = fixture(4, 3, 2, rng);
  Tensor4d x(1, 4, 5, 5);
  fill_uniform(x, rng, -1, 1);
  AscFields<double> f = degenerate(1, 18, 5, 5);
  fill_uniform(f.offsets, rng, -1, 1);
  for (auto& v : f.modulation.data) v = 0.0;
  const Tensor4d y = asc_forward(x, p, f);
  for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("constant half-pixel offset on a linear ramp adds one") {
  AscSpec s;
  s.c_in = s.c_out = 1;
  s.kh = s.kw = 1;
  SplitMix64 rng(7);
  AscParams<double> p = make_asc_params<double>(s, rng);
  p.base_weights = {1.0};
  Tensor4d x(1, 1, 6, 6);
  for (int iy = 0; iy < 6; ++iy)
    for (int ix = 0; ix < 6; ++ix) x.at(0, 0, iy, ix) = iy + 2.0 * ix;
  AscFields<double> f = degenerate(1, 1, 6, 6);
  for (int oy = 0; oy < 6; ++oy)
    for (int ox = 0; ox < 6; ++ox) {
      f.offsets.at(0, 0, oy, ox) = 0.5;
      f.offsets.at(0, 1, oy, ox) = 0.25;
    }
  const Tensor4d y = asc_forward(x, p, f);
  // Interior positions sample at (i + 0.5, j + 0.25) = i + 2j + 1; the last
  // row/column reach into the zero padding.
  for (int oy = 0; oy < 5; ++oy)
    for (int ox = 0; ox < 5; ++ox)
      CHECK(y.at(0, 0, oy, ox) ==
            doctest::Approx(oy + 2.0 * ox + 1.0).epsilon(1e-14));
  // Cross-check the whole map against the nested-loop transcription.
  CHECK(max_abs_diff(y, oracle::naive_asc_forward(x, p, f)) < 1e-14);
}

TEST_CASE("forward matches the nested-loop transcription on small instances") {
  SplitMix64 rng(8);
  for (int groups : {1, 2}) {
    for (int hw : {1, 2, 4, 7, 8}) {
      const AscParams<double> p = fixture(4, 3, groups, rng);
      Tensor4d x(1, 4, hw, hw);
      fill_uniform(x, rng, -1, 1);
      const int gk = groups * 9;
      AscFields<double> f;
      f.offsets = Tensor4d(1, 2 * gk, hw, hw);
      f.modulation = Tensor4d(1, gk, hw, hw);
      fill_uniform(f.offsets, rng, -2, 2);
      fill_uniform(f.modulation, rng, 0, 1);
      CHECK(max_abs_diff(asc_forward(x, p, f),
                         oracle::naive_asc_forward(x, p, f)) <= 1e-12);
    }
  }
}

TEST_CASE("backward zero upstream gradient gives zero everywhere") {
  SplitMix64 rng(9);
  const AscParams<double> p = fixture(2, 3, 1, rng);
  Tensor4d x(1, 2, 5, 5);
  fill_uniform(x, rng, -1, 1);
  AscFields<double> f = degenerate(1, 9, 5, 5);
  fill_uniform(f.offsets, rng, -0.4, 0.4);
  const AscGrads<double> g = asc_backward(x, p, f, Tensor4d(1, 2, 5, 5));
  for (double v : g.grad_x.data) CHECK(v == 0.0);
  for (double v : g.grad_base_weights) CHECK(v == 0.0);
  for (double v : g.grad_offsets.data) CHECK(v == 0.0);
  for (double v : g.grad_modulation.data) CHECK(v == 0.0);
}

TEST_CASE("degenerate backward matches the plain conv backward") {
  SplitMix64 rng(10);
  const AscParams<double> p = fixture(4, 3, 2, rng);
  Tensor4d x(1, 4, 5, 5), go(1, 4, 5, 5);
  fill_uniform(x, rng, -1, 1);
  fill_uniform(go, rng, -1, 1);
  const AscFields<double> f = degenerate(1, 18, 5, 5);
  const AscGrads<double> ag = asc_backward(x, p, f, go);
  ConvParams<double> cp;
  cp.spec = {.c_in = 4, .c_out = 4, .kh = 3, .kw = 3, .pad_h = 1, .pad_w = 1,
             .groups = 2};
  cp.weights = p.base_weights;
  const ConvGrads<double> cg = conv2d_backward(x, cp, go);
  CHECK(max_abs_diff(ag.grad_x, cg.grad_x) <= 1e-12);
  for (std::size_t i = 0; i < cg.grad_w.size(); ++i)
    CHECK(std::abs(ag.grad_base_weights[i] - cg.grad_w[i]) <= 1e-12);
}

TEST_CASE("block examples") {
  AscSpec s;
  s.c_in = s.c_out = 1;
  s.kh = s.kw = 1;
  SplitMix64 rng(11);
  AscParams<double> p = make_asc_params<double>(s, rng);
  p.base_weights = {1.0};
  std::fill(p.generator.weights.begin(), p.generator.weights.end(), 0.0);
  std::fill(p.generator.bias.begin(), p.generator.bias.end(), 0.0);

  SUBCASE("zero input is a fixed point") {
    const Tensor4d y = asc_block_forward(Tensor4d(1, 1, 4, 4), p);
    for (double v : y.data) CHECK(v == 0.0);
  }
  SUBCASE("large constant input passes at half gain") {
    Tensor4d x(1, 1, 4, 4);
    for (auto& v : x.data) v = 100.0;
    const Tensor4d y = asc_block_forward(x, p);
    // Modulation sits at 0.5 and SiLU(50) ~ 50; BN epsilon shifts the
    // result by ~2.5e-4.
    for (double v : y.data) CHECK(std::abs(v - 50.0) < 1e-3);
  }
}

TEST_CASE("block equals the manual composition of its stages") {
  SplitMix64 rng(12);
  AscParams<double> p = fixture(4, 3, 2, rng);
  p.bn = BatchNorm<double>::random(4, rng);
  Tensor4d x(1, 4, 6, 6);
  fill_uniform(x, rng, -1, 1);
  const AscFields<double> f = asc_generate_fields(x, p);
  const Tensor4d want = silu_map(batch_norm(asc_forward(x, p, f), p.bn));
  CHECK(max_abs_diff(asc_block_forward(x, p), want) == 0.0);
}

TEST_CASE("group-consistent channel permutations permute the output") {
  SplitMix64 rng(21);
  const AscParams<double> p = fixture(4, 3, 2, rng);
  Tensor4d x(1, 4, 5, 5);
  fill_uniform(x, rng, -1, 1);
  AscFields<double> f;
  f.offsets = Tensor4d(1, 36, 5, 5);
  f.modulation = Tensor4d(1, 18, 5, 5);
  fill_uniform(f.offsets, rng, -1, 1);
  fill_uniform(f.modulation, rng, 0, 1);
  const Tensor4d base = asc_forward(x, p, f);
  const int cig = 2, kk = 9;

  SUBCASE("swapping output channels within each group permutes rows bitwise") {
    AscParams<double> pp = p;
    auto swap_rows = [&](int a, int b) {
      for (int ci = 0; ci < cig; ++ci)
        for (int k = 0; k < kk; ++k)
          std::swap(pp.base_weights[(a * cig + ci) * kk + k],
                    pp.base_weights[(b * cig + ci) * kk + k]);
    };
    swap_rows(0, 1);
    swap_rows(2, 3);
    const Tensor4d permuted = asc_forward(x, pp, f);
    const int perm[4] = {1, 0, 3, 2};
    for (int oc = 0; oc < 4; ++oc)
      CHECK(max_abs_diff(slice_channels(permuted, oc, oc + 1),
                         slice_channels(base, perm[oc], perm[oc] + 1)) == 0.0);
  }

  SUBCASE("swapping input channels within each group with matching weight columns leaves the output unchanged") {
    AscParams<double> pp = p;
    for (int oc = 0; oc < 4; ++oc)
      for (int k = 0; k < kk; ++k)
        std::swap(pp.base_weights[(oc * cig + 0) * kk + k],
                  pp.base_weights[(oc * cig + 1) * kk + k]);
    Tensor4d xx = x;
    for (int iy = 0; iy < 5; ++iy)
      for (int ix = 0; ix < 5; ++ix) {
        std::swap(xx.at(0, 0, iy, ix), xx.at(0, 1, iy, ix));
        std::swap(xx.at(0, 2, iy, ix), xx.at(0, 3, iy, ix));
      }
    CHECK(max_abs_diff(asc_forward(xx, pp, f), base) <= 1e-12);
  }
}

TEST_CASE("params container round-trips through the binary format") {
  SplitMix64 rng(13);
  AscParams<double> p = fixture(4, 3, 2, rng);
  p.bn = BatchNorm<double>::random(4, rng);
  const std::string path = testutil::temp_path("ascp");
  save_asc_params(path, p);
  const AscParams<double> back = load_asc_params<double>(path);
  std::remove(path.c_str());
  CHECK(back.spec.groups == 2);
  CHECK(back.base_weights == p.base_weights);
  CHECK(back.generator.weights == p.generator.weights);
  CHECK(back.bn.var == p.bn.var);
  Tensor4d x(1, 4, 5, 5);
  fill_uniform(x, rng, -1, 1);
  CHECK(max_abs_diff(asc_block_forward(x, p), asc_block_forward(x, back)) ==
        0.0);
}

TEST_CASE("a misaligned custom generator is rejected") {
  SplitMix64 rng(22);
  AscParams<double> p = fixture(4, 3, 2, rng);
  // Shrink the generator padding so its output no longer matches the main
  // output grid.
  ConvSpec gen = p.generator.spec;
  gen.pad_h = 0;
  p.generator = make_conv_params<double>(gen, rng);
  Tensor4d x(1, 4, 6, 6);
  fill_uniform(x, rng, -1, 1);
  CHECK_THROWS_WITH_AS(asc_generate_fields(x, p), doctest::Contains("align"),
                       ShapeError);
}

TEST_CASE("generator padding must align with the base kernel") {
  CHECK(asc_generator_pad(1, 3) == 1);
  CHECK(asc_generator_pad(0, 1) == 1);
  CHECK(asc_generator_pad(2, 5) == 1);
  CHECK_THROWS_AS(asc_generator_pad(0, 5), SpecError);
  CHECK_THROWS_AS(asc_generator_pad(1, 2), SpecError);
}
