#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aslks/io.hpp"
#include "aslks/lksc.hpp"
#include "test_util.hpp"

using namespace aslks;

namespace {

double sum(const Tensor4d& t) {
  double acc = 0;
  for (double v : t.data) acc += v;
  return acc;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_THROWS_AS((LkscSpec{.channels = 1, .kh = 8, .kw = 8, .tile = 4}.validate()),
                  SpecError);
  CHECK_THROWS_AS((LkscSpec{.channels = 1, .kh = 3, .kw = 9, .tile = 5}.validate()),
                  SpecError);
  CHECK_THROWS_AS(
      (LkscSpec{.channels = 1, .kh = 9, .kw = 9, .tile = 5, .stride = 2}.validate()),
      SpecError);
  CHECK_NOTHROW((LkscSpec{.channels = 2, .kh = 51, .kw = 51, .tile = 5}.validate()));
}

TEST_CASE("degenerate plan: kh = kw = A gives single zero-shift tiles") {
  SplitMix64 rng(1);
  LkscSpec s{.channels = 1, .kh = 5, .kw = 5, .tile = 5};
  const LkscPlan<double> plan = make_lksc_plan<double>(s, rng);
  for (const auto& b : plan.branches) {
    REQUIRE(b.tiles.size() == 1);
    CHECK(b.tiles[0].dy == 0);
    CHECK(b.tiles[0].dx == 0);
  }
}

TEST_CASE("51/5 plan produces eleven tiles with the documented shift set") {
  SplitMix64 rng(2);
  LkscSpec s{.channels = 1, .kh = 51, .kw = 51, .tile = 5};
  const LkscPlan<double> plan = make_lksc_plan<double>(s, rng);
  REQUIRE(plan.branches[0].tiles.size() == 11);
  REQUIRE(plan.branches[1].tiles.size() == 11);
  REQUIRE(plan.branches[2].tiles.size() == 1);
  CHECK(plan.branches[0].padded_rows == 55);
  CHECK(plan.branches[0].anchor_y == 27);
  std::set<int> dys;
  for (const auto& t : plan.branches[0].tiles) {
    CHECK(t.dx == 0);
    dys.insert(t.dy);
  }
  std::set<int> want;
  for (int v = -25; v <= 25; v += 5) want.insert(v);
  CHECK(dys == want);
}

TEST_CASE("kh = 7, A = 5 pads to an even extent with a recorded anchor") {
  SplitMix64 rng(3);
  LkscSpec s{.channels = 2, .kh = 7, .kw = 7, .tile = 5};
  const LkscPlan<double> plan = make_lksc_plan<double>(s, rng);
  const BranchPlan<double>& v = plan.branches[0];
  CHECK(v.tiles.size() == 2);
  CHECK(v.padded_rows == 10);
  CHECK(v.anchor_y == 5);
  std::set<int> dys;
  for (const auto& t : v.tiles) dys.insert(t.dy);
  CHECK(dys == std::set<int>{-2, 3});
  // The shift formula is only trusted against the direct anchored conv.
  Tensor4d x(1, 2, 9, 9);
  fill_uniform(x, rng, -1, 1);
  CHECK(max_abs_diff(shift_conv_forward(x, v), branch_direct_conv(x, v)) <=
        1e-12);
}

TEST_CASE("tile slices reassemble the padded kernel losslessly") {
  SplitMix64 rng(4);
  LkscSpec s{.channels = 2, .kh = 13, .kw = 11, .tile = 3};
  const LkscPlan<double> plan = make_lksc_plan<double>(s, rng);
  for (const auto& b : plan.branches) {
    const Tensor4d padded = branch_padded_kernel(b);
    Tensor4d rebuilt(b.channels, 1, b.padded_rows, b.padded_cols);
    for (const auto& tile : b.tiles)
      for (int ch = 0; ch < b.channels; ++ch)
        for (int ay = 0; ay < b.tile; ++ay)
          for (int ax = 0; ax < b.tile; ++ax) {
            const int r =
                b.kind == BranchKind::vertical ? tile.index * b.tile + ay : ay;
            const int col = b.kind == BranchKind::horizontal
                                ? tile.index * b.tile + ax
                                : ax;
            rebuilt.at(ch, 0, r, col) =
                tile.weights[(std::size_t(ch) * b.tile + ay) * b.tile + ax];
          }
    CHECK(max_abs_diff(padded, rebuilt) == 0.0);
    for (int ch = 0; ch < b.channels; ++ch)
      for (int r = b.rows; r < b.padded_rows; ++r)
        for (int col = 0; col < b.padded_cols; ++col)
          CHECK(padded.at(ch, 0, r, col) == 0.0);
  }
}

TEST_CASE("only the center tile nonzero reduces to a plain small conv") {
  SplitMix64 rng(5);
  LkscSpec s{.channels = 2, .kh = 15, .kw = 15, .tile = 5};
  std::vector<double> wv(2 * 15 * 5, 0.0);
  for (int ch = 0; ch < 2; ++ch)
    for (int r = 5; r < 10; ++r)
      for (int col = 0; col < 5; ++col)
        wv[(ch * 15 + r) * 5 + col] = rng.uniform(-0.5, 0.5);
  const std::vector<double> zh(2 * 5 * 15, 0.0), zc(2 * 5 * 5, 0.0);
  const LkscPlan<double> plan = plan_lksc<double>(s, wv, zh, zc);
  Tensor4d x(1, 2, 12, 12);
  fill_uniform(x, rng, -1, 1);

  ConvParams<double> small;
  small.spec = {.c_in = 2, .c_out = 2, .kh = 5, .kw = 5, .pad_h = 2,
                .pad_w = 2, .groups = 2};
  small.weights.resize(2 * 25);
  for (int ch = 0; ch < 2; ++ch)
    for (int r = 0; r < 5; ++r)
      for (int col = 0; col < 5; ++col)
        small.weights[(ch * 5 + r) * 5 + col] = wv[(ch * 15 + r + 5) * 5 + col];
  CHECK(max_abs_diff(shift_conv_forward(x, plan.branches[0]),
                     conv2d_direct(x, small)) == 0.0);
}

TEST_CASE("all-zero kernels annihilate the linear stage") {
  LkscSpec s{.channels = 2, .kh = 7, .kw = 7, .tile = 5};
  const std::vector<double> zv(2 * 7 * 5, 0.0), zh(2 * 5 * 7, 0.0),
      zc(2 * 5 * 5, 0.0);
  const LkscPlan<double> plan = plan_lksc<double>(s, zv, zh, zc);
  SplitMix64 rng(6);
  Tensor4d x(1, 2, 8, 8);
  fill_uniform(x, rng, -1, 1);
  CHECK(sum(lksc_linear(x, plan)) == 0.0);
}

TEST_CASE("random strips equal the direct padded-kernel convolution") {
  SplitMix64 rng(7);
  LkscSpec s{.channels = 3, .kh = 51, .kw = 51, .tile = 5};
  const LkscPlan<double> plan = make_lksc_plan<double>(s, rng);
  Tensor4d x(1, 3, 40, 40);
  fill_uniform(x, rng, -1, 1);
  for (const auto& b : plan.branches)
    CHECK(max_abs_diff(shift_conv_forward(x, b), branch_direct_conv(x, b)) <=
          1e-12);
}

TEST_CASE("f32 equivalence stays within 1e-5") {
  SplitMix64 rng(8);
  LkscSpec s{.channels = 3, .kh = 51, .kw = 51, .tile = 5};
  const LkscPlan<float> plan = make_lksc_plan<float>(s, rng);
  Tensor4f x(1, 3, 48, 48);
  fill_uniform(x, rng, -1, 1);
  for (const auto& b : plan.branches)
    CHECK(max_abs_diff(shift_conv_forward(x, b), branch_direct_conv(x, b)) <=
          1e-5);
}

TEST_CASE("linear stage equals the three-branch direct sum and the dense embed") {
  SplitMix64 rng(9);
  LkscSpec s{.channels = 2, .kh = 11, .kw = 9, .tile = 3};
  const LkscPlan<double> plan = make_lksc_plan<double>(s, rng);
  Tensor4d x(2, 2, 16, 16);
  fill_uniform(x, rng, -1, 1);
  const Tensor4d lin = lksc_linear(x, plan);
  Tensor4d direct = branch_direct_conv(x, plan.branches[0]);
  for (int bi = 1; bi < 3; ++bi) {
    const Tensor4d part = branch_direct_conv(x, plan.branches[bi]);
    for (std::size_t i = 0; i < direct.data.size(); ++i)
      direct.data[i] += part.data[i];
  }
  CHECK(max_abs_diff(lin, direct) <= 1e-12);
  CHECK(max_abs_diff(lin, lksc_dense_direct(x, plan)) <= 1e-12);
}

TEST_CASE("constant propagation through the fused head") {
  LkscSpec s{.channels = 2, .kh = 7, .kw = 7, .tile = 5};
  const std::vector<double> zv(2 * 7 * 5, 0.0), zh(2 * 5 * 7, 0.0),
      zc(2 * 5 * 5, 0.0);
  LkscPlan<double> plan = plan_lksc<double>(s, zv, zh, zc);
  plan.pointwise.bias = {0.7, -1.3};
  SplitMix64 rng(10);
  Tensor4d x(1, 2, 6, 6);
  fill_uniform(x, rng, -1, 1);
  const Tensor4d y = lksc_forward(x, plan);
  for (int ch = 0; ch < 2; ++ch) {
    const double want =
        silu(plan.pointwise.bias[ch] / std::sqrt(1.0 + kBnEps));
    for (int iy = 0; iy < 6; ++iy)
      for (int ix = 0; ix < 6; ++ix)
        CHECK(y.at(0, ch, iy, ix) == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("backward zero gradient and shape guards") {
  SplitMix64 rng(11);
  LkscSpec s{.channels = 2, .kh = 7, .kw = 7, .tile = 5};
  const LkscPlan<double> plan = make_lksc_plan<double>(s, rng);
  Tensor4d x(1, 2, 8, 8);
  fill_uniform(x, rng, -1, 1);
  const LkscGrads<double> g = lksc_backward(x, plan, Tensor4d(1, 2, 8, 8));
  CHECK(sum(g.grad_x) == 0.0);
  for (const auto& bw : g.grad_branch_weights)
    for (double v : bw) CHECK(v == 0.0);
  CHECK_THROWS_AS(lksc_backward(x, plan, Tensor4d(1, 2, 7, 8)), ShapeError);
  CHECK_THROWS_AS(lksc_linear(Tensor4d(1, 3, 8, 8), plan), ShapeError);
}

TEST_CASE("branch parameter accounting") {
  LkscSpec s{.channels = 1, .kh = 51, .kw = 51, .tile = 5};
  CHECK(lksc_branch_params_per_channel(s) == 535);
  CHECK(lksc_param_ratio(s) == doctest::Approx(535.0 / 2601.0).epsilon(1e-15));
  LkscSpec d{.channels = 1, .kh = 5, .kw = 5, .tile = 5};
  CHECK(lksc_branch_params_per_channel(d) == 75);
}

TEST_CASE("plan serialization round-trips and validates the shift table") {
  SplitMix64 rng(12);
  LkscSpec s{.channels = 2, .kh = 11, .kw = 7, .tile = 3};
  const LkscPlan<double> plan = make_lksc_plan<double>(s, rng);
  const std::string base = testutil::temp_path("plan");
  save_lksc_plan(base + ".json", base + ".t4pk", plan);

  SUBCASE("round trip preserves the forward computation bitwise") {
    const LkscPlan<double> back = load_lksc_plan<double>(base + ".json");
    Tensor4d x(1, 2, 9, 9);
    fill_uniform(x, rng, -1, 1);
    CHECK(max_abs_diff(lksc_forward(x, plan), lksc_forward(x, back)) == 0.0);
    CHECK(back.branches[0].anchor_y == plan.branches[0].anchor_y);
  }

  SUBCASE("document carries spec integers and a tile shift table") {
    std::ifstream in(base + ".json");
    const auto doc = nlohmann::json::parse(in);
    CHECK(doc.at("format") == "aslks-lksc-plan");
    CHECK(doc.at("spec").at("kh") == 11);
    CHECK(doc.at("spec").at("tile") == 3);
    CHECK(doc.at("branches").size() == 3);
    CHECK(doc.at("branches")[0].at("tiles").size() == 4);  // ceil(11/3)
    CHECK(doc.at("branches")[0].at("tiles")[0].contains("dy"));
  }

  SUBCASE("loading at the wrong dtype is rejected") {
    CHECK_THROWS_WITH_AS(load_lksc_plan<float>(base + ".json"),
                         doctest::Contains("dtype"), ParseError);
  }

  SUBCASE("a tampered shift table is rejected on load") {
    std::ifstream in(base + ".json");
    auto doc = nlohmann::json::parse(in);
    in.close();
    doc["branches"][0]["tiles"][0]["dy"] =
        doc["branches"][0]["tiles"][0]["dy"].get<int>() + 1;
    std::ofstream out(base + ".json");
    out << doc.dump(2);
    out.close();
    CHECK_THROWS_AS(load_lksc_plan<double>(base + ".json"), ParseError);
  }

  std::remove((base + ".json").c_str());
  std::remove((base + ".t4pk").c_str());
}
