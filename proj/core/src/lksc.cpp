#include "aslks/lksc.hpp"

#include <cmath>
#include <string>

namespace aslks {

void LkscSpec::validate() const {
  if (channels < 1) throw SpecError("LkscSpec: channels must be >= 1");
  if (tile % 2 == 0)
    throw SpecError("LkscSpec: tile size A must be odd, got " +
                    std::to_string(tile));
  if (tile < 1) throw SpecError("LkscSpec: tile size A must be >= 1");
  if (kh < tile)
    throw SpecError("LkscSpec: kh (" + std::to_string(kh) +
                    ") must be >= tile size (" + std::to_string(tile) + ")");
  if (kw < tile)
    throw SpecError("LkscSpec: kw (" + std::to_string(kw) +
                    ") must be >= tile size (" + std::to_string(tile) + ")");
  if (stride != 1)
    throw SpecError("LkscSpec: only stride 1 is supported for the large-kernel path");
}

const char* branch_kind_name(BranchKind k) {
  switch (k) {
    case BranchKind::vertical:
      return "vertical";
    case BranchKind::horizontal:
      return "horizontal";
    case BranchKind::core:
      return "core";
  }
  return "?";
}

namespace {

// Tile t covers rows (or columns) [t*A, (t+1)*A) of the padded strip; the
// shift that makes its centered A x A conv read exactly those kernel taps is
// anchor - t*A - (A-1)/2.
int tile_shift(int anchor, int t, int a) { return anchor - t * a - (a - 1) / 2; }

template <typename T>
BranchPlan<T> build_branch(BranchKind kind, int channels, int rows, int cols,
                           int a, std::span<const T> weights) {
  if (weights.size() != std::size_t(channels) * rows * cols)
    throw ShapeError(std::string("plan_lksc: ") + branch_kind_name(kind) +
                     " weight array has " + std::to_string(weights.size()) +
                     " entries, expected " +
                     std::to_string(std::size_t(channels) * rows * cols));
  BranchPlan<T> b;
  b.kind = kind;
  b.channels = channels;
  b.tile = a;
  b.rows = rows;
  b.cols = cols;
  const int tiles_y = kind == BranchKind::vertical ? (rows + a - 1) / a : 1;
  const int tiles_x = kind == BranchKind::horizontal ? (cols + a - 1) / a : 1;
  b.padded_rows = kind == BranchKind::vertical ? tiles_y * a : rows;
  b.padded_cols = kind == BranchKind::horizontal ? tiles_x * a : cols;
  b.anchor_y = b.padded_rows / 2;
  b.anchor_x = b.padded_cols / 2;
  b.weights.assign(weights.begin(), weights.end());

  const int n_tiles = kind == BranchKind::vertical ? tiles_y : tiles_x;
  auto strip = [&](int ch, int r, int col) -> T {
    if (r >= rows || col >= cols) return T(0);
    return b.weights[(std::size_t(ch) * rows + r) * cols + col];
  };
  for (int t = 0; t < n_tiles; ++t) {
    TileShift<T> ts;
    ts.index = t;
    ts.weights.assign(std::size_t(channels) * a * a, T(0));
    for (int ch = 0; ch < channels; ++ch)
      for (int ay = 0; ay < a; ++ay)
        for (int ax = 0; ax < a; ++ax) {
          const int r = kind == BranchKind::vertical ? t * a + ay : ay;
          const int col = kind == BranchKind::horizontal ? t * a + ax : ax;
          ts.weights[(std::size_t(ch) * a + ay) * a + ax] = strip(ch, r, col);
        }
    ts.dy = kind == BranchKind::vertical ? tile_shift(b.anchor_y, t, a) : 0;
    ts.dx = kind == BranchKind::horizontal ? tile_shift(b.anchor_x, t, a) : 0;
    b.tiles.push_back(std::move(ts));
  }
  return b;
}

template <typename T>
ConvParams<T> depthwise_tile_params(int channels, int a,
                                    const std::vector<T>& weights) {
  ConvParams<T> p;
  p.spec.c_in = p.spec.c_out = p.spec.groups = channels;
  p.spec.kh = p.spec.kw = a;
  p.spec.stride = 1;
  p.spec.pad_h = p.spec.pad_w = 0;
  p.weights = weights;
  return p;
}

template <typename T>
Tensor4<T> crop_center(const Tensor4<T>& x, int margin_h, int margin_w) {
  Tensor4<T> out(x.n, x.c, x.h - 2 * margin_h, x.w - 2 * margin_w);
  for (int in = 0; in < x.n; ++in)
    for (int ic = 0; ic < x.c; ++ic)
      for (int iy = 0; iy < out.h; ++iy)
        for (int ix = 0; ix < out.w; ++ix)
          out.at(in, ic, iy, ix) = x.at(in, ic, iy + margin_h, ix + margin_w);
  return out;
}

}  // namespace

template <typename T>
LkscPlan<T> plan_lksc(const LkscSpec& spec, std::span<const T> weights_v,
                      std::span<const T> weights_h,
                      std::span<const T> weights_c) {
  spec.validate();
  LkscPlan<T> plan;
  plan.spec = spec;
  plan.branches[0] = build_branch(BranchKind::vertical, spec.channels, spec.kh,
                                  spec.tile, spec.tile, weights_v);
  plan.branches[1] = build_branch(BranchKind::horizontal, spec.channels,
                                  spec.tile, spec.kw, spec.tile, weights_h);
  plan.branches[2] = build_branch(BranchKind::core, spec.channels, spec.tile,
                                  spec.tile, spec.tile, weights_c);

  ConvSpec pw;
  pw.c_in = pw.c_out = spec.channels;
  pw.kh = pw.kw = 1;
  pw.has_bias = true;
  plan.pointwise.spec = pw;
  plan.pointwise.weights.assign(std::size_t(spec.channels) * spec.channels,
                                T(0));
  for (int ch = 0; ch < spec.channels; ++ch)
    plan.pointwise.weights[std::size_t(ch) * spec.channels + ch] = T(1);
  plan.pointwise.bias.assign(spec.channels, T(0));
  plan.bn = BatchNorm<T>::identity(spec.channels);
  return plan;
}

template <typename T>
LkscPlan<T> make_lksc_plan(const LkscSpec& spec, SplitMix64& rng) {
  spec.validate();
  const int c = spec.channels, a = spec.tile;
  auto draw = [&](int rows, int cols) {
    std::vector<T> w(std::size_t(c) * rows * cols);
    const double scale = 1.0 / std::sqrt(double(rows) * cols);
    for (auto& v : w) v = T(rng.uniform(-scale, scale));
    return w;
  };
  const std::vector<T> wv = draw(spec.kh, a);
  const std::vector<T> wh = draw(a, spec.kw);
  const std::vector<T> wc = draw(a, a);
  LkscPlan<T> plan = plan_lksc<T>(spec, wv, wh, wc);

  const double pw_scale = 1.0 / std::sqrt(double(c));
  for (auto& v : plan.pointwise.weights) v = T(rng.uniform(-pw_scale, pw_scale));
  for (auto& v : plan.pointwise.bias) v = T(rng.uniform(-pw_scale, pw_scale));
  plan.bn = BatchNorm<T>::random(c, rng);
  return plan;
}

template <typename T>
Tensor4<T> shift_conv_forward(const Tensor4<T>& x, const BranchPlan<T>& b) {
  if (x.c != b.channels)
    throw ShapeError("shift_conv_forward: input channel axis is " +
                     std::to_string(x.c) + ", plan channels is " +
                     std::to_string(b.channels));
  // The "same"-padding halo is materialized before shifting: a tile with a
  // nonzero shift must read the (A-1)/2 border band that plain zero-fill
  // shifting would discard, or the boundary rows of the direct large-kernel
  // result cannot be reproduced. With the halo in place, positions lost to
  // the shift's zero fill are exactly those the padded strip kernel reads as
  // zero anyway, so the tile sum is exact everywhere.
  const int margin = (b.tile - 1) / 2;
  const Tensor4<T> halo = pad_zero(x, margin, margin, margin, margin);
  Tensor4<T> out(x.n, x.c, x.h, x.w);
  for (const auto& tile : b.tiles) {
    const ConvParams<T> params =
        depthwise_tile_params(b.channels, b.tile, tile.weights);
    const Tensor4<T> contrib =
        conv2d_direct(shift2d(halo, tile.dy, tile.dx), params);
    for (std::size_t i = 0; i < out.data.size(); ++i)
      out.data[i] += contrib.data[i];
  }
  return out;
}

template <typename T>
Tensor4<T> branch_padded_kernel(const BranchPlan<T>& b) {
  Tensor4<T> k(b.channels, 1, b.padded_rows, b.padded_cols);
  for (int ch = 0; ch < b.channels; ++ch)
    for (int r = 0; r < b.rows; ++r)
      for (int col = 0; col < b.cols; ++col)
        k.at(ch, 0, r, col) =
            b.weights[(std::size_t(ch) * b.rows + r) * b.cols + col];
  return k;
}

template <typename T>
Tensor4<T> branch_direct_conv(const Tensor4<T>& x, const BranchPlan<T>& b) {
  const Tensor4<T> kernel = branch_padded_kernel(b);
  const Tensor4<T> padded =
      pad_zero(x, b.anchor_y, b.padded_rows - 1 - b.anchor_y, b.anchor_x,
               b.padded_cols - 1 - b.anchor_x);
  ConvParams<T> p;
  p.spec.c_in = p.spec.c_out = p.spec.groups = b.channels;
  p.spec.kh = b.padded_rows;
  p.spec.kw = b.padded_cols;
  p.weights = kernel.data;
  return conv2d_direct(padded, p);
}

template <typename T>
Tensor4<T> lksc_linear(const Tensor4<T>& x, const LkscPlan<T>& plan) {
  if (x.c != plan.spec.channels)
    throw ShapeError("lksc_linear: input channel axis is " +
                     std::to_string(x.c) + ", spec channels is " +
                     std::to_string(plan.spec.channels));
  Tensor4<T> out = shift_conv_forward(x, plan.branches[0]);
  for (int bi = 1; bi < 3; ++bi) {
    const Tensor4<T> contrib = shift_conv_forward(x, plan.branches[bi]);
    for (std::size_t i = 0; i < out.data.size(); ++i)
      out.data[i] += contrib.data[i];
  }
  return out;
}

template <typename T>
Tensor4<T> lksc_dense_direct(const Tensor4<T>& x, const LkscPlan<T>& plan) {
  const LkscSpec& s = plan.spec;
  const int rows = plan.branches[0].padded_rows;
  const int cols = plan.branches[1].padded_cols;
  const int anchor_y = rows / 2, anchor_x = cols / 2;
  Tensor4<T> dense(s.channels, 1, rows, cols);
  for (const auto& b : plan.branches) {
    const Tensor4<T> k = branch_padded_kernel(b);
    for (int ch = 0; ch < s.channels; ++ch)
      for (int r = 0; r < b.padded_rows; ++r)
        for (int col = 0; col < b.padded_cols; ++col)
          dense.at(ch, 0, anchor_y + (r - b.anchor_y),
                   anchor_x + (col - b.anchor_x)) += k.at(ch, 0, r, col);
  }
  const Tensor4<T> padded =
      pad_zero(x, anchor_y, rows - 1 - anchor_y, anchor_x, cols - 1 - anchor_x);
  ConvParams<T> p;
  p.spec.c_in = p.spec.c_out = p.spec.groups = s.channels;
  p.spec.kh = rows;
  p.spec.kw = cols;
  p.weights = dense.data;
  return conv2d_direct(padded, p);
}

template <typename T>
Tensor4<T> lksc_forward(const Tensor4<T>& x, const LkscPlan<T>& plan) {
  const Tensor4<T> linear = lksc_linear(x, plan);
  return silu_map(batch_norm(conv2d_direct(linear, plan.pointwise), plan.bn));
}

template <typename T>
LkscGrads<T> lksc_backward(const Tensor4<T>& x, const LkscPlan<T>& plan,
                           const Tensor4<T>& grad_out) {
  const Tensor4<T> linear = lksc_linear(x, plan);
  const Tensor4<T> z = conv2d_direct(linear, plan.pointwise);
  const Tensor4<T> bn_out = batch_norm(z, plan.bn);
  if (!grad_out.same_shape(bn_out))
    throw ShapeError("lksc_backward: grad_out shape does not match the forward output");

  Tensor4<T> grad_z(z.n, z.c, z.h, z.w);
  const std::size_t plane = std::size_t(z.h) * z.w;
  for (int in = 0; in < z.n; ++in)
    for (int ch = 0; ch < z.c; ++ch) {
      const T scale = plan.bn.scale[ch] / std::sqrt(plan.bn.var[ch] + T(kBnEps));
      const std::size_t base = (std::size_t(in) * z.c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i)
        grad_z.data[base + i] = grad_out.data[base + i] *
                                silu_grad(bn_out.data[base + i]) * scale;
    }

  ConvGrads<T> pw = conv2d_backward(linear, plan.pointwise, grad_z);

  LkscGrads<T> g;
  g.grad_pointwise_w = std::move(pw.grad_w);
  g.grad_pointwise_b = std::move(pw.grad_b);
  g.grad_x = Tensor4<T>(x.n, x.c, x.h, x.w);

  for (int bi = 0; bi < 3; ++bi) {
    const BranchPlan<T>& b = plan.branches[bi];
    const int a = b.tile;
    const int margin = (a - 1) / 2;
    const Tensor4<T> halo = pad_zero(x, margin, margin, margin, margin);
    g.grad_branch_weights[bi].assign(b.weights.size(), T(0));
    for (const auto& tile : b.tiles) {
      const Tensor4<T> xs = shift2d(halo, tile.dy, tile.dx);
      const ConvParams<T> params =
          depthwise_tile_params(b.channels, a, tile.weights);
      ConvGrads<T> cg = conv2d_backward(xs, params, pw.grad_x);
      const Tensor4<T> back =
          crop_center(shift2d(cg.grad_x, -tile.dy, -tile.dx), margin, margin);
      for (std::size_t i = 0; i < g.grad_x.data.size(); ++i)
        g.grad_x.data[i] += back.data[i];
      // Tile weight gradients fold back into the strip; taps on the
      // structural zero padding are dropped.
      for (int ch = 0; ch < b.channels; ++ch)
        for (int ay = 0; ay < a; ++ay)
          for (int ax = 0; ax < a; ++ax) {
            const int r =
                b.kind == BranchKind::vertical ? tile.index * a + ay : ay;
            const int col =
                b.kind == BranchKind::horizontal ? tile.index * a + ax : ax;
            if (r >= b.rows || col >= b.cols) continue;
            g.grad_branch_weights[bi][(std::size_t(ch) * b.rows + r) * b.cols +
                                      col] +=
                cg.grad_w[(std::size_t(ch) * a + ay) * a + ax];
          }
    }
  }
  return g;
}

long long lksc_branch_params_per_channel(const LkscSpec& spec) {
  return 1LL * spec.kh * spec.tile + 1LL * spec.tile * spec.kw +
         1LL * spec.tile * spec.tile;
}

double lksc_param_ratio(const LkscSpec& spec) {
  return double(lksc_branch_params_per_channel(spec)) /
         double(1LL * spec.kh * spec.kw);
}

#define ASLKS_INSTANTIATE(T)                                                  \
  template struct TileShift<T>;                                               \
  template struct BranchPlan<T>;                                              \
  template struct LkscPlan<T>;                                                \
  template LkscPlan<T> plan_lksc<T>(const LkscSpec&, std::span<const T>,      \
                                    std::span<const T>, std::span<const T>);  \
  template LkscPlan<T> make_lksc_plan<T>(const LkscSpec&, SplitMix64&);       \
  template Tensor4<T> shift_conv_forward<T>(const Tensor4<T>&,                \
                                            const BranchPlan<T>&);            \
  template Tensor4<T> branch_padded_kernel<T>(const BranchPlan<T>&);          \
  template Tensor4<T> branch_direct_conv<T>(const Tensor4<T>&,                \
                                            const BranchPlan<T>&);            \
  template Tensor4<T> lksc_linear<T>(const Tensor4<T>&, const LkscPlan<T>&);  \
  template Tensor4<T> lksc_dense_direct<T>(const Tensor4<T>&,                 \
                                           const LkscPlan<T>&);               \
  template Tensor4<T> lksc_forward<T>(const Tensor4<T>&, const LkscPlan<T>&); \
  template LkscGrads<T> lksc_backward<T>(const Tensor4<T>&,                   \
                                         const LkscPlan<T>&,                  \
                                         const Tensor4<T>&);

ASLKS_INSTANTIATE(float)
ASLKS_INSTANTIATE(double)
#undef ASLKS_INSTANTIATE

}  // namespace aslks
