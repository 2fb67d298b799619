#pragma once

#include <array>

#include "aslks/conv.hpp"
#include "aslks/nn.hpp"
#include "aslks/tensor.hpp"

namespace aslks {

// Large kernel shift convolution: a kh x kw depthwise kernel realized as a
// vertical strip (kh x A), a horizontal strip (A x kw) and an A x A core,
// each strip rewritten as non-overlapping A x A tiles applied to spatially
// shifted inputs and summed. Fusion is a 1x1 pointwise conv + BN + SiLU.
struct LkscSpec {
  int channels = 0;  // depthwise: groups == channels
  int kh = 51;       // focus length
  int kw = 51;       // focus width
  int tile = 5;      // A, odd
  int stride = 1;

  void validate() const;
  int tiles_v() const { return (kh + tile - 1) / tile; }  // ceil(kh/A)
  int tiles_h() const { return (kw + tile - 1) / tile; }
};

template <typename T>
struct TileShift {
  int index = 0;
  int dy = 0, dx = 0;
  std::vector<T> weights;  // [c, A, A] slice of the padded strip kernel
};

enum class BranchKind { vertical, horizontal, core };

const char* branch_kind_name(BranchKind k);

// One strip branch plus its tile/shift schedule. The strip kernel is
// zero-padded to a whole number of tiles (rows appended at the bottom,
// columns at the right); anchor is the kernel position that maps to zero
// shift and fixes the padding of the direct equivalence target
// (pad_top = anchor_y, pad_bottom = padded_rows-1-anchor_y, similarly x).
template <typename T>
struct BranchPlan {
  BranchKind kind = BranchKind::core;
  int channels = 0;
  int tile = 0;                          // A
  int rows = 0, cols = 0;                // original strip extent
  int padded_rows = 0, padded_cols = 0;  // whole-tile extent
  int anchor_y = 0, anchor_x = 0;
  std::vector<T> weights;  // [c, rows, cols]
  std::vector<TileShift<T>> tiles;
};

template <typename T>
struct LkscPlan {
  LkscSpec spec;
  std::array<BranchPlan<T>, 3> branches;  // vertical, horizontal, core
  ConvParams<T> pointwise;                // 1x1 mixing c -> c, with bias
  BatchNorm<T> bn;
};

// Splits each strip into tiles; tile t covers rows [t*A, (t+1)*A) of the
// padded kernel and is applied to the input shifted by
// dy = anchor_y - t*A - (A-1)/2 (columns analogous for the horizontal
// branch), which makes the tile sum exactly equal the direct anchored
// convolution with the padded kernel.
template <typename T>
LkscPlan<T> plan_lksc(const LkscSpec& spec, std::span<const T> weights_v,
                      std::span<const T> weights_h,
                      std::span<const T> weights_c);

template <typename T>
LkscPlan<T> make_lksc_plan(const LkscSpec& spec, SplitMix64& rng);

// Sum over tiles of conv2d_direct(shift2d(x, dy, dx), tile kernel) with
// "same" padding (A-1)/2, depthwise.
template <typename T>
Tensor4<T> shift_conv_forward(const Tensor4<T>& x, const BranchPlan<T>& b);

// Direct route for the equivalence pair: depthwise convolution with the
// padded strip kernel at the recorded anchor.
template <typename T>
Tensor4<T> branch_direct_conv(const Tensor4<T>& x, const BranchPlan<T>& b);

// The padded strip kernel as a (c, 1, padded_rows, padded_cols) tensor.
template <typename T>
Tensor4<T> branch_padded_kernel(const BranchPlan<T>& b);

// Pre-pointwise linear stage: sum of the three branch outputs.
template <typename T>
Tensor4<T> lksc_linear(const Tensor4<T>& x, const LkscPlan<T>& plan);

// Embeds the three branches into one dense anchored depthwise kernel and
// convolves directly; equals lksc_linear and serves as its timing baseline.
template <typename T>
Tensor4<T> lksc_dense_direct(const Tensor4<T>& x, const LkscPlan<T>& plan);

// SiLU(BN(pointwise(linear stage))).
template <typename T>
Tensor4<T> lksc_forward(const Tensor4<T>& x, const LkscPlan<T>& plan);

template <typename T>
struct LkscGrads {
  Tensor4<T> grad_x;
  std::array<std::vector<T>, 3> grad_branch_weights;  // original strip shapes
  std::vector<T> grad_pointwise_w;
  std::vector<T> grad_pointwise_b;
};

template <typename T>
LkscGrads<T> lksc_backward(const Tensor4<T>& x, const LkscPlan<T>& plan,
                           const Tensor4<T>& grad_out);

// Branch weight count per channel: kh*A + A*kw + A*A.
long long lksc_branch_params_per_channel(const LkscSpec& spec);

// (kh*A + A*kw + A^2) / (kh*kw); 535/2601 ~ 0.2057 for the 51/5 default.
double lksc_param_ratio(const LkscSpec& spec);

}  // namespace aslks
