#pragma once

#include <optional>
#include <vector>

#include "aslks/tensor.hpp"

namespace aslks {

// Geometry of a standard (possibly grouped) convolution. Stride is uniform
// across axes and dilation is fixed at 1.
struct ConvSpec {
  int c_in = 0;
  int c_out = 0;
  int kh = 0;
  int kw = 0;
  int stride = 1;
  int pad_h = 0;
  int pad_w = 0;
  int groups = 1;
  bool has_bias = false;

  void validate() const;
  int out_h(int h) const { return (h + 2 * pad_h - kh) / stride + 1; }
  int out_w(int w) const { return (w + 2 * pad_w - kw) / stride + 1; }
};

template <typename T>
struct ConvParams {
  ConvSpec spec;
  std::vector<T> weights;  // [c_out, c_in/groups, kh, kw]
  std::vector<T> bias;     // [c_out] when spec.has_bias

  std::size_t weight_count() const {
    return std::size_t(spec.c_out) * (spec.c_in / spec.groups) * spec.kh *
           spec.kw;
  }
  std::int64_t weight_index(int oc, int ci, int ky, int kx) const {
    return ((std::int64_t(oc) * (spec.c_in / spec.groups) + ci) * spec.kh +
            ky) *
               spec.kw +
           kx;
  }
  void validate() const;
};

template <typename T>
ConvParams<T> make_conv_params(const ConvSpec& spec, SplitMix64& rng);

// Grouped cross-correlation with zero padding. Per output element the
// summation runs channel-major, then kernel row, then kernel column; every
// element is produced by exactly one task, so results are bit-reproducible
// across runs and thread counts.
template <typename T>
Tensor4<T> conv2d_direct(const Tensor4<T>& x, const ConvParams<T>& p);

template <typename T>
struct ConvGrads {
  Tensor4<T> grad_x;
  std::vector<T> grad_w;
  std::vector<T> grad_b;  // empty unless spec.has_bias
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor4<T>& x, const ConvParams<T>& p,
                             const Tensor4<T>& grad_out);

// out[n,c,i,j] = x[n,c,i-dy,j-dx] where in bounds, else 0. No multiplications.
template <typename T>
Tensor4<T> shift2d(const Tensor4<T>& x, int dy, int dx);

// 4-corner bilinear interpolation at fractional (py, px); corners outside
// [0,h-1]x[0,w-1] contribute 0 (zero-padding semantics).
template <typename T>
T bilinear_sample(const Tensor4<T>& x, int n, int c, T py, T px);

template <typename T>
struct BilinearGrad {
  T value;
  T d_py;  // position derivative; at integer lattice points this is the
  T d_px;  // right/down-continuous branch (floor-based corners)
};

template <typename T>
BilinearGrad<T> bilinear_sample_with_grad(const Tensor4<T>& x, int n, int c,
                                          T py, T px);

// Adjoint of bilinear_sample: distributes g over the in-bounds corners.
template <typename T>
void bilinear_scatter(Tensor4<T>& grad_x, int n, int c, T py, T px, T g);

}  // namespace aslks
