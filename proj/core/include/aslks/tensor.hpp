#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aslks/common.hpp"
#include "aslks/rng.hpp"

namespace aslks {

// Dense NCHW feature map, row-major. All operator inputs and outputs in this
// library are Tensor4 values; T is float or double.
template <typename T>
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_);

  static constexpr DType dtype() {
    return sizeof(T) == 4 ? DType::f32 : DType::f64;
  }

  std::size_t size() const { return data.size(); }

  std::int64_t index(int in, int ic, int iy, int ix) const {
    return ((std::int64_t(in) * c + ic) * h + iy) * w + ix;
  }
  T& at(int in, int ic, int iy, int ix) { return data[index(in, ic, iy, ix)]; }
  const T& at(int in, int ic, int iy, int ix) const {
    return data[index(in, ic, iy, ix)];
  }

  bool same_shape(const Tensor4& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
};

using Tensor4f = Tensor4<float>;
using Tensor4d = Tensor4<double>;

template <typename T>
void fill_uniform(Tensor4<T>& t, SplitMix64& rng, double lo, double hi);

template <typename T>
bool all_finite(const Tensor4<T>& t);

template <typename T>
double max_abs_diff(const Tensor4<T>& a, const Tensor4<T>& b);

template <typename T>
double max_rel_diff(const Tensor4<T>& a, const Tensor4<T>& b);

// Channels [c0, c1) of x as a new tensor.
template <typename T>
Tensor4<T> slice_channels(const Tensor4<T>& x, int c0, int c1);

template <typename T>
Tensor4<T> concat_channels(std::span<const Tensor4<T>* const> parts);

template <typename T>
Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b);

// Zero padding with independent extents per side.
template <typename T>
Tensor4<T> pad_zero(const Tensor4<T>& x, int top, int bottom, int left,
                    int right);

template <typename T>
Tensor4<T> add(const Tensor4<T>& a, const Tensor4<T>& b);

}  // namespace aslks
