#pragma once

#include <cmath>
#include <vector>

#include "aslks/tensor.hpp"

namespace aslks {

inline constexpr double kBnEps = 1e-5;

template <typename T>
inline T logistic(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

template <typename T>
inline T silu(T v) {
  return v * logistic(v);
}

template <typename T>
inline T silu_grad(T v) {
  T s = logistic(v);
  return s * (T(1) + v * (T(1) - s));
}

// Inference-mode batch norm statistics: y = scale*(v-mean)/sqrt(var+eps)+shift.
template <typename T>
struct BatchNorm {
  std::vector<T> scale, shift, mean, var;

  static BatchNorm identity(int c) {
    BatchNorm bn;
    bn.scale.assign(c, T(1));
    bn.shift.assign(c, T(0));
    bn.mean.assign(c, T(0));
    bn.var.assign(c, T(1));
    return bn;
  }

  static BatchNorm random(int c, SplitMix64& rng) {
    BatchNorm bn = identity(c);
    for (int i = 0; i < c; ++i) {
      bn.scale[i] = T(rng.uniform(0.5, 1.5));
      bn.shift[i] = T(rng.uniform(-0.5, 0.5));
      bn.mean[i] = T(rng.uniform(-0.5, 0.5));
      bn.var[i] = T(rng.uniform(0.5, 1.5));
    }
    return bn;
  }

  void validate(int c) const;
};

template <typename T>
Tensor4<T> batch_norm(const Tensor4<T>& x, const BatchNorm<T>& bn);

template <typename T>
Tensor4<T> silu_map(const Tensor4<T>& x);

}  // namespace aslks
