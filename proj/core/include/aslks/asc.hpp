#pragma once

#include "aslks/conv.hpp"
#include "aslks/nn.hpp"
#include "aslks/tensor.hpp"

namespace aslks {

// Adaptive shape convolution: grouped deformable sampling where a generator
// convolution produces per-position offsets and modulation weights, and a
// static base kernel weights the sampled values. Group outputs concatenate
// over channels.
struct AscSpec {
  int c_in = 0;
  int c_out = 0;
  int kh = 3;
  int kw = 3;
  int groups = 1;
  int stride = 1;
  int pad_h = 0;
  int pad_w = 0;

  int points() const { return kh * kw; }  // K, sampling points per group
  void validate() const;
  int out_h(int h) const { return (h + 2 * pad_h - kh) / stride + 1; }
  int out_w(int w) const { return (w + 2 * pad_w - kw) / stride + 1; }
};

// Padding that makes the fixed 3x3 generator produce field maps aligned with
// the main output positions. Requires an odd base kernel extent.
int asc_generator_pad(int pad, int k);

template <typename T>
struct AscParams {
  AscSpec spec;
  std::vector<T> base_weights;  // [c_out, c_in/G, kh, kw]
  ConvParams<T> generator;      // c_in -> 3*G*K channels, G groups
  BatchNorm<T> bn;              // for the ASC block head, sized c_out

  std::int64_t weight_index(int oc, int ci, int ky, int kx) const {
    return ((std::int64_t(oc) * (spec.c_in / spec.groups) + ci) * spec.kh +
            ky) *
               spec.kw +
           kx;
  }
  void validate() const;
};

// Offsets: c = 2*G*K, channel (g*K + k)*2 holding dm (row) then dn (col).
// Modulation: c = G*K, values in [0,1]. Spatial dims match the main output.
template <typename T>
struct AscFields {
  Tensor4<T> offsets;
  Tensor4<T> modulation;
};

template <typename T>
AscParams<T> make_asc_params(const AscSpec& spec, SplitMix64& rng);

// Runs the generator convolution; the first 2*G*K output channels pass
// through unchanged as offsets, the last G*K pass through the logistic
// function to become modulation in [0,1].
template <typename T>
AscFields<T> asc_generate_fields(const Tensor4<T>& x, const AscParams<T>& p);

// y_g(p0) = sum_k w_{g,k} * m_{g,k}(p0) * x_g(p0*stride - pad + p_k + dp);
// fields are explicit inputs so degenerate values can be injected.
template <typename T>
Tensor4<T> asc_forward(const Tensor4<T>& x, const AscParams<T>& p,
                       const AscFields<T>& fields);

template <typename T>
struct AscGrads {
  Tensor4<T> grad_x;
  std::vector<T> grad_base_weights;
  Tensor4<T> grad_offsets;
  Tensor4<T> grad_modulation;
};

template <typename T>
AscGrads<T> asc_backward(const Tensor4<T>& x, const AscParams<T>& p,
                         const AscFields<T>& fields,
                         const Tensor4<T>& grad_out);

// ASC block: generate fields -> asc_forward -> batch norm -> SiLU.
template <typename T>
Tensor4<T> asc_block_forward(const Tensor4<T>& x, const AscParams<T>& p);

}  // namespace aslks
