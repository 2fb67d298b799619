#pragma once

#include <span>
#include <string>
#include <vector>

#include "aslks/asc.hpp"
#include "aslks/lksc.hpp"

namespace aslks {

enum class C2fVariant { standard, ascm, lkscm };

const char* c2f_variant_name(C2fVariant v);
C2fVariant c2f_variant_from_name(const std::string& name);

// One C2f block. kernel is the bottleneck conv size for standard, the base
// kernel for ascm units and the large-kernel extent for lkscm units; tile is
// the lkscm small-kernel size A; groups is the ASC group count.
struct C2fConfig {
  int c_in = 0;
  int c_out = 0;
  int c_prime = 0;  // hidden width; 0 means c_out/2
  int n = 1;        // operator repeat count
  C2fVariant variant = C2fVariant::standard;
  bool faithful_eq6 = true;
  int kernel = 0;  // 0 means the variant default (3, or 51 for lkscm)
  int tile = 5;
  int groups = 1;

  int hidden() const { return c_prime > 0 ? c_prime : c_out / 2; }
  int unit_kernel() const {
    if (kernel > 0) return kernel;
    return variant == C2fVariant::lkscm ? 51 : 3;
  }
  void validate() const;
};

template <typename T>
struct ConvBnSilu {
  ConvParams<T> conv;
  BatchNorm<T> bn;
};

template <typename T>
Tensor4<T> conv_bn_silu(const Tensor4<T>& x, const ConvBnSilu<T>& m);

// Two 3x3 convs with a residual add when in/out widths match.
template <typename T>
struct Bottleneck {
  ConvBnSilu<T> cv1, cv2;
  bool residual = true;
};

template <typename T>
Tensor4<T> bottleneck_forward(const Tensor4<T>& x, const Bottleneck<T>& b);

template <typename T>
struct C2fBlock {
  C2fConfig cfg;
  ConvBnSilu<T> stem;  // 1x1, c_in -> 2c'
  ConvBnSilu<T> tail;  // 1x1, concat width -> c_out
  std::vector<Bottleneck<T>> bottlenecks;  // standard
  std::vector<AscParams<T>> asc_units;     // ascm
  std::vector<LkscPlan<T>> lksc_units;     // lkscm
};

template <typename T>
C2fBlock<T> make_c2f_block(const C2fConfig& cfg, SplitMix64& rng);

// Channel width of the pre-tail concat, observable from executed runs.
struct C2fTrace {
  int concat_channels = 0;
};

// Standard baseline: stem -> split -> chained bottlenecks on the second half
// -> concat of both halves plus every intermediate -> tail conv.
template <typename T>
Tensor4<T> c2f_forward(const Tensor4<T>& x, const C2fBlock<T>& blk,
                       C2fTrace* trace = nullptr);

// Faithful mode concatenates (X1, Conv(X), Y2, Y2') for a 5c' width; with
// faithful_eq6 off the standard concat semantics apply with ASC units.
template <typename T>
Tensor4<T> ascm_c2f_forward(const Tensor4<T>& x, const C2fBlock<T>& blk,
                            C2fTrace* trace = nullptr);

// Standard skeleton with each bottleneck replaced by an LKSC unit.
template <typename T>
Tensor4<T> lkscm_c2f_forward(const Tensor4<T>& x, const C2fBlock<T>& blk,
                             C2fTrace* trace = nullptr);

// Dispatches on cfg.variant.
template <typename T>
Tensor4<T> c2f_block_forward(const Tensor4<T>& x, const C2fBlock<T>& blk,
                             C2fTrace* trace = nullptr);

// --- parameter / MAC accounting -------------------------------------------

struct Shape4 {
  int n = 1, c = 0, h = 0, w = 0;
};

struct BlockCost {
  std::string label;
  std::string variant;
  long long params = 0;
  long long macs = 0;
};

struct CostReport {
  std::vector<BlockCost> blocks;
  long long total_params = 0;
  long long total_macs = 0;
};

// How lkscm blocks are costed: as planned (decomposed), or with the dense
// kh x kw depthwise kernel the decomposition replaces.
enum class CostMode { as_configured, baseline_standard, dense_large_kernel };

// Exact parameter counts (weights + biases + BN affine pairs) and analytic
// multiply-accumulate counts at the given input shape. Conventions: a conv
// costs n*c_out*h_out*w_out*(c_in/groups)*kh*kw MACs, a bilinear sample 8
// MACs plus 1 for its modulation multiply, a shift 0; LKSC linear-stage MACs
// exclude the structural zero taps of the padded strips.
CostReport count_params_flops(std::span<const C2fConfig> cfgs, Shape4 input,
                              CostMode mode = CostMode::as_configured);

}  // namespace aslks
