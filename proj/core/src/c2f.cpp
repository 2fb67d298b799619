#include "aslks/c2f.hpp"

#include <string>

namespace aslks {

const char* c2f_variant_name(C2fVariant v) {
  switch (v) {
    case C2fVariant::standard:
      return "standard";
    case C2fVariant::ascm:
      return "ascm";
    case C2fVariant::lkscm:
      return "lkscm";
  }
  return "?";
}

C2fVariant c2f_variant_from_name(const std::string& name) {
  if (name == "standard") return C2fVariant::standard;
  if (name == "ascm") return C2fVariant::ascm;
  if (name == "lkscm") return C2fVariant::lkscm;
  throw ParseError("unknown C2f variant '" + name + "'");
}

void C2fConfig::validate() const {
  if (c_in < 1 || c_out < 1)
    throw SpecError("C2fConfig: channel counts must be >= 1");
  if (hidden() < 1) throw SpecError("C2fConfig: hidden width must be >= 1");
  if (n < 1) throw SpecError("C2fConfig: repeat count n must be >= 1");
  if (groups < 1 || hidden() % groups != 0)
    throw SpecError("C2fConfig: groups must divide the hidden width");
  if (variant == C2fVariant::lkscm) {
    if (tile % 2 == 0 || unit_kernel() < tile)
      throw SpecError("C2fConfig: lkscm needs odd tile <= kernel");
  }
}

template <typename T>
Tensor4<T> conv_bn_silu(const Tensor4<T>& x, const ConvBnSilu<T>& m) {
  return silu_map(batch_norm(conv2d_direct(x, m.conv), m.bn));
}

template <typename T>
Tensor4<T> bottleneck_forward(const Tensor4<T>& x, const Bottleneck<T>& b) {
  const Tensor4<T> y = conv_bn_silu(conv_bn_silu(x, b.cv1), b.cv2);
  return b.residual ? add(x, y) : y;
}

namespace {

template <typename T>
ConvBnSilu<T> make_cbs(int c_in, int c_out, int k, SplitMix64& rng) {
  ConvSpec s;
  s.c_in = c_in;
  s.c_out = c_out;
  s.kh = s.kw = k;
  s.pad_h = s.pad_w = (k - 1) / 2;
  ConvBnSilu<T> m;
  m.conv = make_conv_params<T>(s, rng);
  m.bn = BatchNorm<T>::random(c_out, rng);
  return m;
}

int concat_width(const C2fConfig& cfg) {
  const int cp = cfg.hidden();
  if (cfg.variant == C2fVariant::ascm && cfg.faithful_eq6) return 5 * cp;
  return (2 + cfg.n) * cp;
}

}  // namespace

template <typename T>
C2fBlock<T> make_c2f_block(const C2fConfig& cfg, SplitMix64& rng) {
  cfg.validate();
  const int cp = cfg.hidden();
  C2fBlock<T> blk;
  blk.cfg = cfg;
  blk.stem = make_cbs<T>(cfg.c_in, 2 * cp, 1, rng);
  blk.tail = make_cbs<T>(concat_width(cfg), cfg.c_out, 1, rng);
  switch (cfg.variant) {
    case C2fVariant::standard:
      for (int i = 0; i < cfg.n; ++i) {
        Bottleneck<T> b;
        b.cv1 = make_cbs<T>(cp, cp, cfg.unit_kernel(), rng);
        b.cv2 = make_cbs<T>(cp, cp, cfg.unit_kernel(), rng);
        blk.bottlenecks.push_back(std::move(b));
      }
      break;
    case C2fVariant::ascm:
      for (int i = 0; i < cfg.n; ++i) {
        AscSpec s;
        s.c_in = s.c_out = cp;
        s.kh = s.kw = cfg.unit_kernel();
        s.pad_h = s.pad_w = (cfg.unit_kernel() - 1) / 2;
        s.groups = cfg.groups;
        AscParams<T> p = make_asc_params<T>(s, rng);
        p.bn = BatchNorm<T>::random(cp, rng);
        blk.asc_units.push_back(std::move(p));
      }
      break;
    case C2fVariant::lkscm:
      for (int i = 0; i < cfg.n; ++i) {
        LkscSpec s;
        s.channels = cp;
        s.kh = s.kw = cfg.unit_kernel();
        s.tile = cfg.tile;
        blk.lksc_units.push_back(make_lksc_plan<T>(s, rng));
      }
      break;
  }
  return blk;
}

namespace {

template <typename T>
void check_block_input(const Tensor4<T>& x, const C2fBlock<T>& blk,
                       C2fVariant expect, const char* op) {
  if (blk.cfg.variant != expect)
    throw SpecError(std::string(op) + ": block variant is " +
                    c2f_variant_name(blk.cfg.variant));
  if (x.c != blk.cfg.c_in)
    throw ShapeError(std::string(op) + ": input channel axis is " +
                     std::to_string(x.c) + ", cfg.c_in is " +
                     std::to_string(blk.cfg.c_in));
}

// Shared split-transform-concat skeleton for standard and lkscm variants.
template <typename T, typename UnitFn>
Tensor4<T> chain_c2f(const Tensor4<T>& x, const C2fBlock<T>& blk,
                     const UnitFn& unit, C2fTrace* trace) {
  const int cp = blk.cfg.hidden();
  const Tensor4<T> stem = conv_bn_silu(x, blk.stem);
  std::vector<Tensor4<T>> parts;
  parts.push_back(slice_channels(stem, 0, cp));
  parts.push_back(slice_channels(stem, cp, 2 * cp));
  for (int i = 0; i < blk.cfg.n; ++i) parts.push_back(unit(i, parts.back()));
  std::vector<const Tensor4<T>*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  const Tensor4<T> cat =
      concat_channels(std::span<const Tensor4<T>* const>(ptrs));
  if (trace != nullptr) trace->concat_channels = cat.c;
  return conv_bn_silu(cat, blk.tail);
}

}  // namespace

template <typename T>
Tensor4<T> c2f_forward(const Tensor4<T>& x, const C2fBlock<T>& blk,
                       C2fTrace* trace) {
  check_block_input(x, blk, C2fVariant::standard, "c2f_forward");
  return chain_c2f(
      x, blk,
      [&](int i, const Tensor4<T>& in) {
        return bottleneck_forward(in, blk.bottlenecks[i]);
      },
      trace);
}

template <typename T>
Tensor4<T> ascm_c2f_forward(const Tensor4<T>& x, const C2fBlock<T>& blk,
                            C2fTrace* trace) {
  check_block_input(x, blk, C2fVariant::ascm, "ascm_c2f_forward");
  if (!blk.cfg.faithful_eq6) {
    // Standard concat semantics with ASC units (no residual on ASC chains).
    return chain_c2f(
        x, blk,
        [&](int i, const Tensor4<T>& in) {
          return asc_block_forward(in, blk.asc_units[i]);
        },
        trace);
  }
  const int cp = blk.cfg.hidden();
  const Tensor4<T> stem = conv_bn_silu(x, blk.stem);  // Conv(X), width 2c'
  const Tensor4<T> x1 = slice_channels(stem, 0, cp);
  const Tensor4<T> x2 = slice_channels(stem, cp, 2 * cp);
  const Tensor4<T> y2 = asc_block_forward(x2, blk.asc_units[0]);
  Tensor4<T> y2p = y2;  // n = 1 leaves the composition empty
  for (int i = 1; i < blk.cfg.n; ++i)
    y2p = asc_block_forward(y2p, blk.asc_units[i]);
  const Tensor4<T>* parts[] = {&x1, &stem, &y2, &y2p};
  const Tensor4<T> cat =
      concat_channels(std::span<const Tensor4<T>* const>(parts, 4));
  if (trace != nullptr) trace->concat_channels = cat.c;
  return conv_bn_silu(cat, blk.tail);
}

template <typename T>
Tensor4<T> lkscm_c2f_forward(const Tensor4<T>& x, const C2fBlock<T>& blk,
                             C2fTrace* trace) {
  check_block_input(x, blk, C2fVariant::lkscm, "lkscm_c2f_forward");
  return chain_c2f(
      x, blk,
      [&](int i, const Tensor4<T>& in) {
        return add(in, lksc_forward(in, blk.lksc_units[i]));
      },
      trace);
}

template <typename T>
Tensor4<T> c2f_block_forward(const Tensor4<T>& x, const C2fBlock<T>& blk,
                             C2fTrace* trace) {
  switch (blk.cfg.variant) {
    case C2fVariant::standard:
      return c2f_forward(x, blk, trace);
    case C2fVariant::ascm:
      return ascm_c2f_forward(x, blk, trace);
    case C2fVariant::lkscm:
      return lkscm_c2f_forward(x, blk, trace);
  }
  throw SpecError("c2f_block_forward: bad variant");
}

// --- accounting -------------------------------------------------------------

namespace {

struct Cost {
  long long params = 0;
  long long macs = 0;
  void operator+=(const Cost& o) {
    params += o.params;
    macs += o.macs;
  }
};

// n * c_out * h * w * (c_in/groups) * kh * kw, weights + optional bias, plus
// a BN affine pair per output channel when followed by BN.
Cost conv_cost(const Shape4& s, int c_in, int c_out, int kh, int kw,
               int groups, bool bias, bool bn) {
  Cost c;
  c.params = 1LL * c_out * (c_in / groups) * kh * kw + (bias ? c_out : 0) +
             (bn ? 2LL * c_out : 0);
  c.macs = 1LL * s.n * c_out * s.h * s.w * (c_in / groups) * kh * kw;
  return c;
}

Cost asc_unit_cost(const Shape4& s, int cp, int k, int groups) {
  const int K = k * k;
  Cost c = conv_cost(s, cp, cp, k, k, groups, false, true);  // base + block BN
  // Generator: grouped 3x3 conv to 3*G*K channels, with bias.
  c += conv_cost(s, cp, 3 * groups * K, 3, 3, groups, true, false);
  // 8 MACs per bilinear-sampled point plus 1 for the modulation multiply;
  // one sampled point per (input channel, kernel point, output position).
  c.macs += 9LL * s.n * cp * K * s.h * s.w;
  return c;
}

Cost lksc_unit_cost(const Shape4& s, int cp, int k, int a, bool dense) {
  Cost c;
  const long long taps = dense ? 1LL * k * k : 1LL * (k * a + a * k + a * a);
  c.params = cp * taps;                       // depthwise branches
  c.macs = 1LL * s.n * cp * s.h * s.w * taps; // structural zeros excluded
  c += conv_cost(s, cp, cp, 1, 1, 1, true, true);  // pointwise + BN
  return c;
}

Cost block_cost(const C2fConfig& cfg, const Shape4& in, CostMode mode) {
  cfg.validate();
  const int cp = cfg.hidden();
  C2fVariant variant = cfg.variant;
  if (mode == CostMode::baseline_standard) variant = C2fVariant::standard;

  Cost c = conv_cost(in, cfg.c_in, 2 * cp, 1, 1, 1, false, true);  // stem
  for (int i = 0; i < cfg.n; ++i) {
    switch (variant) {
      case C2fVariant::standard: {
        const int k = cfg.variant == C2fVariant::standard ? cfg.unit_kernel() : 3;
        c += conv_cost(in, cp, cp, k, k, 1, false, true);
        c += conv_cost(in, cp, cp, k, k, 1, false, true);
        break;
      }
      case C2fVariant::ascm:
        c += asc_unit_cost(in, cp, cfg.unit_kernel(), cfg.groups);
        break;
      case C2fVariant::lkscm:
        c += lksc_unit_cost(in, cp, cfg.unit_kernel(), cfg.tile,
                            mode == CostMode::dense_large_kernel);
        break;
    }
  }
  const int cat = variant == C2fVariant::ascm && cfg.faithful_eq6
                      ? 5 * cp
                      : (2 + cfg.n) * cp;
  c += conv_cost(in, cat, cfg.c_out, 1, 1, 1, false, true);  // tail
  return c;
}

}  // namespace

CostReport count_params_flops(std::span<const C2fConfig> cfgs, Shape4 input,
                              CostMode mode) {
  if (cfgs.empty()) throw SpecError("count_params_flops: empty block list");
  if (input.n < 1 || input.c < 1 || input.h < 1 || input.w < 1)
    throw ShapeError("count_params_flops: invalid input shape");
  CostReport report;
  Shape4 cur = input;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const C2fConfig& cfg = cfgs[i];
    if (cur.c != cfg.c_in)
      throw ShapeError("count_params_flops: block " + std::to_string(i) +
                       " expects c_in " + std::to_string(cfg.c_in) +
                       " but the chain carries " + std::to_string(cur.c));
    const Cost c = block_cost(cfg, cur, mode);
    BlockCost bc;
    bc.label = "block" + std::to_string(i);
    bc.variant = c2f_variant_name(mode == CostMode::baseline_standard
                                      ? C2fVariant::standard
                                      : cfg.variant);
    if (mode == CostMode::dense_large_kernel && cfg.variant == C2fVariant::lkscm)
      bc.variant = "dense_large_kernel";
    bc.params = c.params;
    bc.macs = c.macs;
    report.total_params += c.params;
    report.total_macs += c.macs;
    report.blocks.push_back(std::move(bc));
    cur.c = cfg.c_out;  // stride 1 everywhere: h, w preserved
  }
  return report;
}

#define ASLKS_INSTANTIATE(T)                                                   \
  template struct ConvBnSilu<T>;                                               \
  template struct Bottleneck<T>;                                               \
  template struct C2fBlock<T>;                                                 \
  template Tensor4<T> conv_bn_silu<T>(const Tensor4<T>&, const ConvBnSilu<T>&);\
  template Tensor4<T> bottleneck_forward<T>(const Tensor4<T>&,                 \
                                            const Bottleneck<T>&);             \
  template C2fBlock<T> make_c2f_block<T>(const C2fConfig&, SplitMix64&);       \
  template Tensor4<T> c2f_forward<T>(const Tensor4<T>&, const C2fBlock<T>&,    \
                                     C2fTrace*);                               \
  template Tensor4<T> ascm_c2f_forward<T>(const Tensor4<T>&,                   \
                                          const C2fBlock<T>&, C2fTrace*);      \
  template Tensor4<T> lkscm_c2f_forward<T>(const Tensor4<T>&,                  \
                                           const C2fBlock<T>&, C2fTrace*);     \
  template Tensor4<T> c2f_block_forward<T>(const Tensor4<T>&,                  \
                                           const C2fBlock<T>&, C2fTrace*);

ASLKS_INSTANTIATE(float)
ASLKS_INSTANTIATE(double)
#undef ASLKS_INSTANTIATE

}  // namespace aslks
