#include "aslks/asc.hpp"

#include <cmath>
#include <string>

namespace aslks {

void AscSpec::validate() const {
  if (c_in < 1 || c_out < 1)
    throw SpecError("AscSpec: channel counts must be >= 1");
  if (kh < 1 || kw < 1) throw SpecError("AscSpec: kernel dims must be >= 1");
  if (groups < 1) throw SpecError("AscSpec: groups must be >= 1");
  if (c_in % groups != 0)
    throw SpecError("AscSpec: groups (" + std::to_string(groups) +
                    ") does not divide c_in (" + std::to_string(c_in) + ")");
  if (c_out % groups != 0)
    throw SpecError("AscSpec: groups (" + std::to_string(groups) +
                    ") does not divide c_out (" + std::to_string(c_out) + ")");
  if (stride < 1) throw SpecError("AscSpec: stride must be >= 1");
  if (pad_h < 0 || pad_w < 0) throw SpecError("AscSpec: negative padding");
}

int asc_generator_pad(int pad, int k) {
  if (k % 2 == 0)
    throw SpecError("asc_generator_pad: base kernel extent must be odd, got " +
                    std::to_string(k));
  const int gen_pad = pad + (3 - k) / 2;
  if (gen_pad < 0)
    throw SpecError("asc_generator_pad: 3x3 generator cannot align with kernel " +
                    std::to_string(k) + " at padding " + std::to_string(pad));
  return gen_pad;
}

template <typename T>
void AscParams<T>::validate() const {
  spec.validate();
  const std::size_t want = std::size_t(spec.c_out) *
                           (spec.c_in / spec.groups) * spec.kh * spec.kw;
  if (base_weights.size() != want)
    throw ShapeError("AscParams: base weight array has " +
                     std::to_string(base_weights.size()) +
                     " entries, expected " + std::to_string(want));
  generator.validate();
  if (generator.spec.c_in != spec.c_in)
    throw ShapeError("AscParams: generator c_in is " +
                     std::to_string(generator.spec.c_in) + ", expected " +
                     std::to_string(spec.c_in));
  const int gk = 3 * spec.groups * spec.points();
  if (generator.spec.c_out != gk)
    throw ShapeError("AscParams: generator c_out is " +
                     std::to_string(generator.spec.c_out) + ", expected 3*G*K = " +
                     std::to_string(gk));
  bn.validate(spec.c_out);
}

template <typename T>
AscParams<T> make_asc_params(const AscSpec& spec, SplitMix64& rng) {
  spec.validate();
  AscParams<T> p;
  p.spec = spec;
  const std::size_t fan_in =
      std::size_t(spec.c_in / spec.groups) * spec.kh * spec.kw;
  const double scale = 1.0 / std::sqrt(double(fan_in));
  p.base_weights.resize(std::size_t(spec.c_out) * fan_in);
  for (auto& v : p.base_weights) v = T(rng.uniform(-scale, scale));

  ConvSpec gen;
  gen.c_in = spec.c_in;
  gen.c_out = 3 * spec.groups * spec.points();
  gen.kh = gen.kw = 3;
  gen.stride = spec.stride;
  gen.pad_h = asc_generator_pad(spec.pad_h, spec.kh);
  gen.pad_w = asc_generator_pad(spec.pad_w, spec.kw);
  gen.groups = spec.groups;
  gen.has_bias = true;
  p.generator = make_conv_params<T>(gen, rng);
  p.bn = BatchNorm<T>::identity(spec.c_out);
  return p;
}

template <typename T>
AscFields<T> asc_generate_fields(const Tensor4<T>& x, const AscParams<T>& p) {
  p.validate();
  if (x.c != p.spec.c_in)
    throw ShapeError("asc_generate_fields: input channel axis is " +
                     std::to_string(x.c) + ", spec.c_in is " +
                     std::to_string(p.spec.c_in));
  const int oh = p.spec.out_h(x.h), ow = p.spec.out_w(x.w);
  Tensor4<T> raw = conv2d_direct(x, p.generator);
  if (raw.h != oh || raw.w != ow)
    throw ShapeError("asc_generate_fields: generator output " +
                     std::to_string(raw.h) + "x" + std::to_string(raw.w) +
                     " does not align with the ASC output " +
                     std::to_string(oh) + "x" + std::to_string(ow));
  const int gk = p.spec.groups * p.spec.points();
  AscFields<T> f;
  f.offsets = slice_channels(raw, 0, 2 * gk);
  f.modulation = slice_channels(raw, 2 * gk, 3 * gk);
  for (auto& v : f.modulation.data) v = logistic(v);
  return f;
}

namespace {

template <typename T>
void check_fields(const Tensor4<T>& x, const AscParams<T>& p,
                  const AscFields<T>& f, const char* op) {
  const int gk = p.spec.groups * p.spec.points();
  const int oh = p.spec.out_h(x.h), ow = p.spec.out_w(x.w);
  if (oh < 1 || ow < 1)
    throw ShapeError(std::string(op) + ": output dims are " +
                     std::to_string(oh) + "x" + std::to_string(ow));
  if (f.offsets.n != x.n || f.offsets.c != 2 * gk || f.offsets.h != oh ||
      f.offsets.w != ow)
    throw ShapeError(std::string(op) + ": offsets field has shape (" +
                     std::to_string(f.offsets.n) + "," +
                     std::to_string(f.offsets.c) + "," +
                     std::to_string(f.offsets.h) + "," +
                     std::to_string(f.offsets.w) + "), expected (" +
                     std::to_string(x.n) + "," + std::to_string(2 * gk) + "," +
                     std::to_string(oh) + "," + std::to_string(ow) + ")");
  if (f.modulation.n != x.n || f.modulation.c != gk || f.modulation.h != oh ||
      f.modulation.w != ow)
    throw ShapeError(std::string(op) + ": modulation field channel axis is " +
                     std::to_string(f.modulation.c) + ", expected " +
                     std::to_string(gk));
}

}  // namespace

template <typename T>
Tensor4<T> asc_forward(const Tensor4<T>& x, const AscParams<T>& p,
                       const AscFields<T>& fields) {
  p.validate();
  if (x.c != p.spec.c_in)
    throw ShapeError("asc_forward: input channel axis is " +
                     std::to_string(x.c) + ", spec.c_in is " +
                     std::to_string(p.spec.c_in));
  check_fields(x, p, fields, "asc_forward");

  const AscSpec& s = p.spec;
  const int oh = s.out_h(x.h), ow = s.out_w(x.w);
  const int cig = s.c_in / s.groups, cog = s.c_out / s.groups;
  const int K = s.points();
  Tensor4<T> out(x.n, s.c_out, oh, ow);

  const std::int64_t planes = std::int64_t(x.n) * s.c_out;
  const std::int64_t plane_cost = std::int64_t(oh) * ow * cig * K * 10;
  const std::int64_t min_chunk =
      std::max<std::int64_t>(1, 100000 / std::max<std::int64_t>(1, plane_cost));

  parallel_for(planes, min_chunk, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t plane = lo; plane < hi; ++plane) {
      const int in = int(plane / s.c_out);
      const int oc = int(plane % s.c_out);
      const int g = oc / cog;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          T acc = 0;
          for (int ci = 0; ci < cig; ++ci) {
            const int xc = g * cig + ci;
            for (int ky = 0; ky < s.kh; ++ky) {
              for (int kx = 0; kx < s.kw; ++kx) {
                const int k = ky * s.kw + kx;
                const int off_c = (g * K + k) * 2;
                const T dy = fields.offsets.at(in, off_c, oy, ox);
                const T dx = fields.offsets.at(in, off_c + 1, oy, ox);
                const T sy = T(oy * s.stride - s.pad_h + ky) + dy;
                const T sx = T(ox * s.stride - s.pad_w + kx) + dx;
                const T v = bilinear_sample(x, in, xc, sy, sx);
                const T m = fields.modulation.at(in, g * K + k, oy, ox);
                acc += p.base_weights[p.weight_index(oc, ci, ky, kx)] * (m * v);
              }
            }
          }
          out.at(in, oc, oy, ox) = acc;
        }
      }
    }
  });
  return out;
}

template <typename T>
AscGrads<T> asc_backward(const Tensor4<T>& x, const AscParams<T>& p,
                         const AscFields<T>& fields,
                         const Tensor4<T>& grad_out) {
  p.validate();
  if (x.c != p.spec.c_in)
    throw ShapeError("asc_backward: input channel axis is " +
                     std::to_string(x.c) + ", spec.c_in is " +
                     std::to_string(p.spec.c_in));
  check_fields(x, p, fields, "asc_backward");
  const AscSpec& s = p.spec;
  const int oh = s.out_h(x.h), ow = s.out_w(x.w);
  if (grad_out.n != x.n || grad_out.c != s.c_out || grad_out.h != oh ||
      grad_out.w != ow)
    throw ShapeError("asc_backward: grad_out shape does not match the forward output");

  const int cig = s.c_in / s.groups, cog = s.c_out / s.groups;
  const int K = s.points();

  AscGrads<T> g;
  g.grad_x = Tensor4<T>(x.n, x.c, x.h, x.w);
  g.grad_base_weights.assign(p.base_weights.size(), T(0));
  g.grad_offsets = Tensor4<T>(fields.offsets.n, fields.offsets.c,
                              fields.offsets.h, fields.offsets.w);
  g.grad_modulation = Tensor4<T>(fields.modulation.n, fields.modulation.c,
                                 fields.modulation.h, fields.modulation.w);

  // Single pass over (n, g, k, p0); each sampled value serves every output
  // channel of the group. The grad_x scatter targets overlap across
  // iterations, so this pass stays single-threaded.
  for (int in = 0; in < x.n; ++in) {
    for (int grp = 0; grp < s.groups; ++grp) {
      for (int ky = 0; ky < s.kh; ++ky) {
        for (int kx = 0; kx < s.kw; ++kx) {
          const int k = ky * s.kw + kx;
          const int off_c = (grp * K + k) * 2;
          for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
              const T dy = fields.offsets.at(in, off_c, oy, ox);
              const T dx = fields.offsets.at(in, off_c + 1, oy, ox);
              const T sy = T(oy * s.stride - s.pad_h + ky) + dy;
              const T sx = T(ox * s.stride - s.pad_w + kx) + dx;
              const T m = fields.modulation.at(in, grp * K + k, oy, ox);

              T grad_m = 0;   // sum over (oc, ci) of go * w * v
              T grad_sy = 0;  // position gradient accumulators
              T grad_sx = 0;
              for (int ci = 0; ci < cig; ++ci) {
                const int xc = grp * cig + ci;
                const BilinearGrad<T> bg =
                    bilinear_sample_with_grad(x, in, xc, sy, sx);
                T wsum = 0;  // sum over oc of go * w
                for (int oc = grp * cog; oc < (grp + 1) * cog; ++oc) {
                  const T go = grad_out.at(in, oc, oy, ox);
                  const T wgt = p.base_weights[p.weight_index(oc, ci, ky, kx)];
                  wsum += go * wgt;
                  g.grad_base_weights[p.weight_index(oc, ci, ky, kx)] +=
                      go * (m * bg.value);
                }
                grad_m += wsum * bg.value;
                grad_sy += wsum * m * bg.d_py;
                grad_sx += wsum * m * bg.d_px;
                bilinear_scatter(g.grad_x, in, xc, sy, sx, wsum * m);
              }
              g.grad_modulation.at(in, grp * K + k, oy, ox) = grad_m;
              g.grad_offsets.at(in, off_c, oy, ox) = grad_sy;
              g.grad_offsets.at(in, off_c + 1, oy, ox) = grad_sx;
            }
          }
        }
      }
    }
  }
  return g;
}

template <typename T>
Tensor4<T> asc_block_forward(const Tensor4<T>& x, const AscParams<T>& p) {
  const AscFields<T> fields = asc_generate_fields(x, p);
  return silu_map(batch_norm(asc_forward(x, p, fields), p.bn));
}

#define ASLKS_INSTANTIATE(T)                                                   \
  template struct AscParams<T>;                                                \
  template AscParams<T> make_asc_params<T>(const AscSpec&, SplitMix64&);       \
  template AscFields<T> asc_generate_fields<T>(const Tensor4<T>&,              \
                                               const AscParams<T>&);           \
  template Tensor4<T> asc_forward<T>(const Tensor4<T>&, const AscParams<T>&,   \
                                     const AscFields<T>&);                     \
  template AscGrads<T> asc_backward<T>(const Tensor4<T>&, const AscParams<T>&, \
                                       const AscFields<T>&,                    \
                                       const Tensor4<T>&);                     \
  template Tensor4<T> asc_block_forward<T>(const Tensor4<T>&,                  \
                                           const AscParams<T>&);

ASLKS_INSTANTIATE(float)
ASLKS_INSTANTIATE(double)
#undef ASLKS_INSTANTIATE

}  // namespace aslks
