#include "aslks/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aslks::oracle {

template <typename T>
Tensor4<T> naive_conv2d(const Tensor4<T>& x, const ConvParams<T>& p) {
  const ConvSpec& s = p.spec;
  const int oh = (x.h + 2 * s.pad_h - s.kh) / s.stride + 1;
  const int ow = (x.w + 2 * s.pad_w - s.kw) / s.stride + 1;
  const int cig = s.c_in / s.groups;
  const int cog = s.c_out / s.groups;
  Tensor4<T> out(x.n, s.c_out, oh, ow);
  for (int in = 0; in < x.n; ++in)
    for (int oc = 0; oc < s.c_out; ++oc)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          T acc = 0;
          for (int ci = 0; ci < cig; ++ci)
            for (int ky = 0; ky < s.kh; ++ky)
              for (int kx = 0; kx < s.kw; ++kx) {
                const int iy = oy * s.stride - s.pad_h + ky;
                const int ix = ox * s.stride - s.pad_w + kx;
                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                const int xc = (oc / cog) * cig + ci;
                const std::size_t widx =
                    ((std::size_t(oc) * cig + ci) * s.kh + ky) * s.kw + kx;
                acc += x.data[((std::size_t(in) * x.c + xc) * x.h + iy) * x.w +
                              ix] *
                       p.weights[widx];
              }
          if (s.has_bias) acc += p.bias[oc];
          out.data[((std::size_t(in) * s.c_out + oc) * oh + oy) * ow + ox] =
              acc;
        }
  return out;
}

namespace {

// Inline 4-corner interpolation, kept separate from the library sampler.
template <typename T>
T sample4(const Tensor4<T>& x, int in, int ch, double py, double px) {
  const int y0 = int(std::floor(py));
  const int x0 = int(std::floor(px));
  const double fy = py - y0, fx = px - x0;
  double acc = 0.0;
  const int ys[2] = {y0, y0 + 1};
  const int xs[2] = {x0, x0 + 1};
  const double wy[2] = {1.0 - fy, fy};
  const double wx[2] = {1.0 - fx, fx};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (ys[i] < 0 || ys[i] >= x.h || xs[j] < 0 || xs[j] >= x.w) continue;
      acc += wy[i] * wx[j] *
             double(x.data[((std::size_t(in) * x.c + ch) * x.h + ys[i]) * x.w +
                           xs[j]]);
    }
  return T(acc);
}

}  // namespace

template <typename T>
Tensor4<T> naive_asc_forward(const Tensor4<T>& x, const AscParams<T>& p,
                             const AscFields<T>& fields) {
  const AscSpec& s = p.spec;
  const int oh = (x.h + 2 * s.pad_h - s.kh) / s.stride + 1;
  const int ow = (x.w + 2 * s.pad_w - s.kw) / s.stride + 1;
  const int cig = s.c_in / s.groups;
  const int cog = s.c_out / s.groups;
  const int K = s.kh * s.kw;
  Tensor4<T> out(x.n, s.c_out, oh, ow);
  for (int in = 0; in < x.n; ++in)
    for (int g = 0; g < s.groups; ++g)
      for (int oc = g * cog; oc < (g + 1) * cog; ++oc)
        for (int oy = 0; oy < oh; ++oy)
          for (int ox = 0; ox < ow; ++ox) {
            double acc = 0.0;
            for (int k = 0; k < K; ++k) {
              const int ky = k / s.kw, kx = k % s.kw;
              const double dm =
                  double(fields.offsets.at(in, (g * K + k) * 2, oy, ox));
              const double dn =
                  double(fields.offsets.at(in, (g * K + k) * 2 + 1, oy, ox));
              const double py = oy * s.stride - s.pad_h + ky + dm;
              const double px = ox * s.stride - s.pad_w + kx + dn;
              const double m =
                  double(fields.modulation.at(in, g * K + k, oy, ox));
              for (int ci = 0; ci < cig; ++ci) {
                const double v =
                    double(sample4(x, in, g * cig + ci, py, px));
                const double w = double(
                    p.base_weights[((std::size_t(oc) * cig + ci) * s.kh + ky) *
                                       s.kw +
                                   kx]);
                acc += w * m * v;
              }
            }
            out.at(in, oc, oy, ox) = T(acc);
          }
  return out;
}

double exhaustive_average_precision(std::span<const Detection> dets,
                                    std::span<const GroundTruth> gts,
                                    int class_id) {
  std::vector<Detection> cd;
  std::vector<GroundTruth> cg;
  for (const auto& d : dets)
    if (d.class_id == class_id) cd.push_back(d);
  for (const auto& g : gts)
    if (g.class_id == class_id) cg.push_back(g);
  if (cg.empty()) return 0.0;

  std::vector<std::size_t> order(cd.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cd[a].confidence > cd[b].confidence;
  });

  // Recompute matching from scratch for every confidence prefix.
  std::vector<double> precision, recall;
  for (std::size_t cut = 1; cut <= order.size(); ++cut) {
    std::vector<bool> used(cg.size(), false);
    int tp = 0;
    for (std::size_t rank = 0; rank < cut; ++rank) {
      const Detection& d = cd[order[rank]];
      int best = -1;
      double best_iou = 0.0;
      for (std::size_t gi = 0; gi < cg.size(); ++gi) {
        if (used[gi] || cg[gi].image_id != d.image_id) continue;
        const double v = iou(d.box, cg[gi].box);
        if (v > best_iou) {
          best_iou = v;
          best = int(gi);
        }
      }
      if (best >= 0 && best_iou >= 0.5) {
        used[best] = true;
        ++tp;
      }
    }
    precision.push_back(double(tp) / double(cut));
    recall.push_back(double(tp) / double(cg.size()));
  }

  // Envelope by quadratic scan over all points, integrated over the recall
  // steps downward from each point.
  double ap = 0.0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    const double r_hi = recall[i];
    const double r_lo = i == 0 ? 0.0 : recall[i - 1];
    if (r_hi <= r_lo) continue;
    double env = 0.0;
    for (std::size_t j = 0; j < recall.size(); ++j)
      if (recall[j] >= r_hi) env = std::max(env, precision[j]);
    ap += (r_hi - r_lo) * env;
  }
  return ap;
}

#define ASLKS_INSTANTIATE(T)                                           \
  template Tensor4<T> naive_conv2d<T>(const Tensor4<T>&,              \
                                      const ConvParams<T>&);           \
  template Tensor4<T> naive_asc_forward<T>(                            \
      const Tensor4<T>&, const AscParams<T>&, const AscFields<T>&);

ASLKS_INSTANTIATE(float)
ASLKS_INSTANTIATE(double)
#undef ASLKS_INSTANTIATE

}  // namespace aslks::oracle
