#include "aslks/tensor.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace aslks {

namespace {

void check_dims(int n, int c, int h, int w) {
  auto bad = [](const char* axis, int v) {
    throw ShapeError(std::string("Tensor4: axis ") + axis + " must be >= 1, got " +
                     std::to_string(v));
  };
  if (n < 1) bad("n", n);
  if (c < 1) bad("c", c);
  if (h < 1) bad("h", h);
  if (w < 1) bad("w", w);
}

}  // namespace

template <typename T>
Tensor4<T>::Tensor4(int n_, int c_, int h_, int w_)
    : n(n_), c(c_), h(h_), w(w_) {
  check_dims(n_, c_, h_, w_);
  data.assign(std::size_t(n_) * c_ * h_ * w_, T(0));
}

template <typename T>
void fill_uniform(Tensor4<T>& t, SplitMix64& rng, double lo, double hi) {
  for (auto& v : t.data) v = T(rng.uniform(lo, hi));
}

template <typename T>
bool all_finite(const Tensor4<T>& t) {
  for (const auto& v : t.data)
    if (!std::isfinite(double(v))) return false;
  return true;
}

template <typename T>
double max_abs_diff(const Tensor4<T>& a, const Tensor4<T>& b) {
  if (!a.same_shape(b))
    throw ShapeError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(double(a.data[i]) - double(b.data[i])));
  return m;
}

template <typename T>
double max_rel_diff(const Tensor4<T>& a, const Tensor4<T>& b) {
  if (!a.same_shape(b))
    throw ShapeError("max_rel_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    double d = std::abs(double(a.data[i]) - double(b.data[i]));
    double s = std::max(1e-12, std::abs(double(a.data[i])) +
                                   std::abs(double(b.data[i])));
    m = std::max(m, d / s);
  }
  return m;
}

template <typename T>
Tensor4<T> slice_channels(const Tensor4<T>& x, int c0, int c1) {
  if (c0 < 0 || c1 > x.c || c0 >= c1)
    throw ShapeError("slice_channels: range [" + std::to_string(c0) + ", " +
                     std::to_string(c1) + ") invalid for c=" +
                     std::to_string(x.c));
  Tensor4<T> out(x.n, c1 - c0, x.h, x.w);
  const std::size_t plane = std::size_t(x.h) * x.w;
  for (int in = 0; in < x.n; ++in)
    for (int ic = c0; ic < c1; ++ic)
      std::memcpy(&out.data[(std::size_t(in) * out.c + (ic - c0)) * plane],
                  &x.data[(std::size_t(in) * x.c + ic) * plane],
                  plane * sizeof(T));
  return out;
}

template <typename T>
Tensor4<T> concat_channels(std::span<const Tensor4<T>* const> parts) {
  if (parts.empty()) throw ShapeError("concat_channels: empty part list");
  int total_c = 0;
  for (const auto* p : parts) {
    if (p->n != parts[0]->n || p->h != parts[0]->h || p->w != parts[0]->w)
      throw ShapeError("concat_channels: parts disagree on n/h/w");
    total_c += p->c;
  }
  Tensor4<T> out(parts[0]->n, total_c, parts[0]->h, parts[0]->w);
  const std::size_t plane = std::size_t(out.h) * out.w;
  for (int in = 0; in < out.n; ++in) {
    int oc = 0;
    for (const auto* p : parts) {
      std::memcpy(&out.data[(std::size_t(in) * total_c + oc) * plane],
                  &p->data[std::size_t(in) * p->c * plane],
                  std::size_t(p->c) * plane * sizeof(T));
      oc += p->c;
    }
  }
  return out;
}

template <typename T>
Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b) {
  const Tensor4<T>* parts[] = {&a, &b};
  return concat_channels(std::span<const Tensor4<T>* const>(parts, 2));
}

template <typename T>
Tensor4<T> pad_zero(const Tensor4<T>& x, int top, int bottom, int left,
                    int right) {
  if (top < 0 || bottom < 0 || left < 0 || right < 0)
    throw ShapeError("pad_zero: negative padding");
  Tensor4<T> out(x.n, x.c, x.h + top + bottom, x.w + left + right);
  for (int in = 0; in < x.n; ++in)
    for (int ic = 0; ic < x.c; ++ic)
      for (int iy = 0; iy < x.h; ++iy)
        std::memcpy(&out.at(in, ic, iy + top, left), &x.at(in, ic, iy, 0),
                    std::size_t(x.w) * sizeof(T));
  return out;
}

template <typename T>
Tensor4<T> add(const Tensor4<T>& a, const Tensor4<T>& b) {
  if (!a.same_shape(b)) throw ShapeError("add: shape mismatch");
  Tensor4<T> out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

#define ASLKS_INSTANTIATE(T)                                                  \
  template struct Tensor4<T>;                                                 \
  template void fill_uniform<T>(Tensor4<T>&, SplitMix64&, double, double);    \
  template bool all_finite<T>(const Tensor4<T>&);                             \
  template double max_abs_diff<T>(const Tensor4<T>&, const Tensor4<T>&);      \
  template double max_rel_diff<T>(const Tensor4<T>&, const Tensor4<T>&);      \
  template Tensor4<T> slice_channels<T>(const Tensor4<T>&, int, int);         \
  template Tensor4<T> concat_channels<T>(                                     \
      std::span<const Tensor4<T>* const>);                                    \
  template Tensor4<T> concat_channels<T>(const Tensor4<T>&,                   \
                                         const Tensor4<T>&);                  \
  template Tensor4<T> pad_zero<T>(const Tensor4<T>&, int, int, int, int);     \
  template Tensor4<T> add<T>(const Tensor4<T>&, const Tensor4<T>&);

ASLKS_INSTANTIATE(float)
ASLKS_INSTANTIATE(double)
#undef ASLKS_INSTANTIATE

}  // namespace aslks
