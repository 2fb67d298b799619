#include "aslks/nn.hpp"

#include <string>

namespace aslks {

template <typename T>
void BatchNorm<T>::validate(int c) const {
  auto need = [&](const std::vector<T>& v, const char* name) {
    if (v.size() != std::size_t(c))
      throw ShapeError(std::string("BatchNorm: ") + name + " has " +
                       std::to_string(v.size()) + " entries, expected " +
                       std::to_string(c));
  };
  need(scale, "scale");
  need(shift, "shift");
  need(mean, "mean");
  need(var, "var");
  for (const auto& v : var)
    if (!(v > T(0))) throw SpecError("BatchNorm: variance entries must be > 0");
}

template <typename T>
Tensor4<T> batch_norm(const Tensor4<T>& x, const BatchNorm<T>& bn) {
  bn.validate(x.c);
  Tensor4<T> out(x.n, x.c, x.h, x.w);
  const std::size_t plane = std::size_t(x.h) * x.w;
  for (int in = 0; in < x.n; ++in)
    for (int ic = 0; ic < x.c; ++ic) {
      const T denom = std::sqrt(bn.var[ic] + T(kBnEps));
      const T* src = &x.data[(std::size_t(in) * x.c + ic) * plane];
      T* dst = &out.data[(std::size_t(in) * x.c + ic) * plane];
      for (std::size_t i = 0; i < plane; ++i)
        dst[i] = bn.scale[ic] * (src[i] - bn.mean[ic]) / denom + bn.shift[ic];
    }
  return out;
}

template <typename T>
Tensor4<T> silu_map(const Tensor4<T>& x) {
  Tensor4<T> out(x.n, x.c, x.h, x.w);
  for (std::size_t i = 0; i < x.data.size(); ++i) out.data[i] = silu(x.data[i]);
  return out;
}

#define ASLKS_INSTANTIATE(T)                                      \
  template struct BatchNorm<T>;                                   \
  template Tensor4<T> batch_norm<T>(const Tensor4<T>&,            \
                                    const BatchNorm<T>&);         \
  template Tensor4<T> silu_map<T>(const Tensor4<T>&);

ASLKS_INSTANTIATE(float)
ASLKS_INSTANTIATE(double)
#undef ASLKS_INSTANTIATE

}  // namespace aslks
