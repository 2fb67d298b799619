#include "aslks/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aslks/c2f.hpp"
#include "aslks/gradcheck.hpp"
#include "aslks/io.hpp"
#include "aslks/metrics.hpp"
#include "aslks/oracle.hpp"

namespace aslks {

bool failure_injected_for(const std::string& case_name) {
  const char* env = std::getenv("ASLKS_INJECT_FAILURE");
  if (env == nullptr) return false;
  return std::string(env) == "1" || std::string(env) == case_name;
}

namespace {

constexpr double kCaseAborted = 1e30;

struct Recorder {
  std::vector<VerifyCase>* cases;
  std::string prefix;
  std::uint64_t seed;

  void add(const std::string& name, double max_err, double tol) {
    VerifyCase c;
    c.name = prefix + "/" + name;
    c.max_err = max_err;
    c.tolerance = tol;
    c.passed = max_err <= tol;
    c.seed = seed;
    cases->push_back(std::move(c));
  }

  void add_bool(const std::string& name, bool ok) {
    add(name, ok ? 0.0 : 1.0, 0.0);
  }

  // Runs a case body, turning stray exceptions into a failed case.
  template <typename Fn>
  void run(const std::string& name, const Fn& fn) {
    try {
      fn();
    } catch (const std::exception&) {
      add(name, kCaseAborted, 0.0);
    }
  }
};

// Documented test hook: perturbs a fixture when ASLKS_INJECT_FAILURE names
// the case (or is "1").
template <typename T>
void maybe_corrupt(Tensor4<T>& t, const std::string& full_name) {
  if (failure_injected_for(full_name)) t.data[0] += T(0.01);
}

template <typename T>
Tensor4<T> random_tensor(int n, int c, int h, int w, SplitMix64& rng,
                         double lo = -1.0, double hi = 1.0) {
  Tensor4<T> t(n, c, h, w);
  fill_uniform(t, rng, lo, hi);
  return t;
}

// Offset fixtures stay at least 0.05 from every bilinear lattice kink.
template <typename T>
void fill_off_lattice(Tensor4<T>& t, SplitMix64& rng) {
  for (auto& v : t.data) {
    const double mag = rng.uniform(0.05, 0.45);
    v = T(rng.next_unit() < 0.5 ? -mag : mag);
  }
}

template <typename T>
AscFields<T> degenerate_fields(int n, int gk, int oh, int ow) {
  AscFields<T> f;
  f.offsets = Tensor4<T>(n, 2 * gk, oh, ow);
  f.modulation = Tensor4<T>(n, gk, oh, ow);
  for (auto& v : f.modulation.data) v = T(1);
  return f;
}

double dtype_tol(DType d, double f64_tol, double f32_tol) {
  return d == DType::f64 ? f64_tol : f32_tol;
}

// --------------------------------------------------------------------------
// tensor suite
// --------------------------------------------------------------------------

template <typename T>
void tensor_suite(Recorder& rec, std::uint64_t seed) {
  const DType dt = Tensor4<T>::dtype();
  SplitMix64 rng(seed);

  rec.run("conv_allones", [&] {
    Tensor4<T> x(1, 1, 3, 3);
    for (auto& v : x.data) v = T(1);
    ConvSpec s{.c_in = 1, .c_out = 1, .kh = 3, .kw = 3};
    ConvParams<T> p{.spec = s, .weights = std::vector<T>(9, T(1))};
    const Tensor4<T> y = conv2d_direct(x, p);
    rec.add("conv_allones", std::abs(double(y.data[0]) - 9.0), 0.0);
  });

  rec.run("conv_identity_kernel", [&] {
    Tensor4<T> x = random_tensor<T>(1, 2, 5, 5, rng);
    ConvSpec s{.c_in = 2, .c_out = 2, .kh = 3, .kw = 3, .pad_h = 1,
               .pad_w = 1, .groups = 2};
    ConvParams<T> p{.spec = s, .weights = std::vector<T>(18, T(0))};
    p.weights[4] = T(1);   // channel 0 center tap
    p.weights[13] = T(1);  // channel 1 center tap
    rec.add("conv_identity_kernel", max_abs_diff(conv2d_direct(x, p), x), 0.0);
  });

  rec.run("conv_vs_bruteforce", [&] {
    struct Case {
      int n, c_in, h, w, c_out, k, pad, stride, groups;
      bool bias;
    };
    const Case cases[] = {{1, 2, 5, 5, 3, 3, 1, 1, 1, false},
                          {2, 4, 6, 6, 4, 3, 1, 1, 2, true},
                          {1, 4, 7, 5, 8, 1, 0, 1, 4, false},
                          {1, 3, 8, 8, 6, 5, 2, 2, 3, true}};
    double err = 0.0;
    for (const Case& c : cases) {
      SplitMix64 sub = rng.fork();
      ConvSpec s{.c_in = c.c_in, .c_out = c.c_out, .kh = c.k, .kw = c.k,
                 .stride = c.stride, .pad_h = c.pad, .pad_w = c.pad,
                 .groups = c.groups, .has_bias = c.bias};
      const ConvParams<T> p = make_conv_params<T>(s, sub);
      Tensor4<T> x = random_tensor<T>(c.n, c.c_in, c.h, c.w, sub);
      Tensor4<T> got = conv2d_direct(x, p);
      maybe_corrupt(got, rec.prefix + "/conv_vs_bruteforce");
      err = std::max(err, max_abs_diff(got, oracle::naive_conv2d(x, p)));
    }
    rec.add("conv_vs_bruteforce", err, 0.0);
  });

  rec.run("conv_group_slicing", [&] {
    SplitMix64 sub = rng.fork();
    ConvSpec s{.c_in = 4, .c_out = 6, .kh = 3, .kw = 3, .pad_h = 1,
               .pad_w = 1, .groups = 2};
    const ConvParams<T> p = make_conv_params<T>(s, sub);
    const Tensor4<T> x = random_tensor<T>(1, 4, 6, 6, sub);
    const Tensor4<T> full = conv2d_direct(x, p);
    const int cig = 2, cog = 3;
    double err = 0.0;
    for (int g = 0; g < 2; ++g) {
      ConvSpec gs{.c_in = cig, .c_out = cog, .kh = 3, .kw = 3, .pad_h = 1,
                  .pad_w = 1};
      ConvParams<T> gp{.spec = gs};
      gp.weights.assign(p.weights.begin() + g * cog * cig * 9,
                        p.weights.begin() + (g + 1) * cog * cig * 9);
      const Tensor4<T> part =
          conv2d_direct(slice_channels(x, g * cig, (g + 1) * cig), gp);
      err = std::max(
          err, max_abs_diff(part, slice_channels(full, g * cog, (g + 1) * cog)));
    }
    rec.add("conv_group_slicing", err, 0.0);
  });

  rec.run("shift_identity", [&] {
    const Tensor4<T> x = random_tensor<T>(1, 2, 4, 5, rng);
    rec.add("shift_identity", max_abs_diff(shift2d(x, 0, 0), x), 0.0);
  });

  rec.run("shift_hand_case", [&] {
    Tensor4<T> x(1, 1, 2, 2);
    x.data = {T(1), T(2), T(3), T(4)};
    Tensor4<T> want(1, 1, 2, 2);
    want.data = {T(0), T(0), T(1), T(2)};
    rec.add("shift_hand_case", max_abs_diff(shift2d(x, 1, 0), want), 0.0);
  });

  rec.run("shift_roundtrip_interior", [&] {
    const Tensor4<T> x = random_tensor<T>(1, 2, 7, 6, rng);
    double err = 0.0;
    const int shifts[][2] = {{1, 2}, {-2, 1}, {3, -3}, {0, -4}};
    for (const auto& s : shifts) {
      const Tensor4<T> rt = shift2d(shift2d(x, s[0], s[1]), -s[0], -s[1]);
      for (int iy = std::max(0, -s[0]); iy < x.h - std::max(0, s[0]); ++iy)
        for (int ix = std::max(0, -s[1]); ix < x.w - std::max(0, s[1]); ++ix)
          for (int ic = 0; ic < x.c; ++ic)
            err = std::max(err, std::abs(double(rt.at(0, ic, iy, ix)) -
                                         double(x.at(0, ic, iy, ix))));
    }
    rec.add("shift_roundtrip_interior", err, 0.0);
  });

  rec.run("shift_permutation_with_zero_fill", [&] {
    const Tensor4<T> x = random_tensor<T>(2, 2, 5, 5, rng);
    const int dy = 2, dx = -1;
    const Tensor4<T> y = shift2d(x, dy, dx);
    double err = 0.0;
    for (int in = 0; in < x.n; ++in)
      for (int ic = 0; ic < x.c; ++ic)
        for (int iy = 0; iy < x.h; ++iy)
          for (int ix = 0; ix < x.w; ++ix) {
            const int sy = iy - dy, sx = ix - dx;
            const double want =
                (sy >= 0 && sy < x.h && sx >= 0 && sx < x.w)
                    ? double(x.at(in, ic, sy, sx))
                    : 0.0;
            err = std::max(err, std::abs(double(y.at(in, ic, iy, ix)) - want));
          }
    rec.add("shift_permutation_with_zero_fill", err, 0.0);
  });

  rec.run("bilinear_lattice_exact", [&] {
    const Tensor4<T> x = random_tensor<T>(1, 2, 5, 6, rng);
    double err = 0.0;
    for (int iy = 0; iy < x.h; ++iy)
      for (int ix = 0; ix < x.w; ++ix)
        err = std::max(err,
                       std::abs(double(bilinear_sample(x, 0, 1, T(iy), T(ix))) -
                                double(x.at(0, 1, iy, ix))));
    rec.add("bilinear_lattice_exact", err, 0.0);
  });

  rec.run("bilinear_midpoint", [&] {
    Tensor4<T> x(1, 1, 2, 2);
    x.data = {T(0), T(2), T(4), T(6)};
    rec.add("bilinear_midpoint",
            std::abs(double(bilinear_sample(x, 0, 0, T(0.5), T(0.5))) - 3.0),
            0.0);
  });

  rec.run("bilinear_oob_half", [&] {
    Tensor4<T> x(1, 1, 3, 3);
    for (int iy = 0; iy < 3; ++iy)
      for (int ix = 0; ix < 3; ++ix) x.at(0, 0, iy, ix) = T(iy + 2 * ix);
    // py = -0.5: the two upper corners are outside and contribute zero.
    const double got = double(bilinear_sample(x, 0, 0, T(-0.5), T(1)));
    rec.add("bilinear_oob_half", std::abs(got - 0.5 * double(x.at(0, 0, 0, 1))),
            0.0);
  });

  rec.run("bilinear_axis_linearity", [&] {
    const Tensor4<T> x = random_tensor<T>(1, 1, 4, 4, rng);
    double err = 0.0;
    for (int rep = 0; rep < 8; ++rep) {
      const T y0 = T(rng.uniform_int(0, 2));
      const T x0 = T(rng.uniform_int(0, 2));
      const double a = double(bilinear_sample(x, 0, 0, y0 + T(0.25), x0));
      const double b = double(bilinear_sample(x, 0, 0, y0 + T(0.75), x0));
      const double mid = double(bilinear_sample(x, 0, 0, y0 + T(0.5), x0));
      err = std::max(err, std::abs(mid - 0.5 * (a + b)));
      const double c = double(bilinear_sample(x, 0, 0, y0, x0 + T(0.25)));
      const double d = double(bilinear_sample(x, 0, 0, y0, x0 + T(0.75)));
      const double midx = double(bilinear_sample(x, 0, 0, y0, x0 + T(0.5)));
      err = std::max(err, std::abs(midx - 0.5 * (c + d)));
    }
    rec.add("bilinear_axis_linearity", err, dtype_tol(dt, 1e-12, 1e-5));
  });

  rec.run("finite_diff_linear", [&] {
    const std::vector<double> a = {1.5, -2.25, 3.0};
    const std::vector<double> theta = {0.1, 0.2, 0.3};
    const auto fd = finite_diff_grad(
        [&](std::span<const double> t) {
          double s = 0;
          for (std::size_t i = 0; i < t.size(); ++i) s += a[i] * t[i];
          return s;
        },
        theta, 1e-6);
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      err = std::max(err, std::abs(fd[i] - a[i]));
    rec.add("finite_diff_linear", err, 1e-8);
  });

  rec.run("finite_diff_quadratic", [&] {
    const std::vector<double> theta = {3.0};
    const auto fd = finite_diff_grad(
        [](std::span<const double> t) { return t[0] * t[0]; }, theta, 1e-6);
    rec.add("finite_diff_quadratic", std::abs(fd[0] - 6.0), 1e-6);
  });

  rec.run("grad_check_identity", [&] {
    const std::vector<double> theta = {0.4, -1.2, 2.0};
    const ScalarFn f = [](std::span<const double> t) {
      return t[0] * t[0] + 2.0 * t[1] + t[2] * t[1];
    };
    const GradCheckReport r = grad_check(
        "identity", f,
        [&](std::span<const double> t) { return finite_diff_grad(f, t, 1e-6); },
        theta, 1e-4);
    rec.add("grad_check_identity", r.max_rel_err, 0.0);
  });

  rec.run("grad_check_mismatch", [&] {
    // Analytic = finite-difference + 1 on a coordinate of magnitude 1; the
    // report formula gives |1| / (|1| + |2|) = 1/3 and the check fails.
    const std::vector<double> theta = {1.0};
    const ScalarFn f = [](std::span<const double> t) { return t[0]; };
    const GradCheckReport r = grad_check(
        "mismatch", f,
        [](std::span<const double>) { return std::vector<double>{2.0}; },
        theta, 1e-4);
    const double err = std::abs(r.max_rel_err - 1.0 / 3.0) +
                       (r.passed ? 1.0 : 0.0);
    rec.add("grad_check_mismatch", err, 1e-9);
  });

  rec.run("conv_grad_check", [&] {
    // Always f64: weight, input and bias gradients over 5 seeds.
    double worst = 0.0;
    for (int s = 0; s < 5; ++s) {
      SplitMix64 sub(seed * 31 + s + 1);
      ConvSpec cs{.c_in = 2, .c_out = 3, .kh = 3, .kw = 3, .pad_h = 1,
                  .pad_w = 1, .has_bias = true};
      const ConvParams<double> p = make_conv_params<double>(cs, sub);
      const Tensor4<double> x = random_tensor<double>(1, 2, 4, 4, sub);

      auto forward_sum = [&](const ConvParams<double>& pp,
                             const Tensor4<double>& xx) {
        const Tensor4<double> y = conv2d_direct(xx, pp);
        double acc = 0;
        for (double v : y.data) acc += v;
        return acc;
      };
      const Tensor4<double> ones = [&] {
        Tensor4<double> o = conv2d_direct(x, p);
        for (auto& v : o.data) v = 1.0;
        return o;
      }();
      const ConvGrads<double> an = conv2d_backward(x, p, ones);

      const GradCheckReport rw = grad_check(
          "conv_w",
          [&](std::span<const double> t) {
            ConvParams<double> pp = p;
            pp.weights.assign(t.begin(), t.end());
            return forward_sum(pp, x);
          },
          [&](std::span<const double>) { return an.grad_w; }, p.weights, 1e-4);
      const GradCheckReport rx = grad_check(
          "conv_x",
          [&](std::span<const double> t) {
            Tensor4<double> xx = x;
            xx.data.assign(t.begin(), t.end());
            return forward_sum(p, xx);
          },
          [&](std::span<const double>) { return an.grad_x.data; }, x.data,
          1e-4);
      const GradCheckReport rb = grad_check(
          "conv_b",
          [&](std::span<const double> t) {
            ConvParams<double> pp = p;
            pp.bias.assign(t.begin(), t.end());
            return forward_sum(pp, x);
          },
          [&](std::span<const double>) { return an.grad_b; }, p.bias, 1e-4);
      worst = std::max({worst, rw.max_rel_err, rx.max_rel_err, rb.max_rel_err});
    }
    rec.add("conv_grad_check", worst, 1e-4);
  });

  rec.run("bilinear_position_grad_check", [&] {
    double worst = 0.0;
    for (int s = 0; s < 5; ++s) {
      SplitMix64 sub(seed * 53 + s + 1);
      const Tensor4<double> x = random_tensor<double>(1, 1, 5, 5, sub);
      Tensor4<double> off(1, 2, 1, 1);
      fill_off_lattice(off, sub);
      const std::vector<double> theta = {2.0 + off.data[0], 2.0 + off.data[1]};
      const GradCheckReport r = grad_check(
          "bilinear_pos",
          [&](std::span<const double> t) {
            return bilinear_sample(x, 0, 0, t[0], t[1]);
          },
          [&](std::span<const double> t) {
            const auto g = bilinear_sample_with_grad(x, 0, 0, t[0], t[1]);
            return std::vector<double>{g.d_py, g.d_px};
          },
          theta, 1e-4);
      worst = std::max(worst, r.max_rel_err);
    }
    rec.add("bilinear_position_grad_check", worst, 1e-4);
  });

  rec.run("determinism_across_threads", [&] {
    SplitMix64 sub = rng.fork();
    ConvSpec s{.c_in = 8, .c_out = 8, .kh = 3, .kw = 3, .pad_h = 1, .pad_w = 1};
    const ConvParams<T> p = make_conv_params<T>(s, sub);
    const Tensor4<T> x = random_tensor<T>(2, 8, 16, 16, sub);
    const int saved = max_threads();
    set_max_threads(1);
    const Tensor4<T> a = conv2d_direct(x, p);
    set_max_threads(4);
    const Tensor4<T> b = conv2d_direct(x, p);
    set_max_threads(saved);
    rec.add("determinism_across_threads", max_abs_diff(a, b), 0.0);
  });

  rec.run("tensor_serialize_roundtrip", [&] {
    const Tensor4<T> x = random_tensor<T>(2, 3, 4, 5, rng);
    std::stringstream buf;
    save_tensor(buf, x);
    const std::string bytes = buf.str();
    const bool header_ok = bytes.size() > 19 && bytes[0] == 'T' &&
                           bytes[1] == '4' &&
                           bytes[2] == (Tensor4<T>::dtype() == DType::f32 ? 0 : 1);
    const Tensor4<T> back = load_tensor_as<T>(buf);
    rec.add("tensor_serialize_roundtrip",
            max_abs_diff(x, back) + (header_ok ? 0.0 : 1.0), 0.0);
  });

  rec.run("outputs_finite", [&] {
    SplitMix64 sub = rng.fork();
    ConvSpec s{.c_in = 3, .c_out = 5, .kh = 3, .kw = 3, .pad_h = 1, .pad_w = 1};
    const ConvParams<T> p = make_conv_params<T>(s, sub);
    const Tensor4<T> x = random_tensor<T>(1, 3, 6, 6, sub);
    const bool ok = all_finite(conv2d_direct(x, p)) &&
                    all_finite(shift2d(x, 2, -1));
    rec.add_bool("outputs_finite", ok);
  });
}

// --------------------------------------------------------------------------
// asc suite
// --------------------------------------------------------------------------

template <typename T>
AscParams<T> asc_fixture(int c, int k, int groups, SplitMix64& rng) {
  AscSpec s;
  s.c_in = s.c_out = c;
  s.kh = s.kw = k;
  s.pad_h = s.pad_w = (k - 1) / 2;
  s.groups = groups;
  return make_asc_params<T>(s, rng);
}

template <typename T>
void asc_suite(Recorder& rec, std::uint64_t seed) {
  const DType dt = Tensor4<T>::dtype();
  SplitMix64 rng(seed ^ 0xa5c0ffee);

  rec.run("degenerate_equality", [&] {
    double err = 0.0;
    for (int groups : {1, 2, 4}) {
      for (int k : {1, 3}) {
        for (int s = 0; s < 2; ++s) {
          SplitMix64 sub = rng.fork();
          const AscParams<T> p = asc_fixture<T>(8, k, groups, sub);
          const Tensor4<T> x = random_tensor<T>(1, 8, 6, 6, sub);
          const AscFields<T> f = degenerate_fields<T>(
              1, groups * p.spec.points(), p.spec.out_h(6), p.spec.out_w(6));
          Tensor4<T> got = asc_forward(x, p, f);
          maybe_corrupt(got, rec.prefix + "/degenerate_equality");
          ConvParams<T> cp;
          cp.spec = ConvSpec{.c_in = 8, .c_out = 8, .kh = k, .kw = k,
                             .pad_h = (k - 1) / 2, .pad_w = (k - 1) / 2,
                             .groups = groups};
          cp.weights = p.base_weights;
          err = std::max(err, max_rel_diff(got, conv2d_direct(x, cp)));
        }
      }
    }
    rec.add("degenerate_equality", err, dtype_tol(dt, 0.0, 1e-6));
  });

  rec.run("bruteforce_eq2", [&] {
    double err = 0.0;
    for (int groups : {1, 2}) {
      for (int hw : {2, 3, 5, 8}) {
        SplitMix64 sub = rng.fork();
        const AscParams<T> p = asc_fixture<T>(4, 3, groups, sub);
        const Tensor4<T> x = random_tensor<T>(1, 4, hw, hw, sub);
        const int gk = groups * 9;
        AscFields<T> f;
        f.offsets = random_tensor<T>(1, 2 * gk, hw, hw, sub, -2.0, 2.0);
        f.modulation = random_tensor<T>(1, gk, hw, hw, sub, 0.0, 1.0);
        err = std::max(err, max_abs_diff(asc_forward(x, p, f),
                                         oracle::naive_asc_forward(x, p, f)));
      }
    }
    rec.add("bruteforce_eq2", err, dtype_tol(dt, 1e-12, 1e-4));
  });

  rec.run("generate_fields_zero", [&] {
    SplitMix64 sub = rng.fork();
    AscParams<T> p = asc_fixture<T>(4, 3, 2, sub);
    std::fill(p.generator.weights.begin(), p.generator.weights.end(), T(0));
    std::fill(p.generator.bias.begin(), p.generator.bias.end(), T(0));
    const Tensor4<T> x = random_tensor<T>(1, 4, 5, 5, sub);
    const AscFields<T> f = asc_generate_fields(x, p);
    double err = 0.0;
    for (const auto& v : f.offsets.data) err = std::max(err, std::abs(double(v)));
    for (const auto& v : f.modulation.data)
      err = std::max(err, std::abs(double(v) - 0.5));
    rec.add("generate_fields_zero", err, 0.0);
  });

  rec.run("generate_fields_saturation", [&] {
    SplitMix64 sub = rng.fork();
    AscParams<T> p = asc_fixture<T>(4, 3, 1, sub);
    std::fill(p.generator.weights.begin(), p.generator.weights.end(), T(0));
    std::fill(p.generator.bias.begin(), p.generator.bias.end(), T(0));
    p.generator.bias[2 * 9 + 4] = T(20);  // one modulation channel
    const Tensor4<T> x = random_tensor<T>(1, 4, 5, 5, sub);
    const AscFields<T> f = asc_generate_fields(x, p);
    double err = 0.0;
    for (int oy = 0; oy < f.modulation.h; ++oy)
      for (int ox = 0; ox < f.modulation.w; ++ox)
        err = std::max(err,
                       std::abs(double(f.modulation.at(0, 4, oy, ox)) - 1.0));
    rec.add("generate_fields_saturation", err, 1e-8);
  });

  rec.run("generate_fields_oracle", [&] {
    SplitMix64 sub = rng.fork();
    const AscParams<T> p = asc_fixture<T>(4, 3, 2, sub);
    const Tensor4<T> x = random_tensor<T>(1, 4, 6, 6, sub);
    const AscFields<T> f = asc_generate_fields(x, p);
    const Tensor4<T> raw = conv2d_direct(x, p.generator);
    const int gk = 2 * 9;
    Tensor4<T> want_mod = slice_channels(raw, 2 * gk, 3 * gk);
    for (auto& v : want_mod.data) v = logistic(v);
    const double err =
        std::max(max_abs_diff(f.offsets, slice_channels(raw, 0, 2 * gk)),
                 max_abs_diff(f.modulation, want_mod));
    rec.add("generate_fields_oracle", err, 0.0);
  });

  rec.run("ramp_closed_form", [&] {
    // G=1, K=1: constant offset (0.5, 0.25) on the ramp i + 2j adds exactly 1.
    AscSpec s;
    s.c_in = s.c_out = 1;
    s.kh = s.kw = 1;
    SplitMix64 sub = rng.fork();
    AscParams<T> p = make_asc_params<T>(s, sub);
    p.base_weights = {T(1)};
    Tensor4<T> x(1, 1, 6, 6);
    for (int iy = 0; iy < 6; ++iy)
      for (int ix = 0; ix < 6; ++ix) x.at(0, 0, iy, ix) = T(iy + 2 * ix);
    AscFields<T> f;
    f.offsets = Tensor4<T>(1, 2, 6, 6);
    f.modulation = Tensor4<T>(1, 1, 6, 6);
    for (int oy = 0; oy < 6; ++oy)
      for (int ox = 0; ox < 6; ++ox) {
        f.offsets.at(0, 0, oy, ox) = T(0.5);
        f.offsets.at(0, 1, oy, ox) = T(0.25);
        f.modulation.at(0, 0, oy, ox) = T(1);
      }
    const Tensor4<T> y = asc_forward(x, p, f);
    double err = 0.0;
    for (int oy = 0; oy + 1 < 6; ++oy)
      for (int ox = 0; ox + 1 < 6; ++ox)
        err = std::max(err, std::abs(double(y.at(0, 0, oy, ox)) -
                                     double(oy + 2 * ox + 1)));
    rec.add("ramp_closed_form", err, dtype_tol(dt, 1e-14, 1e-6));
  });

  rec.run("modulation_annihilation", [&] {
    SplitMix64 sub = rng.fork();
    const AscParams<T> p = asc_fixture<T>(4, 3, 2, sub);
    const Tensor4<T> x = random_tensor<T>(1, 4, 5, 5, sub);
    AscFields<T> f = degenerate_fields<T>(1, 2 * 9, 5, 5);
    fill_off_lattice(f.offsets, sub);
    for (auto& v : f.modulation.data) v = T(0);
    const Tensor4<T> y = asc_forward(x, p, f);
    double err = 0.0;
    for (const auto& v : y.data) err = std::max(err, std::abs(double(v)));
    rec.add("modulation_annihilation", err, 0.0);
  });

  rec.run("modulation_scaling", [&] {
    SplitMix64 sub = rng.fork();
    const AscParams<T> p = asc_fixture<T>(4, 3, 2, sub);
    const Tensor4<T> x = random_tensor<T>(1, 4, 5, 5, sub);
    AscFields<T> f;
    f.offsets = Tensor4<T>(1, 4 * 9, 5, 5);
    fill_off_lattice(f.offsets, sub);
    f.modulation = random_tensor<T>(1, 2 * 9, 5, 5, sub, 0.0, 1.0);
    const Tensor4<T> base = asc_forward(x, p, f);

    // s = 0.5 scales bitwise; a non-dyadic s holds within rounding.
    AscFields<T> half = f;
    for (auto& v : half.modulation.data) v *= T(0.5);
    Tensor4<T> want_half = base;
    for (auto& v : want_half.data) v *= T(0.5);
    rec.add("modulation_scaling_pow2",
            max_abs_diff(asc_forward(x, p, half), want_half), 0.0);

    AscFields<T> frac = f;
    for (auto& v : frac.modulation.data) v *= T(0.3);
    Tensor4<T> want_frac = base;
    for (auto& v : want_frac.data) v *= T(0.3);
    rec.add("modulation_scaling_general",
            max_abs_diff(asc_forward(x, p, frac), want_frac),
            dtype_tol(dt, 1e-12, 1e-5));
  });

  rec.run("group_permutation", [&] {
    SplitMix64 sub = rng.fork();
    const AscParams<T> p = asc_fixture<T>(4, 3, 2, sub);
    const Tensor4<T> x = random_tensor<T>(1, 4, 5, 5, sub);
    AscFields<T> f;
    f.offsets = random_tensor<T>(1, 4 * 9, 5, 5, sub, -1.0, 1.0);
    f.modulation = random_tensor<T>(1, 2 * 9, 5, 5, sub, 0.0, 1.0);
    const Tensor4<T> base = asc_forward(x, p, f);

    // Swapping the two output channels of each group permutes rows of the
    // base kernel and the output identically, bitwise.
    AscParams<T> pp = p;
    const int cig = 2, kk = 9;
    auto swap_rows = [&](int a, int b) {
      for (int ci = 0; ci < cig; ++ci)
        for (int k = 0; k < kk; ++k)
          std::swap(pp.base_weights[(std::size_t(a) * cig + ci) * kk + k],
                    pp.base_weights[(std::size_t(b) * cig + ci) * kk + k]);
    };
    swap_rows(0, 1);
    swap_rows(2, 3);
    const Tensor4<T> permuted = asc_forward(x, pp, f);
    double err = 0.0;
    const int perm[4] = {1, 0, 3, 2};
    for (int oc = 0; oc < 4; ++oc)
      err = std::max(err, max_abs_diff(slice_channels(permuted, oc, oc + 1),
                                       slice_channels(base, perm[oc],
                                                      perm[oc] + 1)));
    rec.add("group_permutation", err, 0.0);
  });

  rec.run("grad_checks", [&] {
    // The four ASC gradient groups at f64, fixtures off the bilinear lattice.
    // The fixture is conditioned so no gradient coordinate is nearly zero
    // (positive weights and modulation, inputs with a strict monotone ramp,
    // samples kept away from the zero-padding fringe); otherwise central
    // differences at the pinned step drown tiny coordinates in roundoff.
    double worst = 0.0;
    const int n_seeds = 5;
    for (int s = 0; s < n_seeds; ++s) {
      SplitMix64 sub(seed * 97 + s + 1);
      AscSpec spec;
      spec.c_in = spec.c_out = 4;
      spec.kh = spec.kw = 3;
      spec.groups = 2;
      AscParams<double> p = make_asc_params<double>(spec, sub);
      for (auto& v : p.base_weights) v = sub.uniform(0.1, 0.4);
      const int oh = spec.out_h(6), ow = spec.out_w(6);
      Tensor4<double> x(1, 4, 6, 6);
      {
        const double ay = sub.uniform(0.25, 0.6);
        const double ax = sub.uniform(0.25, 0.6);
        for (int ic = 0; ic < 4; ++ic)
          for (int iy = 0; iy < 6; ++iy)
            for (int ix = 0; ix < 6; ++ix)
              x.at(0, ic, iy, ix) =
                  0.3 + ay * iy + ax * ix + sub.uniform(-0.05, 0.05);
      }
      AscFields<double> f;
      f.offsets = Tensor4<double>(1, 2 * 2 * 9, oh, ow);
      fill_off_lattice(f.offsets, sub);
      f.modulation = random_tensor<double>(1, 2 * 9, oh, ow, sub, 0.4, 0.9);

      auto sum_of = [](const Tensor4<double>& t) {
        double acc = 0;
        for (double v : t.data) acc += v;
        return acc;
      };
      Tensor4<double> ones(1, 4, oh, ow);
      for (auto& v : ones.data) v = 1.0;
      const AscGrads<double> an = asc_backward(x, p, f, ones);

      const GradCheckReport rx = grad_check(
          "asc_x",
          [&](std::span<const double> t) {
            Tensor4<double> xx = x;
            xx.data.assign(t.begin(), t.end());
            return sum_of(asc_forward(xx, p, f));
          },
          [&](std::span<const double>) { return an.grad_x.data; }, x.data,
          1e-4);
      const GradCheckReport rw = grad_check(
          "asc_w",
          [&](std::span<const double> t) {
            AscParams<double> pp = p;
            pp.base_weights.assign(t.begin(), t.end());
            return sum_of(asc_forward(x, pp, f));
          },
          [&](std::span<const double>) { return an.grad_base_weights; },
          p.base_weights, 1e-4);
      const GradCheckReport ro = grad_check(
          "asc_offsets",
          [&](std::span<const double> t) {
            AscFields<double> ff = f;
            ff.offsets.data.assign(t.begin(), t.end());
            return sum_of(asc_forward(x, p, ff));
          },
          [&](std::span<const double>) { return an.grad_offsets.data; },
          f.offsets.data, 1e-4);
      const GradCheckReport rm = grad_check(
          "asc_modulation",
          [&](std::span<const double> t) {
            AscFields<double> ff = f;
            ff.modulation.data.assign(t.begin(), t.end());
            return sum_of(asc_forward(x, p, ff));
          },
          [&](std::span<const double>) { return an.grad_modulation.data; },
          f.modulation.data, 1e-4);
      worst = std::max(
          {worst, rx.max_rel_err, rw.max_rel_err, ro.max_rel_err,
           rm.max_rel_err});
    }
    rec.add("grad_checks", worst, 1e-4);
  });

  rec.run("backward_zero", [&] {
    SplitMix64 sub = rng.fork();
    const AscParams<T> p = asc_fixture<T>(2, 3, 1, sub);
    const Tensor4<T> x = random_tensor<T>(1, 2, 5, 5, sub);
    AscFields<T> f = degenerate_fields<T>(1, 9, 5, 5);
    fill_off_lattice(f.offsets, sub);
    const Tensor4<T> zeros(1, 2, 5, 5);
    const AscGrads<T> g = asc_backward(x, p, f, zeros);
    double err = 0.0;
    for (const auto& v : g.grad_x.data) err = std::max(err, std::abs(double(v)));
    for (const auto& v : g.grad_base_weights)
      err = std::max(err, std::abs(double(v)));
    for (const auto& v : g.grad_offsets.data)
      err = std::max(err, std::abs(double(v)));
    for (const auto& v : g.grad_modulation.data)
      err = std::max(err, std::abs(double(v)));
    rec.add("backward_zero", err, 0.0);
  });

  rec.run("backward_degenerate", [&] {
    SplitMix64 sub = rng.fork();
    const AscParams<T> p = asc_fixture<T>(4, 3, 2, sub);
    const Tensor4<T> x = random_tensor<T>(1, 4, 5, 5, sub);
    const AscFields<T> f = degenerate_fields<T>(1, 2 * 9, 5, 5);
    const Tensor4<T> go = random_tensor<T>(1, 4, 5, 5, rng);
    const AscGrads<T> ag = asc_backward(x, p, f, go);
    ConvParams<T> cp;
    cp.spec = ConvSpec{.c_in = 4, .c_out = 4, .kh = 3, .kw = 3, .pad_h = 1,
                       .pad_w = 1, .groups = 2};
    cp.weights = p.base_weights;
    const ConvGrads<T> cg = conv2d_backward(x, cp, go);
    double err = max_abs_diff(ag.grad_x, cg.grad_x);
    for (std::size_t i = 0; i < cg.grad_w.size(); ++i)
      err = std::max(err, std::abs(double(ag.grad_base_weights[i]) -
                                   double(cg.grad_w[i])));
    rec.add("backward_degenerate", err, dtype_tol(dt, 1e-12, 1e-4));
  });

  rec.run("block_zero_fixed_point", [&] {
    AscSpec s;
    s.c_in = s.c_out = 1;
    s.kh = s.kw = 1;
    SplitMix64 sub = rng.fork();
    AscParams<T> p = make_asc_params<T>(s, sub);
    p.base_weights = {T(1)};
    std::fill(p.generator.weights.begin(), p.generator.weights.end(), T(0));
    std::fill(p.generator.bias.begin(), p.generator.bias.end(), T(0));
    const Tensor4<T> x(1, 1, 4, 4);
    const Tensor4<T> y = asc_block_forward(x, p);
    double err = 0.0;
    for (const auto& v : y.data) err = std::max(err, std::abs(double(v)));
    rec.add("block_zero_fixed_point", err, 0.0);
  });

  rec.run("block_half_gain_large_input", [&] {
    // Zero generator leaves modulation at 0.5; for v = 100 the block output
    // sits within BN-epsilon of 0.5 * v because SiLU(50) ~ 50.
    AscSpec s;
    s.c_in = s.c_out = 1;
    s.kh = s.kw = 1;
    SplitMix64 sub = rng.fork();
    AscParams<T> p = make_asc_params<T>(s, sub);
    p.base_weights = {T(1)};
    std::fill(p.generator.weights.begin(), p.generator.weights.end(), T(0));
    std::fill(p.generator.bias.begin(), p.generator.bias.end(), T(0));
    Tensor4<T> x(1, 1, 4, 4);
    for (auto& v : x.data) v = T(100);
    const Tensor4<T> y = asc_block_forward(x, p);
    double err = 0.0;
    for (const auto& v : y.data) err = std::max(err, std::abs(double(v) - 50.0));
    rec.add("block_half_gain_large_input", err, 1e-3);
  });

  rec.run("block_composition", [&] {
    SplitMix64 sub = rng.fork();
    AscParams<T> p = asc_fixture<T>(4, 3, 2, sub);
    p.bn = BatchNorm<T>::random(4, sub);
    const Tensor4<T> x = random_tensor<T>(1, 4, 6, 6, sub);
    const AscFields<T> f = asc_generate_fields(x, p);
    const Tensor4<T> want = silu_map(batch_norm(asc_forward(x, p, f), p.bn));
    rec.add("block_composition", max_abs_diff(asc_block_forward(x, p), want),
            0.0);
  });

  rec.run("params_roundtrip", [&] {
    SplitMix64 sub = rng.fork();
    AscParams<T> p = asc_fixture<T>(4, 3, 2, sub);
    p.bn = BatchNorm<T>::random(4, sub);
    const std::string path = "/tmp/aslks_verify_ascp_" +
                             std::to_string(seed) + dtype_name(dt) + ".bin";
    save_asc_params(path, p);
    const AscParams<T> back = load_asc_params<T>(path);
    std::remove(path.c_str());
    const Tensor4<T> x = random_tensor<T>(1, 4, 5, 5, sub);
    rec.add("params_roundtrip",
            max_abs_diff(asc_block_forward(x, p), asc_block_forward(x, back)),
            0.0);
  });
}

// --------------------------------------------------------------------------
// lksc suite
// --------------------------------------------------------------------------

template <typename T>
void lksc_suite(Recorder& rec, std::uint64_t seed) {
  const DType dt = Tensor4<T>::dtype();
  SplitMix64 rng(seed ^ 0x51a1c0de);

  rec.run("plan_tile_count_51_5", [&] {
    SplitMix64 sub = rng.fork();
    LkscSpec s{.channels = 1, .kh = 51, .kw = 51, .tile = 5};
    const LkscPlan<T> plan = make_lksc_plan<T>(s, sub);
    std::set<int> dys;
    for (const auto& t : plan.branches[0].tiles) dys.insert(t.dy);
    std::set<int> want;
    for (int v = -25; v <= 25; v += 5) want.insert(v);
    const bool ok = plan.branches[0].tiles.size() == 11 &&
                    plan.branches[1].tiles.size() == 11 &&
                    plan.branches[2].tiles.size() == 1 &&
                    plan.branches[0].padded_rows == 55 && dys == want;
    rec.add_bool("plan_tile_count_51_5", ok);
  });

  rec.run("plan_even_tile_grid", [&] {
    SplitMix64 sub = rng.fork();
    LkscSpec s{.channels = 1, .kh = 7, .kw = 7, .tile = 5};
    const LkscPlan<T> plan = make_lksc_plan<T>(s, sub);
    std::set<int> dys;
    for (const auto& t : plan.branches[0].tiles) dys.insert(t.dy);
    const bool ok = plan.branches[0].tiles.size() == 2 &&
                    plan.branches[0].padded_rows == 10 &&
                    dys == std::set<int>{-2, 3};
    rec.add_bool("plan_even_tile_grid", ok);
  });

  rec.run("plan_rejects_bad_specs", [&] {
    bool even_a = false, small_k = false;
    try {
      LkscSpec{.channels = 1, .kh = 8, .kw = 8, .tile = 4}.validate();
    } catch (const SpecError&) {
      even_a = true;
    }
    try {
      LkscSpec{.channels = 1, .kh = 3, .kw = 7, .tile = 5}.validate();
    } catch (const SpecError&) {
      small_k = true;
    }
    rec.add_bool("plan_rejects_bad_specs", even_a && small_k);
  });

  rec.run("plan_lossless_reassembly", [&] {
    SplitMix64 sub = rng.fork();
    LkscSpec s{.channels = 2, .kh = 13, .kw = 9, .tile = 3};
    const LkscPlan<T> plan = make_lksc_plan<T>(s, sub);
    double err = 0.0;
    for (const auto& b : plan.branches) {
      const Tensor4<T> padded = branch_padded_kernel(b);
      Tensor4<T> rebuilt(b.channels, 1, b.padded_rows, b.padded_cols);
      for (const auto& tile : b.tiles)
        for (int ch = 0; ch < b.channels; ++ch)
          for (int ay = 0; ay < b.tile; ++ay)
            for (int ax = 0; ax < b.tile; ++ax) {
              const int r = b.kind == BranchKind::vertical
                                ? tile.index * b.tile + ay
                                : ay;
              const int col = b.kind == BranchKind::horizontal
                                  ? tile.index * b.tile + ax
                                  : ax;
              rebuilt.at(ch, 0, r, col) =
                  tile.weights[(std::size_t(ch) * b.tile + ay) * b.tile + ax];
            }
      err = std::max(err, max_abs_diff(padded, rebuilt));
      // Padding rows/cols past the original extent must be exactly zero.
      for (int ch = 0; ch < b.channels; ++ch)
        for (int r = 0; r < b.padded_rows; ++r)
          for (int col = 0; col < b.padded_cols; ++col)
            if (r >= b.rows || col >= b.cols)
              err = std::max(err, std::abs(double(padded.at(ch, 0, r, col))));
    }
    rec.add("plan_lossless_reassembly", err, 0.0);
  });

  rec.run("branch_equivalence", [&] {
    double err = 0.0;
    for (const auto& [kh, kw] : {std::pair{51, 51}, std::pair{7, 7}}) {
      SplitMix64 sub = rng.fork();
      LkscSpec s{.channels = 2, .kh = kh, .kw = kw, .tile = 5};
      const LkscPlan<T> plan = make_lksc_plan<T>(s, sub);
      Tensor4<T> x = random_tensor<T>(1, 2, 32, 32, sub);
      maybe_corrupt(x, rec.prefix + "/branch_equivalence");
      for (const auto& b : plan.branches)
        err = std::max(err, max_abs_diff(shift_conv_forward(x, b),
                                         branch_direct_conv(x, b)));
    }
    rec.add("branch_equivalence", err, dtype_tol(dt, 1e-12, 1e-5));
  });

  rec.run("linear_three_way", [&] {
    SplitMix64 sub = rng.fork();
    LkscSpec s{.channels = 2, .kh = 11, .kw = 9, .tile = 3};
    const LkscPlan<T> plan = make_lksc_plan<T>(s, sub);
    const Tensor4<T> x = random_tensor<T>(1, 2, 20, 20, sub);
    const Tensor4<T> lin = lksc_linear(x, plan);
    Tensor4<T> direct_sum = branch_direct_conv(x, plan.branches[0]);
    for (int bi = 1; bi < 3; ++bi) {
      const Tensor4<T> part = branch_direct_conv(x, plan.branches[bi]);
      for (std::size_t i = 0; i < direct_sum.data.size(); ++i)
        direct_sum.data[i] += part.data[i];
    }
    const double err = std::max(max_abs_diff(lin, direct_sum),
                                max_abs_diff(lin, lksc_dense_direct(x, plan)));
    rec.add("linear_three_way", err, dtype_tol(dt, 1e-12, 1e-5));
  });

  rec.run("center_tile_only", [&] {
    SplitMix64 sub = rng.fork();
    LkscSpec s{.channels = 2, .kh = 15, .kw = 15, .tile = 5};
    std::vector<T> wv(std::size_t(2) * 15 * 5, T(0));
    // Populate only the center tile rows [5, 10).
    for (int ch = 0; ch < 2; ++ch)
      for (int r = 5; r < 10; ++r)
        for (int col = 0; col < 5; ++col)
          wv[(std::size_t(ch) * 15 + r) * 5 + col] =
              T(sub.uniform(-0.3, 0.3));
    const std::vector<T> zero_h(std::size_t(2) * 5 * 15, T(0));
    const std::vector<T> zero_c(std::size_t(2) * 5 * 5, T(0));
    const LkscPlan<T> plan = plan_lksc<T>(s, wv, zero_h, zero_c);
    const Tensor4<T> x = random_tensor<T>(1, 2, 12, 12, sub);

    ConvParams<T> small;
    small.spec = ConvSpec{.c_in = 2, .c_out = 2, .kh = 5, .kw = 5, .pad_h = 2,
                          .pad_w = 2, .groups = 2};
    small.weights.resize(std::size_t(2) * 25);
    for (int ch = 0; ch < 2; ++ch)
      for (int r = 0; r < 5; ++r)
        for (int col = 0; col < 5; ++col)
          small.weights[(std::size_t(ch) * 5 + r) * 5 + col] =
              wv[(std::size_t(ch) * 15 + r + 5) * 5 + col];
    rec.add("center_tile_only",
            max_abs_diff(shift_conv_forward(x, plan.branches[0]),
                         conv2d_direct(x, small)),
            0.0);
  });

  rec.run("zero_kernel_annihilation", [&] {
    LkscSpec s{.channels = 2, .kh = 7, .kw = 7, .tile = 5};
    const std::vector<T> zv(std::size_t(2) * 7 * 5, T(0));
    const std::vector<T> zh(std::size_t(2) * 5 * 7, T(0));
    const std::vector<T> zc(std::size_t(2) * 5 * 5, T(0));
    const LkscPlan<T> plan = plan_lksc<T>(s, zv, zh, zc);
    const Tensor4<T> x = random_tensor<T>(1, 2, 10, 10, rng);
    const Tensor4<T> lin = lksc_linear(x, plan);
    double err = 0.0;
    for (const auto& v : lin.data) err = std::max(err, std::abs(double(v)));
    rec.add("zero_kernel_annihilation", err, 0.0);
  });

  rec.run("constant_propagation", [&] {
    // All branch kernels zero, pointwise bias b, identity BN: SiLU(bn(b)).
    LkscSpec s{.channels = 2, .kh = 7, .kw = 7, .tile = 5};
    const std::vector<T> zv(std::size_t(2) * 7 * 5, T(0));
    const std::vector<T> zh(std::size_t(2) * 5 * 7, T(0));
    const std::vector<T> zc(std::size_t(2) * 5 * 5, T(0));
    LkscPlan<T> plan = plan_lksc<T>(s, zv, zh, zc);
    plan.pointwise.bias = {T(0.7), T(-1.3)};
    const Tensor4<T> x = random_tensor<T>(1, 2, 8, 8, rng);
    const Tensor4<T> y = lksc_forward(x, plan);
    double err = 0.0;
    for (int ch = 0; ch < 2; ++ch) {
      const T want =
          silu(T(double(plan.pointwise.bias[ch]) / std::sqrt(1.0 + kBnEps)));
      for (int iy = 0; iy < 8; ++iy)
        for (int ix = 0; ix < 8; ++ix)
          err = std::max(err, std::abs(double(y.at(0, ch, iy, ix)) -
                                       double(want)));
    }
    rec.add("constant_propagation", err, dtype_tol(dt, 1e-12, 1e-6));
  });

  rec.run("branch_annihilation", [&] {
    SplitMix64 sub = rng.fork();
    LkscSpec s{.channels = 2, .kh = 9, .kw = 9, .tile = 3};
    LkscPlan<T> plan = make_lksc_plan<T>(s, sub);
    std::vector<T> zv(plan.branches[0].weights.size(), T(0));
    std::vector<T> zh(plan.branches[1].weights.size(), T(0));
    const LkscPlan<T> core_only = plan_lksc<T>(
        s, zv, zh, std::span<const T>(plan.branches[2].weights));
    const Tensor4<T> x = random_tensor<T>(1, 2, 12, 12, sub);
    rec.add("branch_annihilation",
            max_abs_diff(lksc_linear(x, core_only),
                         shift_conv_forward(x, core_only.branches[2])),
            0.0);
  });

  rec.run("forward_composition", [&] {
    SplitMix64 sub = rng.fork();
    LkscSpec s{.channels = 3, .kh = 7, .kw = 7, .tile = 5};
    const LkscPlan<T> plan = make_lksc_plan<T>(s, sub);
    const Tensor4<T> x = random_tensor<T>(1, 3, 10, 10, sub);
    const Tensor4<T> want = silu_map(
        batch_norm(conv2d_direct(lksc_linear(x, plan), plan.pointwise),
                   plan.bn));
    rec.add("forward_composition", max_abs_diff(lksc_forward(x, plan), want),
            0.0);
  });

  rec.run("grad_check", [&] {
    // Conditioned like the ASC fixture: every factor in the chain is kept
    // positive and bounded away from zero so finite differences at the
    // pinned step resolve all coordinates.
    double worst = 0.0;
    for (int s = 0; s < 5; ++s) {
      SplitMix64 sub(seed * 131 + s + 1);
      LkscSpec spec{.channels = 2, .kh = 7, .kw = 7, .tile = 5};
      LkscPlan<double> plan = make_lksc_plan<double>(spec, sub);
      {
        std::array<std::vector<double>, 3> strips;
        for (int bi = 0; bi < 3; ++bi) {
          strips[bi] = plan.branches[bi].weights;
          for (auto& v : strips[bi]) v = sub.uniform(0.03, 0.15);
        }
        LkscPlan<double> conditioned = plan_lksc<double>(
            spec, std::span<const double>(strips[0]),
            std::span<const double>(strips[1]),
            std::span<const double>(strips[2]));
        for (auto& v : conditioned.pointwise.weights)
          v = sub.uniform(0.2, 0.6);
        for (auto& v : conditioned.pointwise.bias) v = sub.uniform(0.1, 0.3);
        conditioned.bn = BatchNorm<double>::identity(2);
        for (auto& v : conditioned.bn.scale) v = sub.uniform(0.7, 1.3);
        for (auto& v : conditioned.bn.var) v = sub.uniform(0.7, 1.3);
        plan = std::move(conditioned);
      }
      const Tensor4<double> x = random_tensor<double>(1, 2, 12, 12, sub, 0.2, 1.0);

      // theta = [x, strip_v, strip_h, strip_c, pw_w, pw_b]
      std::vector<double> theta = x.data;
      for (int bi = 0; bi < 3; ++bi)
        theta.insert(theta.end(), plan.branches[bi].weights.begin(),
                     plan.branches[bi].weights.end());
      theta.insert(theta.end(), plan.pointwise.weights.begin(),
                   plan.pointwise.weights.end());
      theta.insert(theta.end(), plan.pointwise.bias.begin(),
                   plan.pointwise.bias.end());

      auto rebuild = [&](std::span<const double> t) {
        Tensor4<double> xx = x;
        std::size_t at = 0;
        std::copy(t.begin(), t.begin() + xx.data.size(), xx.data.begin());
        at += xx.data.size();
        std::array<std::vector<double>, 3> strips;
        for (int bi = 0; bi < 3; ++bi) {
          const std::size_t len = plan.branches[bi].weights.size();
          strips[bi].assign(t.begin() + at, t.begin() + at + len);
          at += len;
        }
        LkscPlan<double> pp = plan_lksc<double>(
            spec, std::span<const double>(strips[0]),
            std::span<const double>(strips[1]),
            std::span<const double>(strips[2]));
        pp.bn = plan.bn;
        const std::size_t wlen = plan.pointwise.weights.size();
        pp.pointwise.weights.assign(t.begin() + at, t.begin() + at + wlen);
        at += wlen;
        pp.pointwise.bias.assign(t.begin() + at, t.end());
        return std::make_pair(std::move(xx), std::move(pp));
      };

      const GradCheckReport r = grad_check(
          "lksc",
          [&](std::span<const double> t) {
            const auto [xx, pp] = rebuild(t);
            const Tensor4<double> y = lksc_forward(xx, pp);
            double acc = 0;
            for (double v : y.data) acc += v;
            return acc;
          },
          [&](std::span<const double> t) {
            const auto [xx, pp] = rebuild(t);
            Tensor4<double> ones(xx.n, xx.c, xx.h, xx.w);
            for (auto& v : ones.data) v = 1.0;
            const LkscGrads<double> g = lksc_backward(xx, pp, ones);
            std::vector<double> flat = g.grad_x.data;
            for (int bi = 0; bi < 3; ++bi)
              flat.insert(flat.end(), g.grad_branch_weights[bi].begin(),
                          g.grad_branch_weights[bi].end());
            flat.insert(flat.end(), g.grad_pointwise_w.begin(),
                        g.grad_pointwise_w.end());
            flat.insert(flat.end(), g.grad_pointwise_b.begin(),
                        g.grad_pointwise_b.end());
            return flat;
          },
          theta, 1e-4);
      worst = std::max(worst, r.max_rel_err);
    }
    rec.add("grad_check", worst, 1e-4);
  });

  rec.run("backward_zero", [&] {
    SplitMix64 sub = rng.fork();
    LkscSpec s{.channels = 2, .kh = 7, .kw = 7, .tile = 5};
    const LkscPlan<T> plan = make_lksc_plan<T>(s, sub);
    const Tensor4<T> x = random_tensor<T>(1, 2, 8, 8, sub);
    const Tensor4<T> zeros(1, 2, 8, 8);
    const LkscGrads<T> g = lksc_backward(x, plan, zeros);
    double err = 0.0;
    for (const auto& v : g.grad_x.data) err = std::max(err, std::abs(double(v)));
    for (const auto& bw : g.grad_branch_weights)
      for (const auto& v : bw) err = std::max(err, std::abs(double(v)));
    for (const auto& v : g.grad_pointwise_w)
      err = std::max(err, std::abs(double(v)));
    for (const auto& v : g.grad_pointwise_b)
      err = std::max(err, std::abs(double(v)));
    rec.add("backward_zero", err, 0.0);
  });

  rec.run("backward_single_tile_degenerate", [&] {
    // kh = kw = A with zero vertical/horizontal strips reduces to the plain
    // A x A depthwise conv under the fused head.
    SplitMix64 sub = rng.fork();
    LkscSpec s{.channels = 2, .kh = 5, .kw = 5, .tile = 5};
    std::vector<T> zv(std::size_t(2) * 25, T(0));
    std::vector<T> wc(std::size_t(2) * 25);
    for (auto& v : wc) v = T(sub.uniform(-0.2, 0.2));
    const LkscPlan<T> plan = plan_lksc<T>(s, zv, zv, wc);
    const Tensor4<T> x = random_tensor<T>(1, 2, 9, 9, sub);
    const Tensor4<T> go = random_tensor<T>(1, 2, 9, 9, sub);
    const LkscGrads<T> g = lksc_backward(x, plan, go);

    ConvParams<T> small;
    small.spec = ConvSpec{.c_in = 2, .c_out = 2, .kh = 5, .kw = 5, .pad_h = 2,
                          .pad_w = 2, .groups = 2};
    small.weights = wc;
    const Tensor4<T> z = conv2d_direct(x, small);
    Tensor4<T> gz(1, 2, 9, 9);
    const T inv = T(1) / std::sqrt(T(1) + T(kBnEps));
    for (std::size_t i = 0; i < gz.data.size(); ++i)
      gz.data[i] = go.data[i] * silu_grad(z.data[i] * inv) * inv;
    const ConvGrads<T> cg = conv2d_backward(x, small, gz);
    double err = max_abs_diff(g.grad_x, cg.grad_x);
    for (std::size_t i = 0; i < cg.grad_w.size(); ++i)
      err = std::max(err, std::abs(double(g.grad_branch_weights[2][i]) -
                                   double(cg.grad_w[i])));
    rec.add("backward_single_tile_degenerate", err,
            dtype_tol(dt, 1e-12, 1e-4));
  });

  rec.run("param_ratio_51_5", [&] {
    LkscSpec s{.channels = 1, .kh = 51, .kw = 51, .tile = 5};
    const double err =
        std::abs(lksc_param_ratio(s) - 535.0 / 2601.0) +
        std::abs(double(lksc_branch_params_per_channel(s)) - 535.0);
    rec.add("param_ratio_51_5", err, 1e-12);
  });

  rec.run("plan_roundtrip", [&] {
    SplitMix64 sub = rng.fork();
    LkscSpec s{.channels = 2, .kh = 11, .kw = 7, .tile = 3};
    const LkscPlan<T> plan = make_lksc_plan<T>(s, sub);
    const std::string base = "/tmp/aslks_verify_plan_" + std::to_string(seed) +
                             dtype_name(dt);
    save_lksc_plan(base + ".json", base + ".t4pk", plan);
    const LkscPlan<T> back = load_lksc_plan<T>(base + ".json");
    std::remove((base + ".json").c_str());
    std::remove((base + ".t4pk").c_str());
    const Tensor4<T> x = random_tensor<T>(1, 2, 10, 10, sub);
    rec.add("plan_roundtrip",
            max_abs_diff(lksc_forward(x, plan), lksc_forward(x, back)), 0.0);
  });
}

// --------------------------------------------------------------------------
// c2f suite
// --------------------------------------------------------------------------

template <typename T>
void c2f_suite(Recorder& rec, std::uint64_t seed) {
  const DType dt = Tensor4<T>::dtype();
  SplitMix64 rng(seed ^ 0xc2f00000);

  rec.run("shape_law", [&] {
    bool ok = true;
    for (C2fVariant variant :
         {C2fVariant::standard, C2fVariant::ascm, C2fVariant::lkscm}) {
      SplitMix64 sub = rng.fork();
      C2fConfig cfg{.c_in = 8, .c_out = 12, .n = 2, .variant = variant,
                    .kernel = variant == C2fVariant::lkscm ? 7 : 3};
      const C2fBlock<T> blk = make_c2f_block<T>(cfg, sub);
      const Tensor4<T> x = random_tensor<T>(2, 8, 9, 11, sub);
      const Tensor4<T> y = c2f_block_forward(x, blk);
      ok = ok && y.n == 2 && y.c == 12 && y.h == 9 && y.w == 11;
    }
    rec.add_bool("shape_law", ok);
  });

  rec.run("standard_width_law", [&] {
    bool ok = true;
    for (int n : {1, 2, 3}) {
      SplitMix64 sub = rng.fork();
      C2fConfig cfg{.c_in = 8, .c_out = 8, .n = n};
      const C2fBlock<T> blk = make_c2f_block<T>(cfg, sub);
      const Tensor4<T> x = random_tensor<T>(1, 8, 6, 6, sub);
      C2fTrace trace;
      c2f_forward(x, blk, &trace);
      ok = ok && trace.concat_channels == (2 + n) * cfg.hidden();
    }
    rec.add_bool("standard_width_law", ok);
  });

  rec.run("ascm_width_law_eq6", [&] {
    bool ok = true;
    for (int n : {1, 2, 3}) {
      SplitMix64 sub = rng.fork();
      C2fConfig cfg{.c_in = 8, .c_out = 8, .n = n, .variant = C2fVariant::ascm};
      const C2fBlock<T> blk = make_c2f_block<T>(cfg, sub);
      const Tensor4<T> x = random_tensor<T>(1, 8, 6, 6, sub);
      C2fTrace trace;
      ascm_c2f_forward(x, blk, &trace);
      ok = ok && trace.concat_channels == 5 * cfg.hidden();
    }
    rec.add_bool("ascm_width_law_eq6", ok);
  });

  rec.run("ascm_width_law_standard_mode", [&] {
    SplitMix64 sub = rng.fork();
    C2fConfig cfg{.c_in = 8, .c_out = 8, .n = 2, .variant = C2fVariant::ascm,
                  .faithful_eq6 = false};
    const C2fBlock<T> blk = make_c2f_block<T>(cfg, sub);
    const Tensor4<T> x = random_tensor<T>(1, 8, 6, 6, sub);
    C2fTrace trace;
    ascm_c2f_forward(x, blk, &trace);
    rec.add_bool("ascm_width_law_standard_mode",
                 trace.concat_channels == 4 * cfg.hidden());
  });

  rec.run("standard_composition", [&] {
    SplitMix64 sub = rng.fork();
    C2fConfig cfg{.c_in = 6, .c_out = 10, .n = 2};
    const C2fBlock<T> blk = make_c2f_block<T>(cfg, sub);
    Tensor4<T> x = random_tensor<T>(1, 6, 7, 7, sub);
    maybe_corrupt(x, rec.prefix + "/standard_composition");
    const int cp = cfg.hidden();
    const Tensor4<T> stem = conv_bn_silu(x, blk.stem);
    std::vector<Tensor4<T>> parts;
    parts.push_back(slice_channels(stem, 0, cp));
    parts.push_back(slice_channels(stem, cp, 2 * cp));
    for (int i = 0; i < cfg.n; ++i)
      parts.push_back(bottleneck_forward(parts.back(), blk.bottlenecks[i]));
    std::vector<const Tensor4<T>*> ptrs;
    for (const auto& p : parts) ptrs.push_back(&p);
    const Tensor4<T> want = conv_bn_silu(
        concat_channels(std::span<const Tensor4<T>* const>(ptrs)), blk.tail);
    rec.add("standard_composition", max_abs_diff(c2f_forward(x, blk), want),
            0.0);
  });

  rec.run("ascm_composition_n1_duplication", [&] {
    // n = 1 leaves the (n-1)-fold composition empty, so Y2' equals Y2 and
    // the concat carries it twice.
    SplitMix64 sub = rng.fork();
    C2fConfig cfg{.c_in = 8, .c_out = 8, .n = 1, .variant = C2fVariant::ascm};
    const C2fBlock<T> blk = make_c2f_block<T>(cfg, sub);
    const Tensor4<T> x = random_tensor<T>(1, 8, 6, 6, sub);
    const int cp = cfg.hidden();
    const Tensor4<T> stem = conv_bn_silu(x, blk.stem);
    const Tensor4<T> x1 = slice_channels(stem, 0, cp);
    const Tensor4<T> x2 = slice_channels(stem, cp, 2 * cp);
    const Tensor4<T> y2 = asc_block_forward(x2, blk.asc_units[0]);
    const Tensor4<T>* parts[] = {&x1, &stem, &y2, &y2};
    const Tensor4<T> want = conv_bn_silu(
        concat_channels(std::span<const Tensor4<T>* const>(parts, 4)),
        blk.tail);
    rec.add("ascm_composition_n1_duplication",
            max_abs_diff(ascm_c2f_forward(x, blk), want), 0.0);
  });

  rec.run("ascm_composition_n3", [&] {
    SplitMix64 sub = rng.fork();
    C2fConfig cfg{.c_in = 8, .c_out = 12, .n = 3, .variant = C2fVariant::ascm,
                  .groups = 2};
    const C2fBlock<T> blk = make_c2f_block<T>(cfg, sub);
    const Tensor4<T> x = random_tensor<T>(1, 8, 6, 6, sub);
    const int cp = cfg.hidden();
    const Tensor4<T> stem = conv_bn_silu(x, blk.stem);
    const Tensor4<T> x1 = slice_channels(stem, 0, cp);
    const Tensor4<T> x2 = slice_channels(stem, cp, 2 * cp);
    const Tensor4<T> y2 = asc_block_forward(x2, blk.asc_units[0]);
    Tensor4<T> y2p = asc_block_forward(y2, blk.asc_units[1]);
    y2p = asc_block_forward(y2p, blk.asc_units[2]);
    const Tensor4<T>* parts[] = {&x1, &stem, &y2, &y2p};
    const Tensor4<T> want = conv_bn_silu(
        concat_channels(std::span<const Tensor4<T>* const>(parts, 4)),
        blk.tail);
    rec.add("ascm_composition_n3", max_abs_diff(ascm_c2f_forward(x, blk), want),
            0.0);
  });

  rec.run("lkscm_composition", [&] {
    SplitMix64 sub = rng.fork();
    C2fConfig cfg{.c_in = 8, .c_out = 8, .n = 2, .variant = C2fVariant::lkscm,
                  .kernel = 7, .tile = 5};
    const C2fBlock<T> blk = make_c2f_block<T>(cfg, sub);
    const Tensor4<T> x = random_tensor<T>(1, 8, 8, 8, sub);
    const int cp = cfg.hidden();
    const Tensor4<T> stem = conv_bn_silu(x, blk.stem);
    std::vector<Tensor4<T>> parts;
    parts.push_back(slice_channels(stem, 0, cp));
    parts.push_back(slice_channels(stem, cp, 2 * cp));
    for (int i = 0; i < cfg.n; ++i)
      parts.push_back(
          add(parts.back(), lksc_forward(parts.back(), blk.lksc_units[i])));
    std::vector<const Tensor4<T>*> ptrs;
    for (const auto& p : parts) ptrs.push_back(&p);
    const Tensor4<T> want = conv_bn_silu(
        concat_channels(std::span<const Tensor4<T>* const>(ptrs)), blk.tail);
    rec.add("lkscm_composition", max_abs_diff(lkscm_c2f_forward(x, blk), want),
            0.0);
  });

  rec.run("lkscm_unit_annihilation", [&] {
    SplitMix64 sub = rng.fork();
    C2fConfig cfg{.c_in = 8, .c_out = 8, .n = 1, .variant = C2fVariant::lkscm,
                  .kernel = 7, .tile = 5};
    C2fBlock<T> blk = make_c2f_block<T>(cfg, sub);
    LkscPlan<T>& unit = blk.lksc_units[0];
    for (auto& b : unit.branches) {
      std::fill(b.weights.begin(), b.weights.end(), T(0));
      for (auto& t : b.tiles) std::fill(t.weights.begin(), t.weights.end(), T(0));
    }
    std::fill(unit.pointwise.weights.begin(), unit.pointwise.weights.end(),
              T(0));
    for (int ch = 0; ch < 4; ++ch)
      unit.pointwise.weights[std::size_t(ch) * 4 + ch] = T(1);
    std::fill(unit.pointwise.bias.begin(), unit.pointwise.bias.end(), T(0));
    unit.bn = BatchNorm<T>::identity(4);
    const Tensor4<T> x = random_tensor<T>(1, 8, 6, 6, sub);
    const Tensor4<T> stem = conv_bn_silu(x, blk.stem);
    const Tensor4<T> x2 = slice_channels(stem, 4, 8);
    const Tensor4<T> body = lksc_forward(x2, unit);
    double err = 0.0;
    for (const auto& v : body.data) err = std::max(err, std::abs(double(v)));
    // With the unit body annihilated the chained half passes through.
    const Tensor4<T> x1 = slice_channels(stem, 0, 4);
    const Tensor4<T> chained = add(x2, body);
    const Tensor4<T>* parts[] = {&x1, &x2, &chained};
    const Tensor4<T> want = conv_bn_silu(
        concat_channels(std::span<const Tensor4<T>* const>(parts, 3)),
        blk.tail);
    err = std::max(err, max_abs_diff(lkscm_c2f_forward(x, blk), want));
    rec.add("lkscm_unit_annihilation", err, 0.0);
  });

  rec.run("counts_match_instantiated_params", [&] {
    // The analytic parameter count must equal the instantiated block's
    // actual parameter storage (weights + biases + BN affine pairs).
    bool ok = true;
    for (C2fVariant variant :
         {C2fVariant::standard, C2fVariant::ascm, C2fVariant::lkscm}) {
      SplitMix64 sub = rng.fork();
      C2fConfig cfg{.c_in = 8, .c_out = 8, .n = 2, .variant = variant,
                    .kernel = variant == C2fVariant::lkscm ? 7 : 3,
                    .groups = variant == C2fVariant::ascm ? 2 : 1};
      const C2fBlock<T> blk = make_c2f_block<T>(cfg, sub);
      long long actual = 0;
      auto count_cbs = [&](const ConvBnSilu<T>& m) {
        actual += (long long)m.conv.weights.size() + m.conv.bias.size() +
                  m.bn.scale.size() + m.bn.shift.size();
      };
      count_cbs(blk.stem);
      count_cbs(blk.tail);
      for (const auto& b : blk.bottlenecks) {
        count_cbs(b.cv1);
        count_cbs(b.cv2);
      }
      for (const auto& u : blk.asc_units)
        actual += (long long)u.base_weights.size() +
                  u.generator.weights.size() + u.generator.bias.size() +
                  u.bn.scale.size() + u.bn.shift.size();
      for (const auto& u : blk.lksc_units) {
        for (const auto& b : u.branches) actual += (long long)b.weights.size();
        actual += (long long)u.pointwise.weights.size() +
                  u.pointwise.bias.size() + u.bn.scale.size() +
                  u.bn.shift.size();
      }
      const C2fConfig cfgs[] = {cfg};
      const CostReport r =
          count_params_flops(std::span<const C2fConfig>(cfgs, 1),
                             Shape4{1, 8, 16, 16});
      ok = ok && r.total_params == actual;
    }
    rec.add_bool("counts_match_instantiated_params", ok);
  });

  rec.run("counts_standard_closed_form", [&] {
    const C2fConfig cfg{.c_in = 16, .c_out = 16, .n = 2};
    const C2fConfig cfgs[] = {cfg};
    const CostReport r = count_params_flops(
        std::span<const C2fConfig>(cfgs, 1), Shape4{1, 16, 8, 8});
    const int cp = 8;
    const long long stem = 16LL * 2 * cp * 1 * 1 + 2 * 2 * cp;
    const long long units = 2LL * 2 * (1LL * cp * cp * 9 + 2 * cp);
    const long long tail = (2 + 2LL) * cp * 16 + 2 * 16;
    const long long macs_expected =
        1LL * 8 * 8 *
        (16LL * 2 * cp + 2 * 2 * (1LL * cp * cp * 9) + (2 + 2LL) * cp * 16);
    const bool ok = r.total_params == stem + units + tail &&
                    r.total_macs == macs_expected;
    rec.add_bool("counts_standard_closed_form", ok);
  });

  rec.run("cost_direction_lkscm_vs_dense", [&] {
    const C2fConfig cfg{.c_in = 64, .c_out = 64, .n = 1,
                        .variant = C2fVariant::lkscm, .kernel = 51, .tile = 5};
    const C2fConfig cfgs[] = {cfg};
    const Shape4 in{1, 64, 64, 64};
    const CostReport decomposed = count_params_flops(
        std::span<const C2fConfig>(cfgs, 1), in, CostMode::as_configured);
    const CostReport dense = count_params_flops(
        std::span<const C2fConfig>(cfgs, 1), in, CostMode::dense_large_kernel);
    rec.add_bool("cost_direction_lkscm_vs_dense",
                 decomposed.total_params < dense.total_params &&
                     decomposed.total_macs < dense.total_macs);
  });

  rec.run("rejects_channel_mismatch", [&] {
    SplitMix64 sub = rng.fork();
    C2fConfig cfg{.c_in = 8, .c_out = 8, .n = 1};
    const C2fBlock<T> blk = make_c2f_block<T>(cfg, sub);
    const Tensor4<T> bad = random_tensor<T>(1, 6, 6, 6, sub);
    bool threw = false;
    try {
      c2f_forward(bad, blk);
    } catch (const ShapeError&) {
      threw = true;
    }
    rec.add_bool("rejects_channel_mismatch", threw);
  });

  (void)dt;
}

// --------------------------------------------------------------------------
// metrics suite
// --------------------------------------------------------------------------

Box rand_box(SplitMix64& rng) {
  Box b;
  b.x1 = rng.uniform(0.0, 80.0);
  b.y1 = rng.uniform(0.0, 80.0);
  b.x2 = b.x1 + rng.uniform(2.0, 40.0);
  b.y2 = b.y1 + rng.uniform(2.0, 40.0);
  return b;
}

void metrics_suite(Recorder& rec, std::uint64_t seed) {
  SplitMix64 rng(seed ^ 0x0a11ce5e);

  rec.run("iou_identity", [&] {
    const Box b{1, 2, 5, 9};
    rec.add("iou_identity", std::abs(iou(b, b) - 1.0), 0.0);
  });

  rec.run("iou_disjoint", [&] {
    rec.add("iou_disjoint", std::abs(iou({0, 0, 2, 2}, {5, 5, 7, 7})), 0.0);
  });

  rec.run("iou_overlap_third", [&] {
    rec.add("iou_overlap_third",
            std::abs(iou({0, 0, 10, 10}, {5, 0, 15, 10}) - 1.0 / 3.0), 1e-15);
  });

  rec.run("iou_properties", [&] {
    bool ok = true;
    for (int rep = 0; rep < 50; ++rep) {
      const Box a = rand_box(rng), b = rand_box(rng);
      const double v = iou(a, b);
      ok = ok && v >= 0.0 && v <= 1.0 && v == iou(b, a);
      ok = ok && (std::abs(iou(a, a) - 1.0) == 0.0);
    }
    rec.add_bool("iou_properties", ok);
  });

  rec.run("ap_single_hit", [&] {
    const GroundTruth gt{"img0", 0, {0, 0, 10, 10}};
    const Detection det{"img0", 0, {0, 0, 10, 12.5}, 0.9};  // IoU 0.8
    const double ap = average_precision_50({&det, 1}, {&gt, 1}, 0);
    rec.add("ap_single_hit", std::abs(ap - 1.0), 0.0);
  });

  rec.run("ap_below_threshold", [&] {
    const GroundTruth gt{"img0", 0, {0, 0, 10, 10}};
    const Detection det{"img0", 0, {6, 0, 16, 10}, 0.9};  // IoU = 4/16 = 0.25
    rec.add("ap_below_threshold",
            std::abs(average_precision_50({&det, 1}, {&gt, 1}, 0)), 0.0);
  });

  rec.run("ap_hand_case_5_6", [&] {
    // hit, miss, hit by descending confidence: PR points (0.5, 1), (0.5,
    // 0.5), (1.0, 2/3); envelope area 0.5 * 1 + 0.5 * 2/3 = 5/6.
    const GroundTruth gts[] = {{"img0", 0, {0, 0, 10, 10}},
                               {"img0", 0, {20, 20, 30, 30}}};
    const Detection dets[] = {{"img0", 0, {0, 0, 10, 10}, 0.9},
                              {"img0", 0, {50, 50, 60, 60}, 0.8},
                              {"img0", 0, {20, 20, 30, 30}, 0.7}};
    const double ap = average_precision_50({dets, 3}, {gts, 2}, 0);
    rec.add("ap_hand_case_5_6", std::abs(ap - 5.0 / 6.0), 1e-12);
  });

  rec.run("ap_empty_ground_truth", [&] {
    const Detection det{"img0", 0, {0, 0, 10, 10}, 0.9};
    const double ap = average_precision_50({&det, 1}, {}, 0);
    const ApResult r = map50({&det, 1}, {}, 1);
    rec.add("ap_empty_ground_truth",
            std::abs(ap) + (r.class_has_gt[0] ? 1.0 : 0.0), 0.0);
  });

  rec.run("map50_hand_mean", [&] {
    // Class 0: one perfect hit (AP 1). Class 1: FP then TP (AP 0.5).
    const GroundTruth gts[] = {{"img0", 0, {0, 0, 10, 10}},
                               {"img0", 1, {20, 20, 30, 30}}};
    const Detection dets[] = {{"img0", 0, {0, 0, 10, 10}, 0.9},
                              {"img0", 1, {50, 50, 60, 60}, 0.8},
                              {"img0", 1, {20, 20, 30, 30}, 0.6}};
    const ApResult r = map50({dets, 3}, {gts, 2}, 2);
    const double err = std::abs(r.per_class_ap[0] - 1.0) +
                       std::abs(r.per_class_ap[1] - 0.5) +
                       std::abs(r.map50 - 0.75);
    rec.add("map50_hand_mean", err, 1e-15);
  });

  rec.run("map50_no_detections", [&] {
    const GroundTruth gt{"img0", 0, {0, 0, 10, 10}};
    const ApResult r = map50({}, {&gt, 1}, 2);
    rec.add("map50_no_detections", std::abs(r.map50), 0.0);
  });

  rec.run("map50_mean_law", [&] {
    SplitMix64 sub = rng.fork();
    std::vector<Detection> dets;
    std::vector<GroundTruth> gts;
    const int n_classes = 4;
    for (int cls = 0; cls < n_classes; ++cls)
      for (int i = 0; i < 3; ++i) {
        gts.push_back({"img" + std::to_string(i % 2), cls, rand_box(sub)});
        dets.push_back({"img" + std::to_string(i % 2), cls, rand_box(sub),
                        sub.uniform(0.01, 1.0)});
      }
    const ApResult r = map50(dets, gts, n_classes);
    double mean = 0;
    for (double v : r.per_class_ap) mean += v;
    mean /= n_classes;
    rec.add("map50_mean_law", std::abs(r.map50 - mean), 0.0);
  });

  rec.run("ap_vs_exhaustive_oracle", [&] {
    double err = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
      SplitMix64 sub(seed * 1009 + inst);
      std::vector<Detection> dets;
      std::vector<GroundTruth> gts;
      const int n_gt = int(sub.uniform_int(0, 3));
      const int n_det = int(sub.uniform_int(0, 5));
      for (int i = 0; i < n_gt; ++i)
        gts.push_back({"img" + std::to_string(sub.uniform_int(0, 1)), 0,
                       rand_box(sub)});
      for (int i = 0; i < n_det; ++i) {
        Detection d;
        d.image_id = "img" + std::to_string(sub.uniform_int(0, 1));
        d.class_id = 0;
        // Half the detections perturb a ground-truth box, so matches occur.
        if (!gts.empty() && sub.next_unit() < 0.5) {
          const Box& base = gts[std::size_t(sub.uniform_int(0, n_gt - 1))].box;
          d.box = {base.x1 + sub.uniform(-3, 3), base.y1 + sub.uniform(-3, 3),
                   base.x2 + sub.uniform(-3, 3), base.y2 + sub.uniform(-3, 3)};
          if (d.box.x2 <= d.box.x1) d.box.x2 = d.box.x1 + 1;
          if (d.box.y2 <= d.box.y1) d.box.y2 = d.box.y1 + 1;
        } else {
          d.box = rand_box(sub);
        }
        d.confidence = sub.uniform(0.01, 1.0);
        dets.push_back(std::move(d));
      }
      if (inst == 0 &&
          failure_injected_for(rec.prefix + "/ap_vs_exhaustive_oracle") &&
          !gts.empty())
        gts[0].box.x2 += 7.0;  // documented corruption hook
      const double got = average_precision_50(dets, gts, 0);
      const double want = oracle::exhaustive_average_precision(dets, gts, 0);
      err = std::max(err, std::abs(got - want));
    }
    rec.add("ap_vs_exhaustive_oracle", err, 1e-12);
  });

  rec.run("ap_monotone_confidence_invariance", [&] {
    SplitMix64 sub = rng.fork();
    double err = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<Detection> dets;
      std::vector<GroundTruth> gts;
      for (int i = 0; i < 3; ++i) gts.push_back({"img0", 0, rand_box(sub)});
      for (int i = 0; i < 5; ++i) {
        Detection d{"img0", 0, rand_box(sub), sub.uniform(0.05, 0.95)};
        if (i < 3 && sub.next_unit() < 0.7) d.box = gts[i].box;
        dets.push_back(std::move(d));
      }
      const double base = average_precision_50(dets, gts, 0);
      for (auto& d : dets) d.confidence = d.confidence * d.confidence * d.confidence;
      err = std::max(err, std::abs(average_precision_50(dets, gts, 0) - base));
    }
    rec.add("ap_monotone_confidence_invariance", err, 0.0);
  });

  rec.run("ap_duplicate_never_increases", [&] {
    SplitMix64 sub = rng.fork();
    bool ok = true;
    for (int rep = 0; rep < 30; ++rep) {
      std::vector<Detection> dets;
      std::vector<GroundTruth> gts;
      for (int i = 0; i < 2; ++i) gts.push_back({"img0", 0, rand_box(sub)});
      dets.push_back({"img0", 0, gts[0].box, 0.9});
      dets.push_back({"img0", 0, rand_box(sub), sub.uniform(0.3, 0.8)});
      const double base = average_precision_50(dets, gts, 0);
      Detection dup{"img0", 0, gts[0].box, 0.1};  // below the matched one
      dets.push_back(std::move(dup));
      ok = ok && average_precision_50(dets, gts, 0) <= base + 1e-15;
    }
    rec.add_bool("ap_duplicate_never_increases", ok);
  });

  rec.run("map50_rejects_bad_class", [&] {
    const Detection det{"img0", 3, {0, 0, 10, 10}, 0.9};
    bool threw = false;
    try {
      map50({&det, 1}, {}, 2);
    } catch (const SpecError&) {
      threw = true;
    }
    rec.add_bool("map50_rejects_bad_class", threw);
  });
}

// --------------------------------------------------------------------------

template <typename T>
void run_suite_t(const std::string& suite, Recorder& rec, std::uint64_t seed) {
  if (suite == "tensor") {
    tensor_suite<T>(rec, seed);
  } else if (suite == "asc") {
    asc_suite<T>(rec, seed);
  } else if (suite == "lksc") {
    lksc_suite<T>(rec, seed);
  } else if (suite == "c2f") {
    c2f_suite<T>(rec, seed);
  } else if (suite == "metrics") {
    metrics_suite(rec, seed);
  }
}

}  // namespace

bool is_known_suite(const std::string& suite) {
  return suite == "all" || suite == "tensor" || suite == "asc" ||
         suite == "lksc" || suite == "c2f" || suite == "metrics";
}

VerifyReport run_verify_suite(const std::string& suite, std::uint64_t seed,
                              DType dtype) {
  if (!is_known_suite(suite))
    throw SpecError("unknown suite '" + suite +
                    "' (expected all|tensor|asc|lksc|c2f|metrics)");
  VerifyReport report;
  report.suite = suite;
  report.dtype = dtype_name(dtype);
  report.seed = seed;
  report.version = kVersion;

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> suites =
      suite == "all"
          ? std::vector<std::string>{"tensor", "asc", "lksc", "c2f", "metrics"}
          : std::vector<std::string>{suite};
  for (const std::string& s : suites) {
    Recorder rec{&report.cases, s, seed};
    if (dtype == DType::f32)
      run_suite_t<float>(s, rec, seed);
    else
      run_suite_t<double>(s, rec, seed);
  }
  report.all_passed = true;
  for (const auto& c : report.cases) report.all_passed &= c.passed;
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return report;
}

std::string verify_report_json(const VerifyReport& r) {
  nlohmann::ordered_json doc;
  doc["format"] = "aslks-verify-report";
  doc["version"] = r.version;
  doc["suite"] = r.suite;
  doc["seed"] = r.seed;
  doc["dtype"] = r.dtype;
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  for (const auto& c : r.cases)
    cases.push_back({{"name", c.name},
                     {"status", c.passed ? "pass" : "fail"},
                     {"max_err", c.max_err},
                     {"tolerance", c.tolerance},
                     {"seed", c.seed}});
  doc["cases"] = std::move(cases);
  doc["all_passed"] = r.all_passed;
  return doc.dump(2) + "\n";
}

}  // namespace aslks
