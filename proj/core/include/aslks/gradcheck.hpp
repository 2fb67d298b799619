#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace aslks {

struct GradCheckReport {
  std::string op_name;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  double step = 0.0;
};

using ScalarFn = std::function<double(std::span<const double>)>;
using GradFn = std::function<std::vector<double>(std::span<const double>)>;

// Central differences (f(t+h e_i) - f(t-h e_i)) / (2h) per coordinate.
// Gradient checks always run at f64.
std::vector<double> finite_diff_grad(const ScalarFn& f,
                                     std::span<const double> theta,
                                     double step);

// max_rel_err = max_i |fd_i - an_i| / max(1e-12, |fd_i| + |an_i|).
GradCheckReport grad_check(const std::string& op_name, const ScalarFn& forward,
                           const GradFn& analytic,
                           std::span<const double> theta, double tol,
                           double step = 1e-6);

}  // namespace aslks
