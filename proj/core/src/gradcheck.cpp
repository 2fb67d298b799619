#include "aslks/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "aslks/common.hpp"

namespace aslks {

std::vector<double> finite_diff_grad(const ScalarFn& f,
                                     std::span<const double> theta,
                                     double step) {
  if (step <= 0.0) throw SpecError("finite_diff_grad: step must be > 0");
  std::vector<double> probe(theta.begin(), theta.end());
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double fp = f(probe);
    probe[i] = orig - step;
    const double fm = f(probe);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("finite_diff_grad: non-finite function value at coordinate " +
                         std::to_string(i));
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

GradCheckReport grad_check(const std::string& op_name, const ScalarFn& forward,
                           const GradFn& analytic,
                           std::span<const double> theta, double tol,
                           double step) {
  if (tol <= 0.0) throw SpecError("grad_check: tol must be > 0");
  const std::vector<double> fd = finite_diff_grad(forward, theta, step);
  const std::vector<double> an = analytic(theta);
  if (an.size() != fd.size())
    throw ShapeError("grad_check: analytic gradient has " +
                     std::to_string(an.size()) + " entries, expected " +
                     std::to_string(fd.size()));
  double max_rel = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    if (!std::isfinite(an[i]))
      throw NumericError("grad_check: non-finite analytic gradient at coordinate " +
                         std::to_string(i));
    const double denom = std::max(1e-12, std::abs(fd[i]) + std::abs(an[i]));
    max_rel = std::max(max_rel, std::abs(fd[i] - an[i]) / denom);
  }
  GradCheckReport r;
  r.op_name = op_name;
  r.max_rel_err = max_rel;
  r.tolerance = tol;
  r.passed = max_rel <= tol;
  r.step = step;
  return r;
}

}  // namespace aslks
