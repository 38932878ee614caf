#include "mixintent/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mixintent/error.hpp"

namespace mixintent {

DenseVector finite_diff_grad(const ScalarObjective& f, std::span<const double> theta, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite_diff_grad: step must be positive");
  std::vector<double> probe(theta.begin(), theta.end());
  DenseVector grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const double plus = f(probe);
    probe[i] = theta[i] - h;
    const double minus = f(probe);
    probe[i] = theta[i];
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericError("finite_diff_grad: objective is not finite near coordinate " + std::to_string(i));
    }
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

GradCheckResult compare_gradients(std::span<const double> analytic, std::span<const double> numeric,
                                  double tolerance, double floor) {
  require_same_size(analytic.size(), numeric.size(), "compare_gradients");
  GradCheckResult result;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric[i]), floor});
    const double rel = std::fabs(analytic[i] - numeric[i]) / denom;
    if (!(rel <= result.max_relative_error)) {
      result.max_relative_error = rel;
      result.worst_index = i;
    }
  }
  result.passed = result.max_relative_error <= tolerance;
  return result;
}

GradCheckResult check_gradient(const ScalarObjective& f, std::span<const double> analytic,
                               std::span<const double> theta, double tolerance, double h) {
  const DenseVector numeric = finite_diff_grad(f, theta, h);
  // Central differences carry roundoff of about eps * |f| / h; coordinates
  // whose gradient sits below 1e5 times that are compared absolutely.
  const double noise = std::numeric_limits<double>::epsilon() * std::fabs(f(theta)) / h;
  return compare_gradients(analytic, numeric.span(), tolerance, std::max(1e-7, 1e5 * noise));
}

}  // namespace mixintent
