#pragma once

#include <functional>
#include <span>

#include "mixintent/numerics.hpp"

namespace mixintent {

using ScalarObjective = std::function<double(std::span<const double>)>;

// Central differences (f(t + h e_i) - f(t - h e_i)) / 2h per coordinate.
// Throws NumericError if any evaluation is non-finite.
DenseVector finite_diff_grad(const ScalarObjective& f, std::span<const double> theta, double h = 1e-5);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  bool passed = false;
};

// Relative error per coordinate is |a - n| / max(|a|, |n|, floor); the floor
// keeps coordinates whose true gradient is ~0 from dominating on roundoff.
GradCheckResult compare_gradients(std::span<const double> analytic, std::span<const double> numeric,
                                  double tolerance = 1e-4, double floor = 1e-7);

// Uses a floor of max(1e-7, 1e5 * eps * |f(theta)| / h), i.e. well above the
// roundoff of the central difference itself.
GradCheckResult check_gradient(const ScalarObjective& f, std::span<const double> analytic,
                               std::span<const double> theta, double tolerance = 1e-4, double h = 1e-5);

}  // namespace mixintent
