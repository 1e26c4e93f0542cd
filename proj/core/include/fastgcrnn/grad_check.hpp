#pragma once

#include <functional>
#include <vector>

namespace fastgcrnn {

/// Central differences (f(theta + eps*e_i) - f(theta - eps*e_i)) / (2*eps)
/// per coordinate. f must be deterministic for fixed theta; a non-finite
/// f value raises NumericError.
std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> theta, double eps);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
double max_relative_diff(const std::vector<double>& a, const std::vector<double>& b,
                         double floor = 1e-6);

}  // namespace fastgcrnn
