#include "fastgcrnn/grad_check.hpp"

#include <cmath>

#include "fastgcrnn/errors.hpp"

namespace fastgcrnn {

std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> theta, double eps) {
    if (!(eps > 0.0)) throw NumericError("finite_diff_grad: eps must be positive");
    std::vector<double> grad(theta.size(), 0.0);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double orig = theta[i];
        theta[i] = orig + eps;
        const double f_plus = f(theta);
        theta[i] = orig - eps;
        const double f_minus = f(theta);
        theta[i] = orig;
        if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
            throw NumericError("finite_diff_grad: non-finite function value at coordinate " +
                               std::to_string(i));
        }
        grad[i] = (f_plus - f_minus) / (2.0 * eps);
    }
    return grad;
}

double max_relative_diff(const std::vector<double>& a, const std::vector<double>& b,
                         double floor) {
    if (a.size() != b.size()) {
        throw ShapeError("max_relative_diff: length mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double den = std::max({std::fabs(a[i]), std::fabs(b[i]), floor});
        worst = std::max(worst, std::fabs(a[i] - b[i]) / den);
    }
    return worst;
}

}  // namespace fastgcrnn
