#pragma once

#include <utility>
#include <vector>

#include "fastgcrnn/matrix.hpp"

namespace fastgcrnn {

/// Trainable matrix paired with its gradient accumulator.
struct Param {
    Matrix value;
    Matrix grad;

    Param() = default;
    explicit Param(Matrix v) : value(std::move(v)), grad(value.rows(), value.cols()) {}
    Param(std::size_t rows, std::size_t cols) : value(rows, cols), grad(rows, cols) {}

    void zero_grad();
};

void zero_grads(const std::vector<Param*>& params);
double global_grad_norm(const std::vector<Param*>& params);
/// Rescales all grads so the global norm is at most max_norm.
void clip_global_grad_norm(const std::vector<Param*>& params, double max_norm);

std::vector<double> flatten_values(const std::vector<Param*>& params);
void set_values(const std::vector<Param*>& params, const std::vector<double>& theta);
std::vector<double> flatten_grads(const std::vector<Param*>& params);

}  // namespace fastgcrnn
