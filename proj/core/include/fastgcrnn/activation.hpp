#pragma once

#include <string>

#include "fastgcrnn/matrix.hpp"

namespace fastgcrnn {

enum class Activation { relu, sigmoid, tanh, linear };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

Matrix apply_activation(Activation a, const Matrix& m);

/// d(post)/d(pre), recovered from the post-activation values.
Matrix activation_grad_from_output(Activation a, const Matrix& out);

}  // namespace fastgcrnn
