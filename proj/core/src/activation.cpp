#include "fastgcrnn/activation.hpp"

#include <cmath>

#include "fastgcrnn/errors.hpp"

namespace fastgcrnn {

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    if (name == "linear") return Activation::linear;
    throw InputError("unknown activation: " + name);
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::tanh: return "tanh";
        case Activation::linear: return "linear";
    }
    throw InputError("unknown activation enum value");
}

Matrix apply_activation(Activation a, const Matrix& m) {
    if (a == Activation::linear) return m;
    Matrix out = m;
    double* p = out.data();
    switch (a) {
        case Activation::relu:
            for (std::size_t i = 0; i < out.size(); ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
            break;
        case Activation::sigmoid:
            for (std::size_t i = 0; i < out.size(); ++i) p[i] = 1.0 / (1.0 + std::exp(-p[i]));
            break;
        case Activation::tanh:
            for (std::size_t i = 0; i < out.size(); ++i) p[i] = std::tanh(p[i]);
            break;
        case Activation::linear:
            break;
    }
    return out;
}

Matrix activation_grad_from_output(Activation a, const Matrix& out) {
    Matrix g(out.rows(), out.cols());
    const double* o = out.data();
    double* p = g.data();
    switch (a) {
        case Activation::relu:
            for (std::size_t i = 0; i < g.size(); ++i) p[i] = o[i] > 0.0 ? 1.0 : 0.0;
            break;
        case Activation::sigmoid:
            for (std::size_t i = 0; i < g.size(); ++i) p[i] = o[i] * (1.0 - o[i]);
            break;
        case Activation::tanh:
            for (std::size_t i = 0; i < g.size(); ++i) p[i] = 1.0 - o[i] * o[i];
            break;
        case Activation::linear:
            for (std::size_t i = 0; i < g.size(); ++i) p[i] = 1.0;
            break;
    }
    return g;
}

}  // namespace fastgcrnn
