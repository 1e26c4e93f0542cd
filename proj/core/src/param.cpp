#include "fastgcrnn/param.hpp"

#include <cmath>

#include "fastgcrnn/errors.hpp"

namespace fastgcrnn {

void Param::zero_grad() {
    for (std::size_t i = 0; i < grad.size(); ++i) grad.data()[i] = 0.0;
}

void zero_grads(const std::vector<Param*>& params) {
    for (Param* p : params) p->zero_grad();
}

double global_grad_norm(const std::vector<Param*>& params) {
    double s = 0.0;
    for (const Param* p : params) {
        for (std::size_t i = 0; i < p->grad.size(); ++i) {
            const double g = p->grad.data()[i];
            s += g * g;
        }
    }
    return std::sqrt(s);
}

void clip_global_grad_norm(const std::vector<Param*>& params, double max_norm) {
    if (max_norm <= 0.0) return;
    const double norm = global_grad_norm(params);
    if (norm <= max_norm) return;
    const double s = max_norm / norm;
    for (Param* p : params) {
        for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad.data()[i] *= s;
    }
}

std::vector<double> flatten_values(const std::vector<Param*>& params) {
    std::vector<double> out;
    for (const Param* p : params) {
        out.insert(out.end(), p->value.data(), p->value.data() + p->value.size());
    }
    return out;
}

void set_values(const std::vector<Param*>& params, const std::vector<double>& theta) {
    std::size_t off = 0;
    for (Param* p : params) {
        if (off + p->value.size() > theta.size()) {
            throw ShapeError("set_values: theta too short for parameter list");
        }
        for (std::size_t i = 0; i < p->value.size(); ++i) p->value.data()[i] = theta[off + i];
        off += p->value.size();
    }
    if (off != theta.size()) throw ShapeError("set_values: theta longer than parameter list");
}

std::vector<double> flatten_grads(const std::vector<Param*>& params) {
    std::vector<double> out;
    for (const Param* p : params) {
        out.insert(out.end(), p->grad.data(), p->grad.data() + p->grad.size());
    }
    return out;
}

}  // namespace fastgcrnn
