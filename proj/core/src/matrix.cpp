#include "fastgcrnn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fastgcrnn/errors.hpp"

namespace fastgcrnn {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("from_rows: ragged row lengths");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: incompatible shapes " + a.shape_str() + " x " + b.shape_str());
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Matrix out(m, n);
    const double* ap = a.data();
    const double* bp = b.data();
    double* op = out.data();
    for (std::size_t i = 0; i < m; ++i) {
        double* orow = op + i * n;
        const double* arow = ap + i * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            const double* brow = bp + kk * n;
            for (std::size_t j = 0; j < n; ++j) {
                orow[j] += av * brow[j];
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(j, i) = m(i, j);
        }
    }
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
    return out;
}

Matrix scale(const Matrix& m, double s) {
    Matrix out = m;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
    return out;
}

void add_in_place(Matrix& acc, const Matrix& m) {
    require_same_shape(acc, m, "add_in_place");
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += m.data()[i];
}

void add_scaled_in_place(Matrix& acc, const Matrix& m, double s) {
    require_same_shape(acc, m, "add_scaled_in_place");
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += s * m.data()[i];
}

Matrix add_row_vector(const Matrix& m, const Matrix& row) {
    if (row.rows() != 1 || row.cols() != m.cols()) {
        throw ShapeError("add_row_vector: row " + row.shape_str() + " does not match " +
                         m.shape_str());
    }
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) += row(0, j);
        }
    }
    return out;
}

Matrix column_sums(const Matrix& m) {
    Matrix out(1, m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(0, j) += m(i, j);
        }
    }
    return out;
}

Matrix column(const Matrix& m, std::size_t c) {
    if (c >= m.cols()) {
        throw ShapeError("column: index " + std::to_string(c) + " out of range for " +
                         m.shape_str());
    }
    Matrix out(m.rows(), 1);
    for (std::size_t i = 0; i < m.rows(); ++i) out(i, 0) = m(i, c);
    return out;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m.data()[i] * m.data()[i];
    return std::sqrt(s);
}

double max_abs(const Matrix& m) {
    double mx = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) mx = std::max(mx, std::fabs(m.data()[i]));
    return mx;
}

double relative_error(const Matrix& a, const Matrix& ref) {
    require_same_shape(a, ref, "relative_error");
    const double num = frobenius_norm(sub(a, ref));
    const double den = frobenius_norm(ref);
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

}  // namespace fastgcrnn
