#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace fastgcrnn {

/// Dense row-major matrix of 64-bit floats.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    std::string shape_str() const;

    bool all_finite() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a (m x k) times b (k x n). Each output entry accumulates terms in
/// ascending k order, so results are bit-reproducible run to run.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);
void add_in_place(Matrix& acc, const Matrix& m);
void add_scaled_in_place(Matrix& acc, const Matrix& m, double s);

/// Adds a 1 x cols row vector to every row of m.
Matrix add_row_vector(const Matrix& m, const Matrix& row);
/// 1 x cols vector of column sums.
Matrix column_sums(const Matrix& m);
/// Copy of one column as an n x 1 matrix.
Matrix column(const Matrix& m, std::size_t c);

double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
/// ||a - ref||_F / ||ref||_F, with 0/0 -> 0.
double relative_error(const Matrix& a, const Matrix& ref);

void require_same_shape(const Matrix& a, const Matrix& b, const char* op);

}  // namespace fastgcrnn
