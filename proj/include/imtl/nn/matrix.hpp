#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace imtl::nn {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Throws ConfigError unless values.size() == rows * cols.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix row_vector(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    void fill(double v);
    bool all_finite() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Rows [begin, begin + count) copied into a new matrix.
Matrix slice_rows(const Matrix& m, std::size_t begin, std::size_t count);
/// Horizontal concatenation [a : b]; row counts must agree.
Matrix hconcat(const Matrix& a, const Matrix& b);

}  // namespace imtl::nn
