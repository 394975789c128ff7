#include "imtl/nn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "imtl/errors.hpp"

namespace imtl::nn {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
        throw ConfigError("matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " given " + std::to_string(values_.size()) + " values");
    }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> values;
    values.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ConfigError("ragged matrix literal");
        values.insert(values.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(values));
}

Matrix Matrix::row_vector(std::span<const double> values) {
    return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

void Matrix::fill(double v) {
    std::fill(values_.begin(), values_.end(), v);
}

bool Matrix::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Matrix slice_rows(const Matrix& m, std::size_t begin, std::size_t count) {
    if (begin + count > m.rows()) throw ConfigError("row slice out of range");
    Matrix out(count, m.cols());
    for (std::size_t r = 0; r < count; ++r) {
        std::copy_n(m.row(begin + r).begin(), m.cols(), out.row(r).begin());
    }
    return out;
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ConfigError("hconcat row mismatch");
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto dst = out.row(r);
        std::copy_n(a.row(r).begin(), a.cols(), dst.begin());
        std::copy_n(b.row(r).begin(), b.cols(), dst.begin() + static_cast<std::ptrdiff_t>(a.cols()));
    }
    return out;
}

}  // namespace imtl::nn
