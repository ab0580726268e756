#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qclust {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// n_samples x n_dims features with one name per column.
struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> dim_names;

    std::size_t n_samples() const { return values.rows(); }
    std::size_t n_dims() const { return values.cols(); }

    /// Throws ArgumentError unless shapes agree, n_samples >= 1 and every entry is finite.
    void validate() const;

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace qclust
