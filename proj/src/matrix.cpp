#include "qclust/matrix.hpp"

#include <cmath>

#include "qclust/errors.hpp"

namespace qclust {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ArgumentError("matrix data size does not match " + std::to_string(rows_) + "x" +
                            std::to_string(cols_));
    }
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void FeatureMatrix::validate() const {
    if (values.rows() < 1) throw ArgumentError("feature matrix has no samples");
    if (dim_names.size() != values.cols()) {
        throw ArgumentError("feature matrix has " + std::to_string(values.cols()) + " columns but " +
                            std::to_string(dim_names.size()) + " names");
    }
    if (!values.all_finite()) throw ArgumentError("feature matrix contains non-finite entries");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace qclust
