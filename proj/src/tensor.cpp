#include "dnsp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dnsp {

ImageMatrix::ImageMatrix(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("ImageMatrix: rows and cols must be positive");
    }
}

ImageMatrix::ImageMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("ImageMatrix: rows and cols must be positive");
    }
    if (data_.size() != rows * cols) {
        throw DimensionError("ImageMatrix: data length " + std::to_string(data_.size()) + " != " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
}

ImageMatrix ImageMatrix::identity(std::size_t n) {
    ImageMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

ImageMatrix ImageMatrix::diagonal(std::span<const double> values) {
    ImageMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        m(i, i) = values[i];
    }
    return m;
}

ImageMatrix ImageMatrix::transposed() const {
    ImageMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

ImageMatrix ImageMatrix::crop(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const {
    if (r0 + rows > rows_ || c0 + cols > cols_) {
        throw DimensionError("ImageMatrix::crop: rectangle exceeds image bounds");
    }
    ImageMatrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((r0 + r) * cols_ + c0), cols, out.row(r).begin());
    }
    return out;
}

bool ImageMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(const ImageMatrix& m, const char* what) {
    if (!m.all_finite()) {
        throw NumericError(std::string(what) + ": input contains non-finite values");
    }
}

void require_same_shape(const ImageMatrix& a, const ImageMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
}

ImageMatrix operator+(const ImageMatrix& a, const ImageMatrix& b) {
    require_same_shape(a, b, "operator+");
    ImageMatrix out = a;
    auto dst = out.data();
    auto src = b.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += src[i];
    }
    return out;
}

ImageMatrix operator-(const ImageMatrix& a, const ImageMatrix& b) {
    require_same_shape(a, b, "operator-");
    ImageMatrix out = a;
    auto dst = out.data();
    auto src = b.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] -= src[i];
    }
    return out;
}

ImageMatrix operator*(double s, const ImageMatrix& a) {
    ImageMatrix out = a;
    for (double& v : out.data()) {
        v *= s;
    }
    return out;
}

ImageMatrix matmul(const ImageMatrix& a, const ImageMatrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions differ");
    }
    ImageMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto dst = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            auto src = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                dst[j] += aik * src[j];
            }
        }
    }
    return out;
}

double frobenius_dot(const ImageMatrix& a, const ImageMatrix& b) {
    require_same_shape(a, b, "frobenius_dot");
    double acc = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += x[i] * y[i];
    }
    return acc;
}

double max_abs(const ImageMatrix& a) {
    double m = 0.0;
    for (double v : a.data()) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

FeatureStack::FeatureStack(std::size_t rows, std::size_t cols, std::size_t depth, double fill)
    : rows_(rows), cols_(cols), depth_(depth), data_(rows * cols * depth, fill) {
    if (rows == 0 || cols == 0 || depth == 0) {
        throw DimensionError("FeatureStack: rows, cols and depth must be positive");
    }
}

FeatureStack::FeatureStack(const ImageMatrix& plane) : FeatureStack(plane.rows(), plane.cols(), 1) {
    std::copy(plane.data().begin(), plane.data().end(), data_.begin());
}

ImageMatrix FeatureStack::to_image(std::size_t d) const {
    if (d >= depth_) {
        throw DimensionError("FeatureStack::to_image: plane index out of range");
    }
    auto p = plane(d);
    return {rows_, cols_, std::vector<double>(p.begin(), p.end())};
}

bool FeatureStack::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ConvKernel::ConvKernel(std::size_t m, std::size_t n, std::size_t d, double fill, double b)
    : height(m), width(n), depth(d), weights(m * n * d, fill), bias(b) {
    if (m == 0 || n == 0 || d == 0) {
        throw DimensionError("ConvKernel: dimensions must be positive");
    }
}

} // namespace dnsp
