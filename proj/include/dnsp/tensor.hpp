#pragma once

#include "dnsp/error.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dnsp {

/// Dense row-major 2-D grid of doubles. Grayscale images live in [0, 1].
class ImageMatrix {
public:
    ImageMatrix() = default;
    ImageMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    ImageMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static ImageMatrix identity(std::size_t n);
    static ImageMatrix diagonal(std::span<const double> values);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    [[nodiscard]] ImageMatrix transposed() const;
    /// Copy of the rectangle starting at (r0, c0).
    [[nodiscard]] ImageMatrix crop(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const;
    [[nodiscard]] bool all_finite() const noexcept;

    friend bool operator==(const ImageMatrix&, const ImageMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Throws NumericError naming `what` if any element is NaN or Inf.
void require_finite(const ImageMatrix& m, const char* what);
/// Throws DimensionError unless both operands have the same shape.
void require_same_shape(const ImageMatrix& a, const ImageMatrix& b, const char* what);

ImageMatrix operator+(const ImageMatrix& a, const ImageMatrix& b);
ImageMatrix operator-(const ImageMatrix& a, const ImageMatrix& b);
ImageMatrix operator*(double s, const ImageMatrix& a);
ImageMatrix matmul(const ImageMatrix& a, const ImageMatrix& b);
/// Sum of elementwise products of two equal-shaped matrices.
double frobenius_dot(const ImageMatrix& a, const ImageMatrix& b);
double max_abs(const ImageMatrix& a);

/// Depth-major stack of equally sized planes: data[(d * rows + r) * cols + c].
class FeatureStack {
public:
    FeatureStack() = default;
    FeatureStack(std::size_t rows, std::size_t cols, std::size_t depth, double fill = 0.0);
    explicit FeatureStack(const ImageMatrix& plane);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t depth() const noexcept { return depth_; }
    [[nodiscard]] std::size_t plane_size() const noexcept { return rows_ * cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t d, std::size_t r, std::size_t c) noexcept { return data_[(d * rows_ + r) * cols_ + c]; }
    double operator()(std::size_t d, std::size_t r, std::size_t c) const noexcept { return data_[(d * rows_ + r) * cols_ + c]; }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<double> plane(std::size_t d) noexcept { return {data_.data() + d * plane_size(), plane_size()}; }
    [[nodiscard]] std::span<const double> plane(std::size_t d) const noexcept { return {data_.data() + d * plane_size(), plane_size()}; }

    /// Copies plane `d` out as an image.
    [[nodiscard]] ImageMatrix to_image(std::size_t d = 0) const;
    [[nodiscard]] bool all_finite() const noexcept;

    friend bool operator==(const FeatureStack&, const FeatureStack&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t depth_ = 0;
    std::vector<double> data_;
};

/// One convolution filter of shape height x width x depth plus its bias.
/// Weights are stored row-major over (row, col, channel), channel fastest.
struct ConvKernel {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t depth = 0;
    std::vector<double> weights;
    double bias = 0.0;

    ConvKernel() = default;
    ConvKernel(std::size_t m, std::size_t n, std::size_t d, double fill = 0.0, double b = 0.0);

    double& at(std::size_t i, std::size_t j, std::size_t ch) noexcept { return weights[(i * width + j) * depth + ch]; }
    [[nodiscard]] double at(std::size_t i, std::size_t j, std::size_t ch) const noexcept {
        return weights[(i * width + j) * depth + ch];
    }

    friend bool operator==(const ConvKernel&, const ConvKernel&) = default;
};

} // namespace dnsp
