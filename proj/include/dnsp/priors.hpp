#pragma once

#include "dnsp/svd.hpp"
#include "dnsp/tensor.hpp"

#include <array>

namespace dnsp {

/// Width of the Gaussian g(x) = exp(-x^2 / (2 delta^2)) applied to each singular value.
struct RankSurrogateParams {
    double delta = 0.01;

    explicit RankSurrogateParams(double d = 0.01);
};

/// The fixed 3x3 Laplacian stencil [[0,-1,0],[-1,4,-1],[0,-1,0]].
struct LaplacianKernel {
    static constexpr std::array<std::array<double, 3>, 3> weights{{{0.0, -1.0, 0.0}, {-1.0, 4.0, -1.0}, {0.0, -1.0, 0.0}}};
};

/// Smooth rank surrogate R - sum_i exp(-sigma_i^2 / (2 delta^2)), R = min(rows, cols).
double smooth_rank(const ImageMatrix& y, const RankSurrogateParams& params);

/// Gradient of smooth_rank with respect to y:
/// U diag(sigma_i / delta^2 * exp(-sigma_i^2 / (2 delta^2))) Z^T.
ImageMatrix smooth_rank_gradient(const ImageMatrix& y, const RankSurrogateParams& params);

/// Same as smooth_rank_gradient but reuses an existing decomposition of y.
ImageMatrix smooth_rank_gradient(const SvdFactors& factors, const RankSurrogateParams& params);
double smooth_rank(std::span<const double> sigma, const RankSurrogateParams& params);

/// Same-size zero-padded correlation with the Laplacian stencil. Needs at least 3x3.
ImageMatrix laplacian(const ImageMatrix& y);

/// Variance of the Laplacian with the unbiased (n - 1) denominator, n = rows * cols.
double sharpness(const ImageMatrix& y);

/// dV/dY. The zero-padded Laplacian is self-adjoint (the stencil is symmetric),
/// so the gradient is laplacian(2 / (n - 1) * (P - mean(P))) with P = laplacian(y).
ImageMatrix sharpness_gradient(const ImageMatrix& y);

} // namespace dnsp
