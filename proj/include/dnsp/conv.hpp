#pragma once

#include "dnsp/tensor.hpp"

#include <span>
#include <vector>

namespace dnsp {

/// Same-size 2-D cross-correlation with zero padding.
///
/// output[c](y, x) = bias_c + sum_d sum_{i,j} kernel_c(i, j, d) * input[d](y + i - m/2, x + j - n/2)
///
/// Every kernel must have odd spatial size and depth equal to input.depth().
FeatureStack conv2d_same(const FeatureStack& input, std::span<const ConvKernel> kernels);

struct ConvGradients {
    FeatureStack input_grad;          ///< empty when not requested
    std::vector<ConvKernel> kernel_grads; ///< bias field left at 0; see bias_grads
    std::vector<double> bias_grads;
};

/// Adjoint of conv2d_same with respect to input, weights and biases for the
/// upstream gradient of a scalar loss.
ConvGradients conv2d_backward(const FeatureStack& input, std::span<const ConvKernel> kernels,
                              const FeatureStack& upstream_grad, bool want_input_grad = true);

} // namespace dnsp
