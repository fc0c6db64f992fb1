#include "dnsp/conv.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace dnsp {

namespace {

void check_kernels(const FeatureStack& input, std::span<const ConvKernel> kernels) {
    if (kernels.empty()) {
        throw ConfigError("conv2d: at least one kernel is required");
    }
    for (const ConvKernel& k : kernels) {
        if (k.height % 2 == 0 || k.width % 2 == 0) {
            throw ConfigError("conv2d: kernel size " + std::to_string(k.height) + "x" + std::to_string(k.width) + " is not odd");
        }
        if (k.depth != input.depth()) {
            throw DimensionError("conv2d: kernel depth " + std::to_string(k.depth) + " != input depth " +
                                 std::to_string(input.depth()));
        }
        if (k.weights.size() != k.height * k.width * k.depth) {
            throw DimensionError("conv2d: kernel weight count does not match its shape");
        }
    }
}

// Output positions along one axis for which in = out + offset stays inside [0, extent).
struct Range {
    std::size_t begin;
    std::size_t end;
};

Range valid_range(std::size_t extent, std::ptrdiff_t offset) {
    const auto n = static_cast<std::ptrdiff_t>(extent);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -offset);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - offset);
    if (hi <= lo) {
        return {0, 0};
    }
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

// Flat index of input(y + dy, x + dx) for an output position already known to be valid.
std::size_t source_offset(std::size_t y, std::size_t x, std::ptrdiff_t dy, std::ptrdiff_t dx, std::size_t cols) {
    const auto sy = static_cast<std::ptrdiff_t>(y) + dy;
    const auto sx = static_cast<std::ptrdiff_t>(x) + dx;
    return static_cast<std::size_t>(sy) * cols + static_cast<std::size_t>(sx);
}

} // namespace

FeatureStack conv2d_same(const FeatureStack& input, std::span<const ConvKernel> kernels) {
    check_kernels(input, kernels);
    const std::size_t rows = input.rows();
    const std::size_t cols = input.cols();
    FeatureStack out(rows, cols, kernels.size());

    for (std::size_t c = 0; c < kernels.size(); ++c) {
        const ConvKernel& k = kernels[c];
        const auto rm = static_cast<std::ptrdiff_t>(k.height / 2);
        const auto rn = static_cast<std::ptrdiff_t>(k.width / 2);
        auto dst = out.plane(c);
        std::fill(dst.begin(), dst.end(), k.bias);
        for (std::size_t d = 0; d < input.depth(); ++d) {
            auto src = input.plane(d);
            for (std::size_t i = 0; i < k.height; ++i) {
                const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(i) - rm;
                const Range ry = valid_range(rows, dy);
                for (std::size_t j = 0; j < k.width; ++j) {
                    const double w = k.at(i, j, d);
                    if (w == 0.0) {
                        continue;
                    }
                    const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(j) - rn;
                    const Range rx = valid_range(cols, dx);
                    const std::size_t len = rx.end - rx.begin;
                    for (std::size_t y = ry.begin; y < ry.end; ++y) {
                        double* o = dst.data() + y * cols + rx.begin;
                        const double* s = src.data() + source_offset(y, rx.begin, dy, dx, cols);
                        for (std::size_t x = 0; x < len; ++x) {
                            o[x] += w * s[x];
                        }
                    }
                }
            }
        }
    }
    return out;
}

ConvGradients conv2d_backward(const FeatureStack& input, std::span<const ConvKernel> kernels,
                              const FeatureStack& upstream_grad, bool want_input_grad) {
    check_kernels(input, kernels);
    if (upstream_grad.rows() != input.rows() || upstream_grad.cols() != input.cols() ||
        upstream_grad.depth() != kernels.size()) {
        throw DimensionError("conv2d_backward: upstream gradient shape does not match convolution output");
    }
    const std::size_t rows = input.rows();
    const std::size_t cols = input.cols();

    ConvGradients g;
    if (want_input_grad) {
        g.input_grad = FeatureStack(rows, cols, input.depth());
    }
    g.kernel_grads.reserve(kernels.size());
    g.bias_grads.resize(kernels.size(), 0.0);
    std::vector<double> partial(cols);

    for (std::size_t c = 0; c < kernels.size(); ++c) {
        const ConvKernel& k = kernels[c];
        ConvKernel kg(k.height, k.width, k.depth);
        const auto rm = static_cast<std::ptrdiff_t>(k.height / 2);
        const auto rn = static_cast<std::ptrdiff_t>(k.width / 2);
        auto up = upstream_grad.plane(c);

        double bsum = 0.0;
        for (double v : up) {
            bsum += v;
        }
        g.bias_grads[c] = bsum;

        for (std::size_t d = 0; d < input.depth(); ++d) {
            auto src = input.plane(d);
            for (std::size_t i = 0; i < k.height; ++i) {
                const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(i) - rm;
                const Range ry = valid_range(rows, dy);
                for (std::size_t j = 0; j < k.width; ++j) {
                    const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(j) - rn;
                    const Range rx = valid_range(cols, dx);
                    const double w = k.at(i, j, d);
                    const std::size_t len = rx.end - rx.begin;
                    // Column-wise partial sums vectorize without reassociating the reduction.
                    std::fill_n(partial.begin(), len, 0.0);
                    for (std::size_t y = ry.begin; y < ry.end; ++y) {
                        const double* u = up.data() + y * cols + rx.begin;
                        const std::size_t offset = source_offset(y, rx.begin, dy, dx, cols);
                        const double* s = src.data() + offset;
                        double* acc = partial.data();
                        for (std::size_t x = 0; x < len; ++x) {
                            acc[x] += u[x] * s[x];
                        }
                        if (want_input_grad && w != 0.0) {
                            double* ig = g.input_grad.plane(d).data() + offset;
                            for (std::size_t x = 0; x < len; ++x) {
                                ig[x] += w * u[x];
                            }
                        }
                    }
                    double total = 0.0;
                    for (std::size_t x = 0; x < len; ++x) {
                        total += partial[x];
                    }
                    kg.at(i, j, d) = total;
                }
            }
        }
        g.kernel_grads.push_back(std::move(kg));
    }
    return g;
}

} // namespace dnsp
