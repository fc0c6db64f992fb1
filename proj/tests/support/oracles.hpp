#pragma once

// Independent reference implementations used only by the test suites.

#include "dnsp/metrics.hpp"
#include "dnsp/network.hpp"
#include "dnsp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace dnsp::testing {

inline ImageMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    ImageMatrix m(rows, cols);
    for (double& v : m.data()) {
        v = u(rng);
    }
    return m;
}

inline FeatureStack random_stack(std::size_t rows, std::size_t cols, std::size_t depth, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    FeatureStack s(rows, cols, depth);
    for (double& v : s.data()) {
        v = u(rng);
    }
    return s;
}

inline ConvKernel random_kernel(std::size_t m, std::size_t n, std::size_t d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ConvKernel k(m, n, d);
    for (double& w : k.weights) {
        w = u(rng);
    }
    k.bias = u(rng);
    return k;
}

/// Straight quadruple loop over (channel, y, x, kernel taps) with explicit bounds checks.
inline FeatureStack reference_conv(const FeatureStack& in, const std::vector<ConvKernel>& kernels) {
    FeatureStack out(in.rows(), in.cols(), kernels.size());
    for (std::size_t c = 0; c < kernels.size(); ++c) {
        const ConvKernel& k = kernels[c];
        const long rm = static_cast<long>(k.height / 2);
        const long rn = static_cast<long>(k.width / 2);
        for (long y = 0; y < static_cast<long>(in.rows()); ++y) {
            for (long x = 0; x < static_cast<long>(in.cols()); ++x) {
                double acc = k.bias;
                for (std::size_t d = 0; d < in.depth(); ++d) {
                    for (long i = 0; i < static_cast<long>(k.height); ++i) {
                        for (long j = 0; j < static_cast<long>(k.width); ++j) {
                            const long sy = y + i - rm;
                            const long sx = x + j - rn;
                            if (sy < 0 || sx < 0 || sy >= static_cast<long>(in.rows()) || sx >= static_cast<long>(in.cols())) {
                                continue;
                            }
                            acc += k.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j), d) *
                                   in(d, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
                        }
                    }
                }
                out(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = acc;
            }
        }
    }
    return out;
}

/// Forward pass written out layer by layer without the library's conv routine.
inline ImageMatrix reference_forward(const ImageMatrix& x, const NetworkParams& params) {
    FeatureStack cur(x);
    for (const Layer& layer : params.layers) {
        cur = reference_conv(cur, layer.kernels);
        if (layer.spec.activation == Activation::relu) {
            for (double& v : cur.data()) {
                v = std::max(v, 0.0);
            }
        }
    }
    return cur.to_image(0);
}

/// Central difference of f at every coordinate of `point` (mutated and restored in place).
inline std::vector<double> central_differences(std::vector<double*> coords, const std::function<double()>& f, double h = 1e-5) {
    std::vector<double> out;
    out.reserve(coords.size());
    for (double* p : coords) {
        const double saved = *p;
        *p = saved + h;
        const double up = f();
        *p = saved - h;
        const double down = f();
        *p = saved;
        out.push_back((up - down) / (2.0 * h));
    }
    return out;
}

inline std::vector<double*> coords_of(ImageMatrix& m) {
    std::vector<double*> out;
    for (double& v : m.data()) {
        out.push_back(&v);
    }
    return out;
}

inline std::vector<double> values_of(const ImageMatrix& m) { return {m.data().begin(), m.data().end()}; }

/// max_i |a_i - b_i| / max_i |b_i|: error relative to the reference gradient's scale.
inline double relative_error(const std::vector<double>& analytic, const std::vector<double>& reference) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        num = std::max(num, std::abs(analytic[i] - reference[i]));
        den = std::max(den, std::abs(reference[i]));
    }
    if (den == 0.0) {
        return num;
    }
    return num / den;
}

// Direct evaluation of every window with explicit 2-D Gaussian weights.
inline double reference_ssim(const ImageMatrix& a, const ImageMatrix& b, const MetricConfig& cfg) {
    const std::size_t w = cfg.ssim_window;
    const double half = static_cast<double>(w / 2);
    std::vector<double> weights(w * w);
    double norm = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            const double y = static_cast<double>(i) - half;
            const double x = static_cast<double>(j) - half;
            weights[i * w + j] = std::exp(-(x * x + y * y) / (2.0 * cfg.ssim_sigma * cfg.ssim_sigma));
            norm += weights[i * w + j];
        }
    }
    const double c1 = std::pow(cfg.k1 * cfg.dynamic_range, 2);
    const double c2 = std::pow(cfg.k2 * cfg.dynamic_range, 2);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r + w <= a.rows(); ++r) {
        for (std::size_t c = 0; c + w <= a.cols(); ++c) {
            double ma = 0.0;
            double mb = 0.0;
            for (std::size_t i = 0; i < w; ++i) {
                for (std::size_t j = 0; j < w; ++j) {
                    const double wt = weights[i * w + j] / norm;
                    ma += wt * a(r + i, c + j);
                    mb += wt * b(r + i, c + j);
                }
            }
            double va = 0.0;
            double vb = 0.0;
            double cov = 0.0;
            for (std::size_t i = 0; i < w; ++i) {
                for (std::size_t j = 0; j < w; ++j) {
                    const double wt = weights[i * w + j] / norm;
                    const double da = a(r + i, c + j) - ma;
                    const double db = b(r + i, c + j) - mb;
                    va += wt * da * da;
                    vb += wt * db * db;
                    cov += wt * da * db;
                }
            }
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

} // namespace dnsp::testing
