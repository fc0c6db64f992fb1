#include "dnsp/priors.hpp"

#include <cmath>
#include <string>

namespace dnsp {

RankSurrogateParams::RankSurrogateParams(double d) : delta(d) {
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw ConfigError("rank surrogate: delta must be positive, got " + std::to_string(d));
    }
}

double smooth_rank(std::span<const double> sigma, const RankSurrogateParams& params) {
    const double two_d2 = 2.0 * params.delta * params.delta;
    double g = 0.0;
    for (double s : sigma) {
        g += std::exp(-(s * s) / two_d2);
    }
    return static_cast<double>(sigma.size()) - g;
}

double smooth_rank(const ImageMatrix& y, const RankSurrogateParams& params) {
    const std::vector<double> sigma = singular_values(y);
    return smooth_rank(sigma, params);
}

ImageMatrix smooth_rank_gradient(const SvdFactors& f, const RankSurrogateParams& params) {
    const double d2 = params.delta * params.delta;
    const std::size_t r = f.sigma.size();
    // Inner diagonal as written, -sigma/delta^2 * g(sigma); the outer negation flips it back.
    std::vector<double> inner(r);
    for (std::size_t k = 0; k < r; ++k) {
        const double s = f.sigma[k];
        inner[k] = -(s / d2) * std::exp(-(s * s) / (2.0 * d2));
    }
    ImageMatrix grad(f.u.rows(), f.z.rows());
    for (std::size_t i = 0; i < grad.rows(); ++i) {
        auto out = grad.row(i);
        for (std::size_t k = 0; k < r; ++k) {
            const double coef = -(f.u(i, k) * inner[k]);
            if (coef == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < out.size(); ++j) {
                out[j] += coef * f.z(j, k);
            }
        }
    }
    return grad;
}

ImageMatrix smooth_rank_gradient(const ImageMatrix& y, const RankSurrogateParams& params) {
    return smooth_rank_gradient(svd(y), params);
}

ImageMatrix laplacian(const ImageMatrix& y) {
    if (y.rows() < 3 || y.cols() < 3) {
        throw DimensionError("laplacian: image must be at least 3x3, got " + std::to_string(y.rows()) + "x" +
                             std::to_string(y.cols()));
    }
    const std::size_t rows = y.rows();
    const std::size_t cols = y.cols();
    ImageMatrix p(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            double v = 4.0 * y(r, c);
            if (r > 0) {
                v -= y(r - 1, c);
            }
            if (r + 1 < rows) {
                v -= y(r + 1, c);
            }
            if (c > 0) {
                v -= y(r, c - 1);
            }
            if (c + 1 < cols) {
                v -= y(r, c + 1);
            }
            p(r, c) = v;
        }
    }
    return p;
}

double sharpness(const ImageMatrix& y) {
    const ImageMatrix p = laplacian(y);
    const auto n = static_cast<double>(p.size());
    double mean = 0.0;
    for (double v : p.data()) {
        mean += v;
    }
    mean /= n;
    double ss = 0.0;
    for (double v : p.data()) {
        ss += (v - mean) * (v - mean);
    }
    return ss / (n - 1.0);
}

ImageMatrix sharpness_gradient(const ImageMatrix& y) {
    ImageMatrix p = laplacian(y);
    const auto n = static_cast<double>(p.size());
    double mean = 0.0;
    for (double v : p.data()) {
        mean += v;
    }
    mean /= n;
    const double scale = 2.0 / (n - 1.0);
    for (double& v : p.data()) {
        v = scale * (v - mean);
    }
    return laplacian(p);
}

} // namespace dnsp
