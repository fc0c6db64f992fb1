#include "dnsp/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

namespace dnsp {

void MetricConfig::validate() const {
    if (!(dynamic_range > 0.0)) {
        throw ConfigError("metrics: dynamic_range must be positive");
    }
    if (ssim_window < 3 || ssim_window % 2 == 0) {
        throw ConfigError("metrics: ssim_window must be odd and >= 3");
    }
    if (!(ssim_sigma > 0.0) || !(k1 > 0.0) || !(k2 > 0.0)) {
        throw ConfigError("metrics: ssim_sigma, k1 and k2 must be positive");
    }
}

double psnr(const ImageMatrix& a, const ImageMatrix& b, const MetricConfig& cfg) {
    require_same_shape(a, b, "psnr");
    cfg.validate();
    double se = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        se += d * d;
    }
    if (se == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double mse = se / static_cast<double>(x.size());
    return 10.0 * std::log10(cfg.dynamic_range * cfg.dynamic_range / mse);
}

namespace {

// Valid-mode separable correlation with a 1-D kernel along both axes.
ImageMatrix filter_valid(const ImageMatrix& img, const std::vector<double>& k) {
    const std::size_t w = k.size();
    const std::size_t out_rows = img.rows() - w + 1;
    const std::size_t out_cols = img.cols() - w + 1;
    ImageMatrix tmp(img.rows(), out_cols);
    for (std::size_t r = 0; r < img.rows(); ++r) {
        auto src = img.row(r);
        auto dst = tmp.row(r);
        for (std::size_t c = 0; c < out_cols; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < w; ++t) {
                acc += k[t] * src[c + t];
            }
            dst[c] = acc;
        }
    }
    ImageMatrix out(out_rows, out_cols);
    for (std::size_t r = 0; r < out_rows; ++r) {
        auto dst = out.row(r);
        for (std::size_t t = 0; t < w; ++t) {
            auto src = tmp.row(r + t);
            for (std::size_t c = 0; c < out_cols; ++c) {
                dst[c] += k[t] * src[c];
            }
        }
    }
    return out;
}

ImageMatrix product(const ImageMatrix& a, const ImageMatrix& b) {
    ImageMatrix out = a;
    auto o = out.data();
    auto y = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] *= y[i];
    }
    return out;
}

} // namespace

double ssim(const ImageMatrix& a, const ImageMatrix& b, const MetricConfig& cfg) {
    require_same_shape(a, b, "ssim");
    cfg.validate();
    if (a.rows() < cfg.ssim_window || a.cols() < cfg.ssim_window) {
        throw DimensionError("ssim: image " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " is smaller than the " + std::to_string(cfg.ssim_window) + "px window");
    }
    std::vector<double> k(cfg.ssim_window);
    const auto half = static_cast<double>(cfg.ssim_window / 2);
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double x = static_cast<double>(i) - half;
        k[i] = std::exp(-(x * x) / (2.0 * cfg.ssim_sigma * cfg.ssim_sigma));
        sum += k[i];
    }
    for (double& v : k) {
        v /= sum;
    }

    const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
    const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);
    const ImageMatrix mu_a = filter_valid(a, k);
    const ImageMatrix mu_b = filter_valid(b, k);
    const ImageMatrix e_aa = filter_valid(product(a, a), k);
    const ImageMatrix e_bb = filter_valid(product(b, b), k);
    const ImageMatrix e_ab = filter_valid(product(a, b), k);

    double total = 0.0;
    const std::size_t n = mu_a.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double ma = mu_a.data()[i];
        const double mb = mu_b.data()[i];
        const double va = e_aa.data()[i] - ma * ma;
        const double vb = e_bb.data()[i] - mb * mb;
        const double cov = e_ab.data()[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(n);
}

std::string format_metric(double v, int precision) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (std::isnan(v)) {
        return "nan";
    }
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(precision) << v;
    return ss.str();
}

} // namespace dnsp
