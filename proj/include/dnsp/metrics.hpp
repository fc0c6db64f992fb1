#pragma once

#include "dnsp/tensor.hpp"

#include <string>

namespace dnsp {

struct MetricConfig {
    double dynamic_range = 1.0;
    std::size_t ssim_window = 11;
    double ssim_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;

    void validate() const;
};

/// 10 log10(range^2 / mse) in dB; +infinity for identical images.
double psnr(const ImageMatrix& a, const ImageMatrix& b, const MetricConfig& cfg = {});

/// Mean SSIM over all valid (unpadded) Gaussian-weighted windows.
double ssim(const ImageMatrix& a, const ImageMatrix& b, const MetricConfig& cfg = {});

/// Fixed-point rendering used in CSV output; infinities print as "inf".
std::string format_metric(double v, int precision = 6);

} // namespace dnsp
