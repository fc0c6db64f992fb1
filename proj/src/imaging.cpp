#include "dnsp/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace dnsp {

namespace {

// Half-sample symmetric extension: ... b a | a b c d | d c ...
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
    const auto period = static_cast<std::ptrdiff_t>(2 * n);
    std::ptrdiff_t k = i % period;
    if (k < 0) {
        k += period;
    }
    if (k >= static_cast<std::ptrdiff_t>(n)) {
        k = period - 1 - k;
    }
    return static_cast<std::size_t>(k);
}

// Applies a 1-D filter along rows (horizontal) with symmetric boundary.
ImageMatrix filter_rows(const ImageMatrix& img, const std::vector<double>& k) {
    const auto radius = static_cast<std::ptrdiff_t>(k.size() / 2);
    ImageMatrix out(img.rows(), img.cols());
    for (std::size_t r = 0; r < img.rows(); ++r) {
        auto src = img.row(r);
        auto dst = out.row(r);
        for (std::size_t c = 0; c < img.cols(); ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
                acc += k[static_cast<std::size_t>(t + radius)] * src[reflect(static_cast<std::ptrdiff_t>(c) + t, img.cols())];
            }
            dst[c] = acc;
        }
    }
    return out;
}

double keys_cubic(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0) {
        return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    }
    if (x < 2.0) {
        return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    }
    return 0.0;
}

struct Taps {
    std::array<std::size_t, 4> index;
    std::array<double, 4> weight;
};

std::vector<Taps> cubic_taps(std::size_t in_len, int s) {
    std::vector<Taps> taps(in_len * static_cast<std::size_t>(s));
    for (std::size_t o = 0; o < taps.size(); ++o) {
        const auto base = static_cast<std::ptrdiff_t>(o / static_cast<std::size_t>(s));
        const double t = static_cast<double>(o % static_cast<std::size_t>(s)) / s;
        for (int k = 0; k < 4; ++k) {
            taps[o].index[k] = reflect(base - 1 + k, in_len);
            taps[o].weight[k] = keys_cubic(t - static_cast<double>(k - 1));
        }
    }
    return taps;
}

double smoothstep_edge(double signed_dist_px) {
    // Logistic edge about 1.5 px wide; keeps phantoms band-limited enough to resample cleanly.
    return 1.0 / (1.0 + std::exp(-signed_dist_px / 0.6));
}

} // namespace

void DegradationSpec::validate() const {
    if (!(blur_sigma > 0.0) || !std::isfinite(blur_sigma)) {
        throw ConfigError("degradation: blur_sigma must be positive");
    }
    if (scale < 1) {
        throw ConfigError("degradation: scale must be >= 1");
    }
}

std::vector<double> gaussian_kernel_1d(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("gaussian_blur: sigma must be positive, got " + std::to_string(sigma));
    }
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
        const auto x = static_cast<double>(t);
        k[static_cast<std::size_t>(t + radius)] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    }
    const double sum = std::accumulate(k.begin(), k.end(), 0.0);
    for (double& v : k) {
        v /= sum;
    }
    return k;
}

ImageMatrix gaussian_blur(const ImageMatrix& img, double sigma) {
    const std::vector<double> k = gaussian_kernel_1d(sigma);
    const ImageMatrix horizontal = filter_rows(img, k);
    return filter_rows(horizontal.transposed(), k).transposed();
}

ImageMatrix downsample(const ImageMatrix& img, int s) {
    if (s < 1) {
        throw ConfigError("downsample: factor must be >= 1");
    }
    const auto us = static_cast<std::size_t>(s);
    if (img.rows() % us != 0 || img.cols() % us != 0) {
        throw DimensionError("downsample: " + std::to_string(img.rows()) + "x" + std::to_string(img.cols()) +
                             " is not divisible by " + std::to_string(s));
    }
    ImageMatrix out(img.rows() / us, img.cols() / us);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) {
            out(r, c) = img(r * us, c * us);
        }
    }
    return out;
}

ImageMatrix bicubic_upscale(const ImageMatrix& img, int s) {
    if (s < 1) {
        throw ConfigError("bicubic_upscale: factor must be >= 1");
    }
    if (s == 1) {
        return img;
    }
    const auto us = static_cast<std::size_t>(s);
    const std::vector<Taps> col_taps = cubic_taps(img.cols(), s);
    const std::vector<Taps> row_taps = cubic_taps(img.rows(), s);

    ImageMatrix wide(img.rows(), img.cols() * us);
    for (std::size_t r = 0; r < img.rows(); ++r) {
        auto src = img.row(r);
        auto dst = wide.row(r);
        for (std::size_t c = 0; c < dst.size(); ++c) {
            const Taps& t = col_taps[c];
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) {
                acc += t.weight[k] * src[t.index[k]];
            }
            dst[c] = acc;
        }
    }
    ImageMatrix out(img.rows() * us, img.cols() * us);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        const Taps& t = row_taps[r];
        auto dst = out.row(r);
        for (int k = 0; k < 4; ++k) {
            const double w = t.weight[k];
            auto src = wide.row(t.index[k]);
            for (std::size_t c = 0; c < dst.size(); ++c) {
                dst[c] += w * src[c];
            }
        }
    }
    return out;
}

ImageMatrix modcrop(const ImageMatrix& img, int s) {
    const auto us = static_cast<std::size_t>(std::max(s, 1));
    const std::size_t rows = img.rows() - img.rows() % us;
    const std::size_t cols = img.cols() - img.cols() % us;
    if (rows == img.rows() && cols == img.cols()) {
        return img;
    }
    return img.crop(0, 0, rows, cols);
}

ImageMatrix simulate_low_res(const ImageMatrix& img, const DegradationSpec& spec) {
    spec.validate();
    return downsample(gaussian_blur(modcrop(img, spec.scale), spec.blur_sigma), spec.scale);
}

ImageMatrix degrade_and_enlarge(const ImageMatrix& img, const DegradationSpec& spec) {
    return bicubic_upscale(simulate_low_res(img, spec), spec.scale);
}

PatchSet make_training_pairs(const std::vector<ImageMatrix>& hires, const DegradationSpec& spec, std::size_t patch,
                             std::size_t stride) {
    spec.validate();
    if (patch == 0 || stride == 0) {
        throw ConfigError("make_training_pairs: patch and stride must be positive");
    }
    PatchSet set;
    for (const ImageMatrix& original : hires) {
        const ImageMatrix target = modcrop(original, spec.scale);
        if (target.rows() < patch || target.cols() < patch) {
            ++set.skipped_images;
            continue;
        }
        const ImageMatrix input = degrade_and_enlarge(target, spec);
        for (std::size_t r = 0; r + patch <= target.rows(); r += stride) {
            for (std::size_t c = 0; c + patch <= target.cols(); c += stride) {
                set.pairs.push_back({input.crop(r, c, patch, patch), target.crop(r, c, patch, patch)});
            }
        }
    }
    return set;
}

PatchSet subsample_pairs(const PatchSet& set, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ConfigError("fraction must be in (0, 1], got " + std::to_string(fraction));
    }
    const std::size_t n = set.pairs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed ^ 0x5eed'f4ac'7104'0001ULL);
    std::shuffle(order.begin(), order.end(), rng);
    const auto keep = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))),
                                              n == 0 ? 0 : 1, n);
    order.resize(keep);
    std::sort(order.begin(), order.end());
    PatchSet out;
    out.skipped_images = set.skipped_images;
    out.pairs.reserve(keep);
    for (std::size_t i : order) {
        out.pairs.push_back(set.pairs[i]);
    }
    return out;
}

ImageMatrix synth_phantom(std::uint64_t seed, std::size_t size) {
    if (size < 64) {
        throw ConfigError("synth_phantom: size must be >= 64");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto jitter = [&](double center, double spread) { return center + spread * (2.0 * unit(rng) - 1.0); };

    const double half = static_cast<double>(size) / 2.0;
    const double cx = jitter(0.0, 0.03);
    const double cy = jitter(0.0, 0.03);
    const double head_a = jitter(0.78, 0.04);
    const double head_b = jitter(0.90, 0.04);
    const double skull = jitter(0.08, 0.015);
    const double gray = jitter(0.50, 0.04);
    const double white = jitter(0.76, 0.04);
    const double skull_val = jitter(0.92, 0.04);
    const double wm_a = head_a * jitter(0.68, 0.05);
    const double wm_b = head_b * jitter(0.70, 0.05);
    const int folds = 5 + static_cast<int>(unit(rng) * 5.0);
    const double fold_amp = jitter(0.10, 0.03);
    const double fold_phase = unit(rng) * 2.0 * std::numbers::pi;
    const double vent_dx = jitter(0.12, 0.03);
    const double vent_a = jitter(0.07, 0.02);
    const double vent_b = jitter(0.22, 0.04);
    const double vent_tilt = jitter(0.25, 0.1);
    const double vent_val = jitter(0.20, 0.04);

    struct Blob {
        double x, y, r, value;
    };
    std::vector<Blob> blobs(3 + static_cast<std::size_t>(unit(rng) * 3.0));
    for (Blob& b : blobs) {
        const double ang = unit(rng) * 2.0 * std::numbers::pi;
        const double rad = jitter(0.45, 0.15);
        b = {cx + rad * head_a * std::cos(ang), cy + rad * head_b * std::sin(ang), jitter(0.05, 0.02), jitter(0.62, 0.3)};
    }
    struct Wave {
        double kx, ky, phase;
    };
    std::array<Wave, 6> waves{};
    for (Wave& w : waves) {
        w = {jitter(0.0, 18.0), jitter(0.0, 18.0), unit(rng) * 2.0 * std::numbers::pi};
    }

    // Approximate signed distance (pixels, positive inside) to an axis-aligned ellipse.
    auto ellipse = [&](double x, double y, double ex, double ey, double a, double b) {
        const double q = std::hypot((x - ex) / a, (y - ey) / b);
        return (1.0 - q) * std::min(a, b) * half;
    };

    ImageMatrix img(size, size);
    for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t c = 0; c < size; ++c) {
            const double x = (static_cast<double>(c) + 0.5) / half - 1.0;
            const double y = (static_cast<double>(r) + 0.5) / half - 1.0;
            double v = 0.0;
            auto paint = [&](double inside, double value) { v += (value - v) * inside; };

            paint(smoothstep_edge(ellipse(x, y, cx, cy, head_a, head_b)), skull_val);
            paint(smoothstep_edge(ellipse(x, y, cx, cy, head_a - skull, head_b - skull)), gray);

            const double theta = std::atan2((y - cy) / wm_b, (x - cx) / wm_a);
            const double wobble = 1.0 + fold_amp * std::sin(folds * theta + fold_phase);
            paint(smoothstep_edge(ellipse(x, y, cx, cy, wm_a * wobble, wm_b * wobble)), white);

            for (int side : {-1, 1}) {
                const double vx = x - (cx + side * vent_dx);
                const double vy = y - cy;
                const double ang = side * vent_tilt;
                const double rx = std::cos(ang) * vx + std::sin(ang) * vy;
                const double ry = -std::sin(ang) * vx + std::cos(ang) * vy;
                paint(smoothstep_edge(ellipse(rx, ry, 0.0, 0.0, vent_a, vent_b)), vent_val);
            }
            for (const Blob& b : blobs) {
                paint(smoothstep_edge(ellipse(x, y, b.x, b.y, b.r, b.r)), b.value);
            }

            const double tissue = smoothstep_edge(ellipse(x, y, cx, cy, head_a, head_b));
            double texture = 0.0;
            for (const Wave& w : waves) {
                texture += std::sin(w.kx * x + w.ky * y + w.phase);
            }
            v += 0.012 * texture * tissue;
            img(r, c) = std::clamp(v, 0.0, 1.0);
        }
    }
    return img;
}

} // namespace dnsp
