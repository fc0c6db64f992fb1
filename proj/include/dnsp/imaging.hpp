#pragma once

#include "dnsp/tensor.hpp"

#include <cstdint>
#include <vector>

namespace dnsp {

/// How low-resolution inputs are simulated from high-resolution images.
struct DegradationSpec {
    double blur_sigma = 1.0; ///< pixels; kernel radius is ceil(3 sigma)
    int scale = 2;

    void validate() const;
};

struct TrainingPair {
    ImageMatrix input;  ///< crop of the bicubic-enlarged degraded image
    ImageMatrix target; ///< crop of the original at the same location
};

struct PatchSet {
    std::vector<TrainingPair> pairs;
    std::size_t skipped_images = 0; ///< images smaller than one patch
};

/// Normalized sampled Gaussian of radius ceil(3 sigma).
std::vector<double> gaussian_kernel_1d(double sigma);

/// Separable Gaussian correlation, half-sample symmetric (mass-preserving) boundary.
ImageMatrix gaussian_blur(const ImageMatrix& img, double sigma);

/// Keeps every s-th pixel starting at index 0.
ImageMatrix downsample(const ImageMatrix& img, int s);

/// Keys cubic convolution (a = -0.5) onto an s-times finer grid.
///
/// Output pixel (r, c) samples the input at (r / s, c / s), the inverse of
/// downsample()'s sampling lattice, with half-sample symmetric boundary.
ImageMatrix bicubic_upscale(const ImageMatrix& img, int s);

/// bicubic_upscale(downsample(gaussian_blur(img))) after cropping img to a multiple of the scale.
ImageMatrix degrade_and_enlarge(const ImageMatrix& img, const DegradationSpec& spec);

/// Low-resolution observation of img: downsample(gaussian_blur(img)), img cropped to a multiple of the scale.
ImageMatrix simulate_low_res(const ImageMatrix& img, const DegradationSpec& spec);

/// Crops so both dimensions are multiples of s.
ImageMatrix modcrop(const ImageMatrix& img, int s);

/// Aligned (input, target) patches on a regular grid over every image.
PatchSet make_training_pairs(const std::vector<ImageMatrix>& hires, const DegradationSpec& spec, std::size_t patch,
                             std::size_t stride);

/// Deterministic subset of round(fraction * n) pairs (at least one). Subsets
/// for a fixed seed are nested: a smaller fraction selects a subset of a larger one.
PatchSet subsample_pairs(const PatchSet& set, double fraction, std::uint64_t seed);

/// Synthetic brain-like slice: skull ring, gray and white matter with a folded
/// boundary, ventricles, small lesions and faint texture. Values in [0, 1].
ImageMatrix synth_phantom(std::uint64_t seed, std::size_t size);

} // namespace dnsp
