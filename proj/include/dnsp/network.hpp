#pragma once

#include "dnsp/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dnsp {

enum class Activation : std::uint8_t { none = 0, relu = 1 };

struct LayerSpec {
    std::size_t kernel_height = 1;
    std::size_t kernel_width = 1;
    std::size_t input_depth = 1;
    std::size_t kernel_count = 1;
    Activation activation = Activation::none;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// 64 x 9x9x1 -> 32 x 1x1x64 -> 1 x 5x5x32 with ReLU after the first two layers.
std::vector<LayerSpec> srcnn_915_profile();
/// Resolves a profile name ("srcnn-915", "tiny") to its layer list.
std::vector<LayerSpec> profile_by_name(const std::string& name);

/// Throws ConfigError if the depth chain is broken, the last layer has an
/// activation or more than one kernel, or the first layer is not single-channel.
void validate_spec(const std::vector<LayerSpec>& spec);

struct Layer {
    LayerSpec spec;
    std::vector<ConvKernel> kernels;

    friend bool operator==(const Layer&, const Layer&) = default;
};

/// Filters and biases of every layer.
struct NetworkParams {
    std::vector<Layer> layers;

    [[nodiscard]] std::vector<LayerSpec> spec() const;
    [[nodiscard]] std::size_t parameter_count() const;

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Gradient with the same layout as NetworkParams; each kernel's bias slot holds the bias gradient.
struct ParamGrads {
    std::vector<std::vector<ConvKernel>> layers;

    static ParamGrads zeros_like(const NetworkParams& params);
    void add(const ParamGrads& other);
    void scale(double s);
};

struct ForwardTrace {
    FeatureStack input;
    std::vector<FeatureStack> pre_activation;
    std::vector<FeatureStack> post_activation;
    ImageMatrix output;
};

/// Weights i.i.d. N(0, weight_std^2), biases zero, deterministic in seed.
NetworkParams init_params(const std::vector<LayerSpec>& spec, std::uint64_t seed, double weight_std = 0.001);

ForwardTrace forward(const ImageMatrix& x_s, const NetworkParams& params);

/// Parameter gradients of sum_{i,j} output_grad(i,j) * Y(i,j), the reverse-mode
/// contraction of output_grad with dY/dtheta.
ParamGrads backward(const ForwardTrace& trace, const NetworkParams& params, const ImageMatrix& output_grad);

// Checkpoint: "DNSP", u16 version, u16 layer count, then per layer m, n, d, k (u32),
// activation tag (u8), and k * (m*n*d + 1) little-endian doubles (weights, then bias).
inline constexpr std::uint16_t checkpoint_version = 1;

std::string serialize_checkpoint(const NetworkParams& params);
NetworkParams deserialize_checkpoint(const std::string& bytes);
void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_checkpoint(const std::filesystem::path& path);

} // namespace dnsp
