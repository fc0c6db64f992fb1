#include "dnsp/network.hpp"

#include "dnsp/conv.hpp"

#include <algorithm>
#include <random>

namespace dnsp {

std::vector<LayerSpec> srcnn_915_profile() {
    return {
        {9, 9, 1, 64, Activation::relu},
        {1, 1, 64, 32, Activation::relu},
        {5, 5, 32, 1, Activation::none},
    };
}

std::vector<LayerSpec> profile_by_name(const std::string& name) {
    if (name == "srcnn-915") {
        return srcnn_915_profile();
    }
    if (name == "tiny") {
        return {{3, 3, 1, 4, Activation::relu}, {3, 3, 4, 1, Activation::none}};
    }
    throw ConfigError("unknown network profile '" + name + "' (expected srcnn-915 or tiny)");
}

void validate_spec(const std::vector<LayerSpec>& spec) {
    if (spec.empty()) {
        throw ConfigError("network spec has no layers");
    }
    for (std::size_t l = 0; l < spec.size(); ++l) {
        const LayerSpec& s = spec[l];
        if (s.kernel_height == 0 || s.kernel_width == 0 || s.input_depth == 0 || s.kernel_count == 0) {
            throw ConfigError("layer " + std::to_string(l) + ": all counts must be positive");
        }
        if (s.kernel_height % 2 == 0 || s.kernel_width % 2 == 0) {
            throw ConfigError("layer " + std::to_string(l) + ": kernel size must be odd");
        }
        if (l > 0 && s.input_depth != spec[l - 1].kernel_count) {
            throw ConfigError("layer " + std::to_string(l) + ": input depth " + std::to_string(s.input_depth) +
                              " does not match previous kernel count " + std::to_string(spec[l - 1].kernel_count));
        }
    }
    if (spec.front().input_depth != 1) {
        throw ConfigError("first layer must take a single-channel image");
    }
    if (spec.back().kernel_count != 1 || spec.back().activation != Activation::none) {
        throw ConfigError("last layer must have one kernel and no activation");
    }
}

std::vector<LayerSpec> NetworkParams::spec() const {
    std::vector<LayerSpec> out;
    out.reserve(layers.size());
    for (const Layer& l : layers) {
        out.push_back(l.spec);
    }
    return out;
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers) {
        for (const ConvKernel& k : l.kernels) {
            n += k.weights.size() + 1;
        }
    }
    return n;
}

ParamGrads ParamGrads::zeros_like(const NetworkParams& params) {
    ParamGrads g;
    g.layers.reserve(params.layers.size());
    for (const Layer& l : params.layers) {
        std::vector<ConvKernel> ks;
        ks.reserve(l.kernels.size());
        for (const ConvKernel& k : l.kernels) {
            ks.emplace_back(k.height, k.width, k.depth);
        }
        g.layers.push_back(std::move(ks));
    }
    return g;
}

void ParamGrads::add(const ParamGrads& other) {
    if (other.layers.size() != layers.size()) {
        throw DimensionError("ParamGrads::add: layer count mismatch");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (other.layers[l].size() != layers[l].size()) {
            throw DimensionError("ParamGrads::add: kernel count mismatch");
        }
        for (std::size_t k = 0; k < layers[l].size(); ++k) {
            ConvKernel& dst = layers[l][k];
            const ConvKernel& src = other.layers[l][k];
            if (src.weights.size() != dst.weights.size()) {
                throw DimensionError("ParamGrads::add: kernel shape mismatch");
            }
            for (std::size_t i = 0; i < dst.weights.size(); ++i) {
                dst.weights[i] += src.weights[i];
            }
            dst.bias += src.bias;
        }
    }
}

void ParamGrads::scale(double s) {
    for (auto& layer : layers) {
        for (ConvKernel& k : layer) {
            for (double& w : k.weights) {
                w *= s;
            }
            k.bias *= s;
        }
    }
}

NetworkParams init_params(const std::vector<LayerSpec>& spec, std::uint64_t seed, double weight_std) {
    validate_spec(spec);
    if (!(weight_std >= 0.0)) {
        throw ConfigError("init_params: weight_std must be non-negative");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    NetworkParams p;
    for (const LayerSpec& s : spec) {
        Layer layer{s, {}};
        for (std::size_t k = 0; k < s.kernel_count; ++k) {
            ConvKernel kernel(s.kernel_height, s.kernel_width, s.input_depth);
            for (double& w : kernel.weights) {
                w = weight_std * normal(rng);
            }
            layer.kernels.push_back(std::move(kernel));
        }
        p.layers.push_back(std::move(layer));
    }
    return p;
}

ForwardTrace forward(const ImageMatrix& x_s, const NetworkParams& params) {
    require_finite(x_s, "forward");
    validate_spec(params.spec());
    ForwardTrace t;
    t.input = FeatureStack(x_s);
    const FeatureStack* current = &t.input;
    for (const Layer& layer : params.layers) {
        FeatureStack pre = conv2d_same(*current, layer.kernels);
        FeatureStack post = pre;
        if (layer.spec.activation == Activation::relu) {
            for (double& v : post.data()) {
                v = v > 0.0 ? v : 0.0;
            }
        }
        t.pre_activation.push_back(std::move(pre));
        t.post_activation.push_back(std::move(post));
        current = &t.post_activation.back();
    }
    t.output = t.post_activation.back().to_image(0);
    return t;
}

ParamGrads backward(const ForwardTrace& trace, const NetworkParams& params, const ImageMatrix& output_grad) {
    require_same_shape(trace.output, output_grad, "backward");
    if (trace.pre_activation.size() != params.layers.size()) {
        throw DimensionError("backward: trace does not belong to these parameters");
    }
    ParamGrads grads;
    grads.layers.resize(params.layers.size());

    FeatureStack upstream(output_grad);
    for (std::size_t l = params.layers.size(); l-- > 0;) {
        const Layer& layer = params.layers[l];
        if (layer.spec.activation == Activation::relu) {
            auto pre = trace.pre_activation[l].data();
            auto g = upstream.data();
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (!(pre[i] > 0.0)) {
                    g[i] = 0.0;
                }
            }
        }
        const FeatureStack& layer_input = l == 0 ? trace.input : trace.post_activation[l - 1];
        ConvGradients cg = conv2d_backward(layer_input, layer.kernels, upstream, l > 0);
        for (std::size_t k = 0; k < cg.kernel_grads.size(); ++k) {
            cg.kernel_grads[k].bias = cg.bias_grads[k];
        }
        grads.layers[l] = std::move(cg.kernel_grads);
        if (l > 0) {
            upstream = std::move(cg.input_grad);
        }
    }
    return grads;
}

} // namespace dnsp
