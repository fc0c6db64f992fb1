#include "verify.hpp"

#include "dnsp/conv.hpp"
#include "dnsp/error.hpp"
#include "dnsp/imaging.hpp"
#include "dnsp/priors.hpp"
#include "dnsp/svd.hpp"
#include "dnsp/training.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace dnsp::tools {

namespace {

constexpr double fd_step = 1e-5;

ImageMatrix uniform_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    ImageMatrix m(rows, cols);
    for (double& v : m.data()) {
        v = dist(rng);
    }
    return m;
}

/// Central differences of f at every coordinate, restored afterwards.
std::vector<double> central(const std::vector<double*>& coords, const std::function<double()>& f) {
    std::vector<double> out;
    out.reserve(coords.size());
    for (double* p : coords) {
        const double keep = *p;
        *p = keep + fd_step;
        const double up = f();
        *p = keep - fd_step;
        const double down = f();
        *p = keep;
        out.push_back((up - down) / (2.0 * fd_step));
    }
    return out;
}

double relative(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
        scale = std::max(scale, std::abs(numeric[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

std::vector<double*> coords_of(ImageMatrix& m) {
    std::vector<double*> out;
    for (double& v : m.data()) {
        out.push_back(&v);
    }
    return out;
}

std::vector<double> values_of(const ImageMatrix& m) { return {m.data().begin(), m.data().end()}; }

std::size_t pick_size(std::mt19937_64& rng) { return std::uniform_int_distribution<std::size_t>(6, 16)(rng); }

CheckResult make(const std::string& suite, const std::string& check, double tol) { return {suite, check, 0, 0.0, tol, true}; }

void record(CheckResult& r, double residual) {
    ++r.instances;
    r.worst = std::max(r.worst, std::isnan(residual) ? INFINITY : residual);
    r.passed = r.passed && residual < r.tolerance;
}

CheckResult rank_gradient_check() {
    CheckResult r = make("gradients", "smooth_rank_gradient vs FD", 1e-5);
    std::mt19937_64 rng(101);
    const RankSurrogateParams p(0.1);
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = pick_size(rng);
        ImageMatrix y = uniform_matrix(n, n, rng, -0.1, 0.1);
        const ImageMatrix g = smooth_rank_gradient(y, p);
        record(r, relative(values_of(g), central(coords_of(y), [&] { return smooth_rank(y, p); })));
    }
    return r;
}

CheckResult sharpness_gradient_check() {
    CheckResult r = make("gradients", "sharpness_gradient vs FD", 1e-5);
    std::mt19937_64 rng(102);
    for (int i = 0; i < 20; ++i) {
        ImageMatrix y = uniform_matrix(pick_size(rng), pick_size(rng), rng, 0.0, 1.0);
        const ImageMatrix g = sharpness_gradient(y);
        record(r, relative(values_of(g), central(coords_of(y), [&] { return sharpness(y); })));
    }
    return r;
}

CheckResult conv_gradient_check() {
    CheckResult r = make("gradients", "conv2d_backward vs FD", 1e-5);
    std::mt19937_64 rng(103);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = pick_size(rng);
        const std::size_t depth = 1 + static_cast<std::size_t>(i % 3);
        const std::size_t k = (i % 2 == 0) ? 3 : 5;
        FeatureStack in(n, n, depth);
        for (double& v : in.data()) {
            v = normal(rng);
        }
        std::vector<ConvKernel> ks;
        for (int c = 0; c < 2; ++c) {
            ConvKernel kern(k, k, depth);
            for (double& w : kern.weights) {
                w = normal(rng);
            }
            kern.bias = normal(rng);
            ks.push_back(kern);
        }
        FeatureStack up(n, n, ks.size());
        for (double& v : up.data()) {
            v = normal(rng);
        }
        auto contraction = [&] {
            const FeatureStack out = conv2d_same(in, ks);
            double s = 0.0;
            for (std::size_t j = 0; j < out.data().size(); ++j) {
                s += up.data()[j] * out.data()[j];
            }
            return s;
        };
        const ConvGradients g = conv2d_backward(in, ks, up);
        std::vector<double*> coords;
        std::vector<double> analytic;
        for (std::size_t j = 0; j < in.data().size(); ++j) {
            coords.push_back(&in.data()[j]);
            analytic.push_back(g.input_grad.data()[j]);
        }
        for (std::size_t c = 0; c < ks.size(); ++c) {
            for (std::size_t j = 0; j < ks[c].weights.size(); ++j) {
                coords.push_back(&ks[c].weights[j]);
                analytic.push_back(g.kernel_grads[c].weights[j]);
            }
            coords.push_back(&ks[c].bias);
            analytic.push_back(g.bias_grads[c]);
        }
        record(r, relative(analytic, central(coords, contraction)));
    }
    return r;
}

constexpr double kink_margin = 1e-4;

double min_abs_pre_activation(const ForwardTrace& t) {
    double m = INFINITY;
    for (std::size_t l = 0; l + 1 < t.pre_activation.size(); ++l) {
        for (double v : t.pre_activation[l].data()) {
            m = std::min(m, std::abs(v));
        }
    }
    return m;
}

CheckResult parameter_gradient_check() {
    CheckResult r = make("gradients", "full parameter gradient vs FD", 1e-5);
    std::mt19937_64 rng(104);
    const std::vector<LayerSpec> spec{{3, 3, 1, 2, Activation::relu}, {1, 1, 2, 1, Activation::none}};
    HyperParams hp;
    hp.delta = 0.1;
    hp.alpha = 0.1;
    hp.beta = 0.01;
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = pick_size(rng);
        NetworkParams params = init_params(spec, 500 + static_cast<std::uint64_t>(i), 0.5);
        for (Layer& l : params.layers) {
            for (ConvKernel& k : l.kernels) {
                k.bias = 0.05;
            }
        }
        // Central differences straddling a ReLU kink are meaningless, so redraw until
        // every pre-activation clears the step by a wide margin.
        ImageMatrix x = uniform_matrix(n, n, rng, 0.0, 1.0);
        while (min_abs_pre_activation(forward(x, params)) < kink_margin) {
            x = uniform_matrix(n, n, rng, 0.0, 1.0);
        }
        const ImageMatrix target = uniform_matrix(n, n, rng, 0.0, 1.0);
        const ForwardTrace t = forward(x, params);
        const ParamGrads g = backward(t, params, loss_output_gradient(t.output, target, hp));
        std::vector<double*> coords;
        std::vector<double> analytic;
        for (std::size_t l = 0; l < params.layers.size(); ++l) {
            for (std::size_t k = 0; k < params.layers[l].kernels.size(); ++k) {
                ConvKernel& kern = params.layers[l].kernels[k];
                for (std::size_t j = 0; j < kern.weights.size(); ++j) {
                    coords.push_back(&kern.weights[j]);
                    analytic.push_back(g.layers[l][k].weights[j]);
                }
                coords.push_back(&kern.bias);
                analytic.push_back(g.layers[l][k].bias);
            }
        }
        record(r, relative(analytic, central(coords, [&] { return loss(forward(x, params).output, target, hp).total; })));
    }
    return r;
}

double orthonormality_residual(const ImageMatrix& q) {
    const ImageMatrix gram = matmul(q.transposed(), q);
    return max_abs(gram - ImageMatrix::identity(gram.rows()));
}

std::vector<CheckResult> svd_suite() {
    CheckResult recon = make("svd", "reconstruction max-abs error", 1e-10);
    CheckResult ortho = make("svd", "orthonormality of U and Z", 1e-10);
    CheckResult order = make("svd", "sigma sorted and nonnegative", 0.5);
    std::mt19937_64 rng(201);
    std::uniform_int_distribution<std::size_t> dim(1, 64);
    for (int i = 0; i < 100; ++i) {
        const std::size_t rows = dim(rng);
        const std::size_t cols = dim(rng);
        ImageMatrix a = uniform_matrix(rows, cols, rng, -1.0, 1.0);
        if (i % 4 == 0 && cols > 2) {
            for (std::size_t r = 0; r < rows; ++r) {
                a(r, cols - 1) = a(r, 0) - a(r, 1);
            }
        }
        const SvdFactors f = svd(a);
        record(recon, max_abs(f.reconstruct() - a));
        record(ortho, std::max(orthonormality_residual(f.u), orthonormality_residual(f.z)));
        const bool ok = std::is_sorted(f.sigma.rbegin(), f.sigma.rend()) && f.sigma.back() >= 0.0;
        record(order, ok ? 0.0 : 1.0);
    }
    return {recon, ortho, order};
}

std::vector<CheckResult> priors_suite() {
    CheckResult exact = make("priors", "smooth_rank equals rank for well-separated spectra", 1e-8);
    std::mt19937_64 rng(301);
    std::uniform_real_distribution<double> magnitude(0.5, 2.0);
    for (int k = 1; k <= 3; ++k) {
        for (int i = 0; i < 10; ++i) {
            const std::size_t rows = pick_size(rng);
            const std::size_t cols = pick_size(rng);
            ImageMatrix a(rows, cols);
            for (int term = 0; term < k; ++term) {
                const double s = magnitude(rng);
                const std::size_t rr = static_cast<std::size_t>(term);
                a(rr, rr) += s;
            }
            const ImageMatrix u = uniform_matrix(rows, rows, rng, -1.0, 1.0);
            const ImageMatrix v = uniform_matrix(cols, cols, rng, -1.0, 1.0);
            const ImageMatrix rotated = matmul(matmul(svd(u).u, a), svd(v).z.transposed());
            record(exact, std::abs(smooth_rank(rotated, RankSurrogateParams(0.01)) - k));
        }
    }

    CheckResult sweep = make("priors", "sharpness strictly falls with blur (violations)", 0.5);
    const ImageMatrix phantom = synth_phantom(21, 128);
    double prev = sharpness(gaussian_blur(phantom, 0.5));
    for (double sigma : {1.0, 1.5, 2.0, 2.5}) {
        const double cur = sharpness(gaussian_blur(phantom, sigma));
        record(sweep, cur < prev ? 0.0 : 1.0);
        prev = cur;
    }

    CheckResult flat = make("priors", "zero image has zero sharpness and gradient", 1e-15);
    const ImageMatrix zero(12, 12);
    record(flat, std::max(std::abs(sharpness(zero)), max_abs(sharpness_gradient(zero))));
    return {exact, sweep, flat};
}

} // namespace

bool is_suite(const std::string& name) {
    return name == "gradients" || name == "svd" || name == "priors" || name == "all";
}

std::vector<CheckResult> run_suite(const std::string& name) {
    if (!is_suite(name)) {
        throw ConfigError("unknown verify suite '" + name + "'");
    }
    std::vector<CheckResult> out;
    if (name == "gradients" || name == "all") {
        out.push_back(rank_gradient_check());
        out.push_back(sharpness_gradient_check());
        out.push_back(conv_gradient_check());
        out.push_back(parameter_gradient_check());
    }
    if (name == "svd" || name == "all") {
        for (CheckResult& r : svd_suite()) {
            out.push_back(std::move(r));
        }
    }
    if (name == "priors" || name == "all") {
        for (CheckResult& r : priors_suite()) {
            out.push_back(std::move(r));
        }
    }
    return out;
}

} // namespace dnsp::tools
