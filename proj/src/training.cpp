#include "dnsp/training.hpp"

#include "dnsp/metrics.hpp"
#include "dnsp/priors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace dnsp {

void HyperParams::validate() const {
    if (!(delta > 0.0)) {
        throw ConfigError("delta must be positive");
    }
    if (!(alpha >= 0.0) || !(beta >= 0.0)) {
        throw ConfigError("alpha and beta must be non-negative");
    }
    if (!(eta >= 0.0)) {
        throw ConfigError("eta must be non-negative");
    }
    if (batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }
    if (epochs < 0) {
        throw ConfigError("epochs must be non-negative");
    }
    if (!(eta_last_layer_ratio > 0.0)) {
        throw ConfigError("eta_last_layer_ratio must be positive");
    }
    if (!(init_std >= 0.0)) {
        throw ConfigError("init_std must be non-negative");
    }
    if (!(sharpness_ceiling > 0.0)) {
        throw ConfigError("sharpness_ceiling must be positive");
    }
}

namespace {

double half_squared_error(const ImageMatrix& y, const ImageMatrix& y_g) {
    double se = 0.0;
    auto a = y.data();
    auto b = y_g.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = b[i] - a[i];
        se += d * d;
    }
    return 0.5 * se;
}

// -(y_g - y), the reconstruction part of dE/dY.
ImageMatrix residual_gradient(const ImageMatrix& y, const ImageMatrix& y_g) {
    ImageMatrix g(y.rows(), y.cols());
    auto out = g.data();
    auto a = y.data();
    auto b = y_g.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = -(b[i] - a[i]);
    }
    return g;
}

struct PatchEvaluation {
    LossBreakdown loss;
    ImageMatrix output_grad;
};

// Loss and dE/dY for one network output, sharing a single SVD between the
// rank value and its gradient.
PatchEvaluation evaluate_patch(const ImageMatrix& y, const ImageMatrix& y_g, const HyperParams& hp, bool use_priors) {
    PatchEvaluation ev;
    ev.loss.mse = half_squared_error(y, y_g);
    ev.output_grad = residual_gradient(y, y_g);
    if (use_priors) {
        const SvdFactors f = svd(y);
        const RankSurrogateParams rp(hp.delta);
        ev.loss.rank_term = hp.alpha * smooth_rank(f.sigma, rp);
        ev.loss.sharpness_term = hp.beta * sharpness(y);
        const ImageMatrix d_rank = smooth_rank_gradient(f, rp);
        const ImageMatrix d_sharp = sharpness_gradient(y);
        auto g = ev.output_grad.data();
        auto r = d_rank.data();
        auto s = d_sharp.data();
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] = g[i] + hp.alpha * r[i] - hp.beta * s[i];
        }
    }
    ev.loss.total = ev.loss.mse + ev.loss.rank_term - ev.loss.sharpness_term;
    return ev;
}

bool finite(const LossBreakdown& l) {
    return std::isfinite(l.mse) && std::isfinite(l.rank_term) && std::isfinite(l.sharpness_term) && std::isfinite(l.total);
}

double mean_psnr(const PatchSet& set, const NetworkParams& params) {
    double acc = 0.0;
    for (const TrainingPair& p : set.pairs) {
        acc += psnr(forward(p.input, params).output, p.target);
    }
    return acc / static_cast<double>(set.pairs.size());
}

} // namespace

LossBreakdown loss(const ImageMatrix& y, const ImageMatrix& y_g, const HyperParams& hp) {
    require_same_shape(y, y_g, "loss");
    LossBreakdown l;
    l.mse = half_squared_error(y, y_g);
    l.rank_term = hp.alpha * smooth_rank(y, RankSurrogateParams(hp.delta));
    l.sharpness_term = hp.beta * sharpness(y);
    l.total = l.mse + l.rank_term - l.sharpness_term;
    return l;
}

ImageMatrix loss_output_gradient(const ImageMatrix& y, const ImageMatrix& y_g, const HyperParams& hp) {
    require_same_shape(y, y_g, "loss_output_gradient");
    return evaluate_patch(y, y_g, hp, true).output_grad;
}

NetworkParams sgd_step(const NetworkParams& params, const ParamGrads& grads, const HyperParams& hp) {
    if (grads.layers.size() != params.layers.size()) {
        throw DimensionError("sgd_step: gradient layer count does not match parameters");
    }
    NetworkParams next = params;
    const std::size_t last = next.layers.size() - 1;
    for (std::size_t l = 0; l < next.layers.size(); ++l) {
        const double rate = l == last ? hp.eta * hp.eta_last_layer_ratio : hp.eta;
        auto& kernels = next.layers[l].kernels;
        if (grads.layers[l].size() != kernels.size()) {
            throw DimensionError("sgd_step: kernel count mismatch in layer " + std::to_string(l));
        }
        for (std::size_t k = 0; k < kernels.size(); ++k) {
            ConvKernel& w = kernels[k];
            const ConvKernel& g = grads.layers[l][k];
            if (g.weights.size() != w.weights.size()) {
                throw DimensionError("sgd_step: kernel shape mismatch in layer " + std::to_string(l));
            }
            for (std::size_t i = 0; i < w.weights.size(); ++i) {
                w.weights[i] -= rate * g.weights[i];
            }
            w.bias -= rate * g.bias;
        }
    }
    return next;
}

TrainResult train(const PatchSet& pairs, const std::vector<LayerSpec>& spec, const HyperParams& hp,
                  const TrainOptions& options) {
    hp.validate();
    if (pairs.pairs.empty()) {
        throw ConfigError("train: no training pairs");
    }
    const PatchSet& validation =
        options.validation != nullptr && !options.validation->pairs.empty() ? *options.validation : pairs;

    TrainResult result{init_params(spec, hp.seed, hp.init_std), {}};
    NetworkParams& params = result.params;
    std::mt19937_64 rng(hp.seed ^ 0x9e37'79b9'7f4a'7c15ULL);
    std::vector<std::size_t> order(pairs.pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);
        LossBreakdown epoch_sum;

        for (std::size_t b = 0; b < order.size(); b += hp.batch_size) {
            const std::size_t end = std::min(order.size(), b + hp.batch_size);
            ParamGrads batch_grad = ParamGrads::zeros_like(params);
            LossBreakdown batch_sum;
            for (std::size_t i = b; i < end; ++i) {
                const TrainingPair& pair = pairs.pairs[order[i]];
                const ForwardTrace trace = forward(pair.input, params);
                if (!trace.output.all_finite()) {
                    throw TrainingDiverged("network output is not finite", epoch);
                }
                const PatchEvaluation ev = evaluate_patch(trace.output, pair.target, hp, options.use_priors);
                if (!finite(ev.loss)) {
                    throw TrainingDiverged("non-finite loss", epoch);
                }
                batch_grad.add(backward(trace, params, ev.output_grad));
                batch_sum.mse += ev.loss.mse;
                batch_sum.rank_term += ev.loss.rank_term;
                batch_sum.sharpness_term += ev.loss.sharpness_term;
                batch_sum.total += ev.loss.total;
            }
            const auto count = static_cast<double>(end - b);
            if (batch_sum.sharpness_term > 0.0 && batch_sum.sharpness_term > hp.sharpness_ceiling * batch_sum.mse) {
                throw TrainingDiverged("sharpness term exceeds " + std::to_string(hp.sharpness_ceiling) +
                                           "x the reconstruction loss",
                                       epoch);
            }
            batch_grad.scale(1.0 / count);
            params = sgd_step(params, batch_grad, hp);

            epoch_sum.mse += batch_sum.mse;
            epoch_sum.rank_term += batch_sum.rank_term;
            epoch_sum.sharpness_term += batch_sum.sharpness_term;
            epoch_sum.total += batch_sum.total;
        }

        const auto n = static_cast<double>(order.size());
        EpochStats stats;
        stats.epoch = epoch;
        stats.mean = {epoch_sum.mse / n, epoch_sum.rank_term / n, epoch_sum.sharpness_term / n, epoch_sum.total / n};
        stats.val_psnr = mean_psnr(validation, params);
        stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!finite(stats.mean)) {
            throw TrainingDiverged("non-finite epoch loss", epoch);
        }
        result.report.epochs.push_back(stats);
        if (options.on_epoch) {
            options.on_epoch(stats);
        }
    }
    return result;
}

ImageMatrix infer(const ImageMatrix& x, const NetworkParams& params, int s) {
    return forward(bicubic_upscale(x, s), params).output;
}

void TrainReport::write_csv(std::ostream& os, bool include_timing) const {
    os << "epoch,mse,rank_term,sharpness_term,total,val_psnr,seconds\n";
    const auto flags = os.flags();
    const auto precision = os.precision();
    os.precision(12);
    for (const EpochStats& e : epochs) {
        os << e.epoch << ',' << e.mean.mse << ',' << e.mean.rank_term << ',' << e.mean.sharpness_term << ',' << e.mean.total
           << ',' << format_metric(e.val_psnr, 6) << ',';
        if (include_timing) {
            os << format_metric(e.seconds, 3);
        } else {
            os << '0';
        }
        os << '\n';
    }
    os.flags(flags);
    os.precision(precision);
}

} // namespace dnsp
