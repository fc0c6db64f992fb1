#pragma once

#include "dnsp/imaging.hpp"
#include "dnsp/network.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dnsp {

struct HyperParams {
    double delta = 0.01;   ///< rank surrogate width
    double alpha = 0.1;    ///< rank prior weight
    double beta = 5e-5;    ///< sharpness prior weight (subtracted)
    double eta = 1e-4;     ///< learning rate
    std::size_t batch_size = 4;
    int epochs = 200;
    std::uint64_t seed = 1;
    double eta_last_layer_ratio = 0.1;
    double init_std = 0.001;
    /// Abort when the batch-mean sharpness term exceeds this multiple of the batch-mean MSE.
    double sharpness_ceiling = 10.0;

    void validate() const;
};

struct LossBreakdown {
    double mse = 0.0;            ///< 0.5 * ||y_g - y||_F^2
    double rank_term = 0.0;      ///< alpha * smooth_rank(y)
    double sharpness_term = 0.0; ///< beta * sharpness(y)
    double total = 0.0;          ///< mse + rank_term - sharpness_term
};

struct EpochStats {
    int epoch = 0;
    LossBreakdown mean;
    double val_psnr = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    std::string checkpoint_path;

    /// CSV: epoch,mse,rank_term,sharpness_term,total,val_psnr,seconds
    void write_csv(std::ostream& os, bool include_timing = true) const;
};

LossBreakdown loss(const ImageMatrix& y, const ImageMatrix& y_g, const HyperParams& hp);

/// dE/dY = -(y_g - y) + alpha * D_rank - beta * D_sharpness.
ImageMatrix loss_output_gradient(const ImageMatrix& y, const ImageMatrix& y_g, const HyperParams& hp);

/// One gradient step; the final layer uses eta * eta_last_layer_ratio.
NetworkParams sgd_step(const NetworkParams& params, const ParamGrads& grads, const HyperParams& hp);

struct TrainOptions {
    /// false runs the plain reconstruction loss without evaluating either prior.
    bool use_priors = true;
    /// Scored after each epoch; when empty the training pairs are scored instead.
    const PatchSet* validation = nullptr;
    std::function<void(const EpochStats&)> on_epoch;
};

struct TrainResult {
    NetworkParams params;
    TrainReport report;
};

/// Mini-batch SGD on the regularized objective. Pairs are reshuffled every epoch
/// with a seeded generator; batch gradients are means over the batch, summed in patch order.
TrainResult train(const PatchSet& pairs, const std::vector<LayerSpec>& spec, const HyperParams& hp,
                  const TrainOptions& options = {});

/// Bicubic enlargement by s followed by the network; priors play no part at inference.
ImageMatrix infer(const ImageMatrix& x, const NetworkParams& params, int s);

} // namespace dnsp
