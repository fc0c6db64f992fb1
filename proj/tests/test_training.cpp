#include "dnsp/priors.hpp"
#include "dnsp/training.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace dnsp;
using namespace dnsp::testing;

namespace {

std::vector<LayerSpec> tiny_spec() {
    return {{3, 3, 1, 4, Activation::relu}, {3, 3, 4, 1, Activation::none}};
}

HyperParams tiny_hp() {
    HyperParams hp;
    hp.eta = 2e-3;
    hp.eta_last_layer_ratio = 1.0;
    hp.init_std = 0.1;
    hp.batch_size = 2;
    hp.epochs = 5;
    hp.seed = 3;
    hp.delta = 0.1;
    return hp;
}

PatchSet random_pairs(std::size_t count, std::size_t size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PatchSet set;
    for (std::size_t i = 0; i < count; ++i) {
        const ImageMatrix target = random_matrix(size, size, rng, 0.0, 1.0);
        set.pairs.push_back({gaussian_blur(target, 1.0), target});
    }
    return set;
}

std::string report_csv(const TrainReport& r) {
    std::ostringstream ss;
    r.write_csv(ss, false);
    return ss.str();
}

} // namespace

TEST_CASE("loss: zero output against zero target") {
    const LossBreakdown l = loss(ImageMatrix(4, 4), ImageMatrix(4, 4), HyperParams{});
    CHECK(l.mse == 0.0);
    CHECK(l.rank_term == 0.0);
    CHECK(l.sharpness_term == 0.0);
    CHECK(l.total == 0.0);
}

TEST_CASE("loss: without priors the objective is the plain half squared error") {
    std::mt19937_64 rng(1);
    const ImageMatrix y = random_matrix(8, 8, rng);
    const ImageMatrix g = random_matrix(8, 8, rng);
    HyperParams hp;
    hp.alpha = 0.0;
    hp.beta = 0.0;
    double se = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        se += (g.data()[i] - y.data()[i]) * (g.data()[i] - y.data()[i]);
    }
    const LossBreakdown l = loss(y, g, hp);
    CHECK(l.total == 0.5 * se);
    CHECK(l.total == l.mse);
}

TEST_CASE("loss: identity output against zero target") {
    HyperParams hp;
    hp.alpha = 0.1;
    hp.beta = 0.0;
    hp.delta = 0.01;
    const LossBreakdown l = loss(ImageMatrix::identity(4), ImageMatrix(4, 4), hp);
    CHECK(l.mse == 2.0);
    CHECK(l.rank_term == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(l.total == doctest::Approx(2.4).epsilon(1e-12));
}

TEST_CASE("loss: decomposition is exact") {
    std::mt19937_64 rng(2);
    HyperParams hp;
    hp.beta = 0.3;
    for (int trial = 0; trial < 5; ++trial) {
        const LossBreakdown l = loss(random_matrix(6, 6, rng), random_matrix(6, 6, rng), hp);
        CHECK(l.total == l.mse + l.rank_term - l.sharpness_term);
        CHECK(l.sharpness_term > 0.0);
    }
    CHECK_THROWS_AS(loss(ImageMatrix(4, 4), ImageMatrix(4, 5), hp), DimensionError);
}

TEST_CASE("loss_output_gradient: zero at the reconstruction minimum without priors") {
    std::mt19937_64 rng(3);
    const ImageMatrix y = random_matrix(5, 5, rng);
    HyperParams hp;
    hp.alpha = 0.0;
    hp.beta = 0.0;
    CHECK(max_abs(loss_output_gradient(y, y, hp)) == 0.0);
}

TEST_CASE("loss_output_gradient: finite differences of the total loss") {
    std::mt19937_64 rng(4);
    ImageMatrix y = random_matrix(8, 8, rng, 0.0, 1.0);
    const ImageMatrix target = random_matrix(8, 8, rng, 0.0, 1.0);
    HyperParams hp;
    hp.delta = 0.1;
    hp.alpha = 0.1;
    hp.beta = 0.05;
    const ImageMatrix g = loss_output_gradient(y, target, hp);
    const auto fd = central_differences(coords_of(y), [&] { return loss(y, target, hp).total; });
    CHECK(relative_error(values_of(g), fd) < 1e-6);
}

TEST_CASE("loss_output_gradient: additive decomposition with beta = 0") {
    ImageMatrix y = ImageMatrix::identity(6);
    for (std::size_t i = 0; i < 6; ++i) {
        y(i, i) = 0.05 * static_cast<double>(i + 1);
        y(i, (i + 1) % 6) = 0.002;
    }
    std::mt19937_64 rng(5);
    const ImageMatrix target = random_matrix(6, 6, rng);
    HyperParams hp;
    hp.alpha = 0.1;
    hp.beta = 0.0;
    hp.delta = 0.1;
    const ImageMatrix expected = (y - target) + hp.alpha * smooth_rank_gradient(y, RankSurrogateParams(hp.delta));
    CHECK(max_abs(loss_output_gradient(y, target, hp) - expected) < 1e-14);
}

TEST_CASE("sgd_step: arithmetic and no-op cases") {
    NetworkParams p = init_params({{1, 1, 1, 1, Activation::none}}, 0, 0.0);
    p.layers[0].kernels[0].weights[0] = 1.0;
    ParamGrads g = ParamGrads::zeros_like(p);
    g.layers[0][0].weights[0] = 2.0;
    HyperParams hp;
    hp.eta = 0.1;
    hp.eta_last_layer_ratio = 1.0;
    CHECK(sgd_step(p, g, hp).layers[0].kernels[0].weights[0] == doctest::Approx(0.8).epsilon(1e-15));

    CHECK(sgd_step(p, ParamGrads::zeros_like(p), hp) == p);
    hp.eta = 0.0;
    CHECK(sgd_step(p, g, hp) == p);
}

TEST_CASE("sgd_step: last layer uses the reduced rate") {
    const NetworkParams p = init_params(tiny_spec(), 1, 0.0);
    ParamGrads g = ParamGrads::zeros_like(p);
    g.layers[0][0].bias = 1.0;
    g.layers[1][0].bias = 1.0;
    HyperParams hp;
    hp.eta = 0.5;
    hp.eta_last_layer_ratio = 0.1;
    const NetworkParams next = sgd_step(p, g, hp);
    CHECK(next.layers[0].kernels[0].bias == -0.5);
    CHECK(next.layers[1].kernels[0].bias == doctest::Approx(-0.05));
    ParamGrads wrong;
    CHECK_THROWS_AS(sgd_step(p, wrong, hp), DimensionError);
}

TEST_CASE("full parameter gradient matches finite differences of the total loss") {
    std::mt19937_64 rng(6);
    NetworkParams p = init_params(tiny_spec(), 7, 0.3);
    for (Layer& l : p.layers) {
        for (ConvKernel& k : l.kernels) {
            k.bias = 0.1;
        }
    }
    const ImageMatrix x = random_matrix(8, 8, rng, 0.0, 1.0);
    const ImageMatrix target = random_matrix(8, 8, rng, 0.0, 1.0);
    HyperParams hp;
    hp.delta = 0.1;
    hp.alpha = 0.2;
    hp.beta = 0.05;
    const ForwardTrace t = forward(x, p);
    const ParamGrads analytic = backward(t, p, loss_output_gradient(t.output, target, hp));

    std::vector<double*> coords;
    std::vector<double> flat;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        for (std::size_t k = 0; k < p.layers[l].kernels.size(); ++k) {
            for (std::size_t i = 0; i < p.layers[l].kernels[k].weights.size(); ++i) {
                coords.push_back(&p.layers[l].kernels[k].weights[i]);
                flat.push_back(analytic.layers[l][k].weights[i]);
            }
            coords.push_back(&p.layers[l].kernels[k].bias);
            flat.push_back(analytic.layers[l][k].bias);
        }
    }
    const auto fd = central_differences(coords, [&] { return loss(forward(x, p).output, target, hp).total; });
    CHECK(relative_error(flat, fd) < 1e-5);
}

TEST_CASE("train: zero epochs returns the initialization") {
    HyperParams hp = tiny_hp();
    hp.epochs = 0;
    const TrainResult r = train(random_pairs(2, 8, 1), tiny_spec(), hp);
    CHECK(r.params == init_params(tiny_spec(), hp.seed, hp.init_std));
    CHECK(r.report.epochs.empty());
}

TEST_CASE("train: rejects an empty patch set") {
    CHECK_THROWS_AS(train(PatchSet{}, tiny_spec(), tiny_hp()), ConfigError);
}

TEST_CASE("train: memorizes four identical pairs") {
    std::mt19937_64 rng(9);
    const ImageMatrix x = random_matrix(10, 10, rng, 0.0, 1.0);
    PatchSet four;
    for (int i = 0; i < 4; ++i) {
        four.pairs.push_back({x, x});
    }
    HyperParams hp = tiny_hp();
    hp.eta = 3e-3;
    hp.alpha = 0.0;
    hp.beta = 0.0;
    hp.epochs = 500;
    const double initial = loss(forward(four.pairs[0].input, init_params(tiny_spec(), hp.seed, hp.init_std)).output,
                                four.pairs[0].target, hp)
                               .mse;
    const TrainResult r = train(four, tiny_spec(), hp);
    const double final_mse = loss(forward(four.pairs[0].input, r.params).output, four.pairs[0].target, hp).mse;
    CHECK(r.report.epochs.size() == 500);
    CHECK(final_mse < 0.01 * initial);
}

TEST_CASE("train: bit-identical for the same seed and data") {
    const PatchSet set = random_pairs(5, 10, 10);
    const HyperParams hp = tiny_hp();
    const TrainResult a = train(set, tiny_spec(), hp);
    const TrainResult b = train(set, tiny_spec(), hp);
    CHECK(serialize_checkpoint(a.params) == serialize_checkpoint(b.params));
    CHECK(report_csv(a.report) == report_csv(b.report));

    HyperParams other = hp;
    other.seed = hp.seed + 1;
    CHECK(serialize_checkpoint(train(set, tiny_spec(), other).params) != serialize_checkpoint(a.params));
}

TEST_CASE("train: zero prior weights reproduce the prior-free code path exactly") {
    const PatchSet set = random_pairs(6, 10, 11);
    HyperParams hp = tiny_hp();
    hp.alpha = 0.0;
    hp.beta = 0.0;
    TrainOptions with_priors;
    TrainOptions without_priors;
    without_priors.use_priors = false;
    const TrainResult a = train(set, tiny_spec(), hp, with_priors);
    const TrainResult b = train(set, tiny_spec(), hp, without_priors);
    CHECK(serialize_checkpoint(a.params) == serialize_checkpoint(b.params));
    CHECK(report_csv(a.report) == report_csv(b.report));
    for (const EpochStats& e : a.report.epochs) {
        CHECK(e.mean.rank_term == 0.0);
        CHECK(e.mean.sharpness_term == 0.0);
    }
}

TEST_CASE("train: divergence and the sharpness ceiling abort loudly") {
    const PatchSet set = random_pairs(4, 10, 12);
    HyperParams hp = tiny_hp();
    hp.eta = 10.0;
    hp.alpha = 0.0;
    hp.beta = 0.0;
    hp.epochs = 50;
    CHECK_THROWS_AS(train(set, tiny_spec(), hp), TrainingDiverged);

    HyperParams sharp = tiny_hp();
    sharp.beta = 1e6;
    try {
        (void)train(set, tiny_spec(), sharp);
        FAIL("expected TrainingDiverged");
    } catch (const TrainingDiverged& e) {
        CHECK(e.epoch() == 1);
    }
}

TEST_CASE("train: report has one row per epoch with consistent totals") {
    const PatchSet set = random_pairs(3, 10, 13);
    HyperParams hp = tiny_hp();
    hp.epochs = 3;
    const TrainResult r = train(set, tiny_spec(), hp);
    REQUIRE(r.report.epochs.size() == 3);
    for (const EpochStats& e : r.report.epochs) {
        CHECK(std::abs(e.mean.total - (e.mean.mse + e.mean.rank_term - e.mean.sharpness_term)) < 1e-12);
        CHECK(std::isfinite(e.val_psnr));
    }
    const std::string csv = report_csv(r.report);
    CHECK(csv.rfind("epoch,mse,rank_term,sharpness_term,total,val_psnr,seconds\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("infer: zero network and identity network") {
    std::mt19937_64 rng(14);
    const ImageMatrix x = random_matrix(6, 6, rng, 0.0, 1.0);
    const ImageMatrix zero = infer(x, init_params(srcnn_915_profile(), 1, 0.0), 2);
    CHECK(zero.rows() == 12);
    CHECK(max_abs(zero) == 0.0);

    NetworkParams id = init_params({{1, 1, 1, 1, Activation::none}}, 0, 0.0);
    id.layers[0].kernels[0].weights[0] = 1.0;
    CHECK(infer(x, id, 1) == x);
}
