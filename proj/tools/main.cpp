#include "verify.hpp"

#include "dnsp/error.hpp"
#include "dnsp/imaging.hpp"
#include "dnsp/metrics.hpp"
#include "dnsp/pgm.hpp"
#include "dnsp/plot.hpp"
#include "dnsp/priors.hpp"
#include "dnsp/run_config.hpp"
#include "dnsp/training.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace dnsp;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

std::vector<fs::path> pgm_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw IoError("not a directory: " + dir.string());
    }
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ImageMatrix> read_all(const fs::path& dir) {
    std::vector<ImageMatrix> out;
    for (const fs::path& p : pgm_files(dir)) {
        out.push_back(read_pgm(p));
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create directory " + dir.string());
    }
}

int cmd_synth(const Globals& g, std::size_t count, std::size_t size, const std::string& out_dir) {
    const std::uint64_t seed = g.seed.value_or(1);
    ensure_dir(out_dir);
    for (std::size_t i = 0; i < count; ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "phantom_%04zu.pgm", i);
        write_pgm(fs::path(out_dir) / name, synth_phantom(seed + i, size));
    }
    if (!g.quiet) {
        std::cerr << "wrote " << count << " phantoms of " << size << "x" << size << " to " << out_dir << '\n';
    }
    return exit_ok;
}

int cmd_train(const Globals& g, const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig cfg;
    if (!g.config_path.empty()) {
        cfg = load_run_config(g.config_path);
    }
    for (const auto& [key, value] : overrides) {
        cfg.set(key, value);
    }
    if (g.seed) {
        cfg.hp.seed = *g.seed;
    }
    cfg.validate();
    if (cfg.data_dir.empty() || cfg.out_dir.empty()) {
        throw ConfigError("train: data_dir and out_dir are required");
    }

    const std::vector<ImageMatrix> images = read_all(cfg.data_dir);
    if (images.empty()) {
        throw ConfigError("train: no .pgm images in " + cfg.data_dir);
    }
    PatchSet pairs = make_training_pairs(images, cfg.degradation, cfg.patch_size, cfg.stride);
    if (pairs.pairs.empty()) {
        throw ConfigError("train: every image is smaller than the patch size");
    }
    if (cfg.fraction < 1.0) {
        pairs = subsample_pairs(pairs, cfg.fraction, cfg.hp.seed);
    }
    PatchSet validation;
    TrainOptions options;
    if (!cfg.val_dir.empty()) {
        validation = make_training_pairs(read_all(cfg.val_dir), cfg.degradation, cfg.patch_size, cfg.stride);
        options.validation = &validation;
    }
    if (!g.quiet) {
        std::cerr << "training on " << pairs.pairs.size() << " patches";
        if (pairs.skipped_images > 0) {
            std::cerr << " (" << pairs.skipped_images << " undersized images skipped)";
        }
        std::cerr << '\n';
        options.on_epoch = [](const EpochStats& e) {
            std::cerr << "epoch " << e.epoch << " total " << e.mean.total << " mse " << e.mean.mse << " val_psnr "
                      << format_metric(e.val_psnr, 4) << '\n';
        };
    }

    ensure_dir(cfg.out_dir);
    write_text(fs::path(cfg.out_dir) / "config.txt", cfg.to_text());
    TrainResult result = train(pairs, profile_by_name(cfg.profile), cfg.hp, options);
    const fs::path ckpt = fs::path(cfg.out_dir) / "checkpoint.dnsp";
    save_checkpoint(result.params, ckpt);
    result.report.checkpoint_path = ckpt.string();
    std::ofstream csv(fs::path(cfg.out_dir) / "report.csv", std::ios::binary);
    result.report.write_csv(csv);
    if (!csv) {
        throw IoError("cannot write report.csv");
    }
    std::cout << "checkpoint " << ckpt.string() << '\n';
    return exit_ok;
}

int cmd_infer(const Globals& g, const std::string& checkpoint, const std::string& input, int scale,
              const std::string& output, int maxval) {
    const NetworkParams params = load_checkpoint(checkpoint);
    const ImageMatrix y = infer(read_pgm(input), params, scale);
    write_pgm(output, y, maxval);
    if (!g.quiet) {
        std::cerr << "wrote " << output << '\n';
    }
    std::cout << y.rows() << "x" << y.cols() << '\n';
    return exit_ok;
}

int cmd_eval(const std::vector<std::string>& paths) {
    if (paths.size() % 2 != 0) {
        throw ConfigError("eval: expects SR/ground-truth path pairs");
    }
    std::cout << "sr,gt,psnr,ssim\n";
    double sum_psnr = 0.0;
    double sum_ssim = 0.0;
    std::size_t good = 0;
    bool failed = false;
    for (std::size_t i = 0; i < paths.size(); i += 2) {
        std::cout << paths[i] << ',' << paths[i + 1] << ',';
        try {
            const ImageMatrix sr = read_pgm(paths[i]);
            const ImageMatrix gt = read_pgm(paths[i + 1]);
            const double p = psnr(sr, gt);
            const double s = ssim(sr, gt);
            std::cout << format_metric(p) << ',' << format_metric(s) << '\n';
            sum_psnr += p;
            sum_ssim += s;
            ++good;
        } catch (const Error& e) {
            std::cout << "error,\"" << e.what() << "\"\n";
            failed = true;
        }
    }
    if (good > 0) {
        const double n = static_cast<double>(good);
        std::cout << "mean,," << format_metric(sum_psnr / n) << ',' << format_metric(sum_ssim / n) << '\n';
    }
    return failed ? exit_failure : exit_ok;
}

int cmd_blur_sweep(const std::string& image, const std::vector<double>& sigmas, const std::string& svg) {
    const ImageMatrix img = read_pgm(image);
    std::vector<double> values;
    std::cout << "sigma,variance_of_laplacian\n";
    for (double s : sigmas) {
        values.push_back(sharpness(gaussian_blur(img, s)));
        std::cout << format_metric(s) << ',' << format_metric(values.back(), 10) << '\n';
    }
    if (!svg.empty()) {
        write_text(svg, line_plot_svg(sigmas, values, {"Variance of the Laplacian vs blur", "blur sigma (px)",
                                                       "variance of Laplacian"}));
    }
    return exit_ok;
}

int cmd_verify(const std::string& suite) {
    if (!tools::is_suite(suite)) {
        std::cerr << "unknown suite '" << suite << "' (expected gradients, svd, priors or all)\n";
        return exit_usage;
    }
    bool all_passed = true;
    std::printf("%-10s %-52s %9s %12s %10s %s\n", "suite", "check", "instances", "worst", "tolerance", "result");
    for (const tools::CheckResult& r : tools::run_suite(suite)) {
        std::printf("%-10s %-52s %9d %12.3e %10.1e %s\n", r.suite.c_str(), r.check.c_str(), r.instances, r.worst,
                    r.tolerance, r.passed ? "PASS" : "FAIL");
        all_passed = all_passed && r.passed;
    }
    return all_passed ? exit_ok : exit_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Super-resolution with rank and sharpness priors"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "key = value configuration file");
    auto* seed_opt = app.add_option("--seed", seed, "random seed");
    app.add_flag("--quiet", g.quiet, "suppress progress output");

    auto* synth = app.add_subcommand("synth", "write synthetic phantoms as PGM");
    std::size_t count = 10;
    std::size_t size = 128;
    std::string synth_out;
    synth->add_option("--count", count)->capture_default_str();
    synth->add_option("--size", size)->capture_default_str();
    synth->add_option("--out", synth_out)->required();

    auto* train_cmd = app.add_subcommand("train", "train a network on a directory of PGM images");
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<std::string> sets;
    const std::vector<std::pair<std::string, std::string>> flag_keys{
        {"--data", "data_dir"},   {"--val", "val_dir"},       {"--out", "out_dir"},     {"--epochs", "epochs"},
        {"--alpha", "alpha"},     {"--beta", "beta"},         {"--delta", "delta"},     {"--eta", "eta"},
        {"--batch-size", "batch_size"}, {"--fraction", "fraction"}, {"--profile", "profile"},
        {"--blur-sigma", "blur_sigma"}, {"--scale", "scale"}, {"--patch-size", "patch_size"},
        {"--stride", "stride"},   {"--init-std", "init_std"}};
    std::vector<std::string> flag_values(flag_keys.size());
    std::vector<CLI::Option*> flag_opts;
    for (std::size_t i = 0; i < flag_keys.size(); ++i) {
        flag_opts.push_back(train_cmd->add_option(flag_keys[i].first, flag_values[i], "sets " + flag_keys[i].second)
                                ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast));
    }
    train_cmd->add_option("--set", sets, "additional key=value overrides");

    auto* infer_cmd = app.add_subcommand("infer", "upscale an image with a trained checkpoint");
    std::string ckpt;
    std::string input;
    std::string output;
    int scale = 2;
    int maxval = 65535;
    infer_cmd->add_option("--checkpoint", ckpt)->required();
    infer_cmd->add_option("--input", input)->required();
    infer_cmd->add_option("--output", output)->required();
    infer_cmd->add_option("--scale", scale)->capture_default_str();
    infer_cmd->add_option("--maxval", maxval)->check(CLI::IsMember({255, 65535}))->capture_default_str();

    auto* eval_cmd = app.add_subcommand("eval", "PSNR and SSIM of SR/ground-truth pairs");
    std::vector<std::string> eval_paths;
    eval_cmd->add_option("paths", eval_paths, "sr1 gt1 [sr2 gt2 ...]")->required();

    auto* sweep_cmd = app.add_subcommand("blur-sweep", "variance of the Laplacian over Gaussian blur levels");
    std::string sweep_image;
    std::vector<double> sigmas;
    std::string svg;
    sweep_cmd->add_option("--image", sweep_image)->required();
    sweep_cmd->add_option("--sigmas", sigmas)->required()->delimiter(',');
    sweep_cmd->add_option("--svg", svg, "optional SVG plot path");

    auto* verify_cmd = app.add_subcommand("verify", "run the built-in property suites");
    std::string suite;
    verify_cmd->add_option("suite", suite, "gradients, svd, priors or all")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_usage;
    }
    if (seed_opt->count() > 0) {
        g.seed = seed;
    }

    try {
        if (*synth) {
            return cmd_synth(g, count, size, synth_out);
        }
        if (*train_cmd) {
            for (std::size_t i = 0; i < flag_keys.size(); ++i) {
                if (flag_opts[i]->count() > 0) {
                    overrides.emplace_back(flag_keys[i].second, flag_values[i]);
                }
            }
            for (const std::string& s : sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos) {
                    throw ConfigError("--set expects key=value, got '" + s + "'");
                }
                overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
            }
            return cmd_train(g, overrides);
        }
        if (*infer_cmd) {
            return cmd_infer(g, ckpt, input, scale, output, maxval);
        }
        if (*eval_cmd) {
            return cmd_eval(eval_paths);
        }
        if (*sweep_cmd) {
            return cmd_blur_sweep(sweep_image, sigmas, svg);
        }
        if (*verify_cmd) {
            return cmd_verify(suite);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_usage;
}
