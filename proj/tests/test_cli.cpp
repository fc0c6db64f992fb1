#include "dnsp/imaging.hpp"
#include "dnsp/metrics.hpp"
#include "dnsp/network.hpp"
#include "dnsp/pgm.hpp"
#include "dnsp/run_config.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace dnsp;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(DNSP_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
        r.out.append(buf, n);
    }
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dnsp_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) {
        out.push_back(line);
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        out.push_back(cur);
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

std::string quick_train_args(const fs::path& data, const fs::path& out) {
    return "train --data " + data.string() + " --out " + out.string() +
           " --epochs 1 --profile tiny --patch-size 32 --stride 32 --batch-size 2";
}

} // namespace

TEST_CASE("cli synth: count, size, naming and determinism") {
    const fs::path a = scratch("synth_a");
    const fs::path b = scratch("synth_b");
    REQUIRE(run("--seed 5 --quiet synth --count 3 --size 64 --out " + a.string()).code == 0);
    REQUIRE(run("--seed 5 --quiet synth --count 3 --size 64 --out " + b.string()).code == 0);
    for (int i = 0; i < 3; ++i) {
        const std::string name = "phantom_000" + std::to_string(i) + ".pgm";
        const ImageMatrix img = read_pgm(a / name);
        CHECK(img.rows() == 64);
        CHECK(img.cols() == 64);
        CHECK(slurp(a / name) == slurp(b / name));
    }
    CHECK(std::distance(fs::directory_iterator(a), fs::directory_iterator{}) == 3);

    const fs::path empty = scratch("synth_empty");
    CHECK(run("synth --count 0 --out " + empty.string()).code == 0);
    CHECK(fs::is_empty(empty));
}

TEST_CASE("cli train: smoke run writes checkpoint, report and resolved config") {
    const fs::path data = scratch("train_data");
    const fs::path out = scratch("train_out");
    REQUIRE(run("--quiet synth --count 4 --size 64 --out " + data.string()).code == 0);
    const Run r = run("--quiet " + quick_train_args(data, out));
    REQUIRE(r.code == 0);
    CHECK_NOTHROW(load_checkpoint(out / "checkpoint.dnsp"));
    const auto report = lines_of(slurp(out / "report.csv"));
    REQUIRE(report.size() == 2);
    CHECK(report[0] == "epoch,mse,rank_term,sharpness_term,total,val_psnr,seconds");

    const RunConfig echoed = load_run_config(out / "config.txt");
    CHECK(echoed.hp.epochs == 1);
    CHECK(echoed.profile == "tiny");
    CHECK(echoed.data_dir == data.string());
    CHECK(echoed.to_text() == slurp(out / "config.txt"));

    const fs::path sr = out / "sr.pgm";
    const Run inf = run("infer --checkpoint " + (out / "checkpoint.dnsp").string() + " --input " +
                        (data / "phantom_0000.pgm").string() + " --scale 2 --output " + sr.string());
    CHECK(inf.code == 0);
    CHECK(inf.out == "128x128\n");
    CHECK(read_pgm(sr).rows() == 128);
}

TEST_CASE("cli train: zero prior weights give zero prior columns") {
    const fs::path data = scratch("ablation_data");
    const fs::path out = scratch("ablation_out");
    REQUIRE(run("--quiet synth --count 4 --size 64 --out " + data.string()).code == 0);
    REQUIRE(run("--quiet " + quick_train_args(data, out) + " --epochs 2 --alpha 0 --beta 0").code == 0);
    const auto report = lines_of(slurp(out / "report.csv"));
    REQUIRE(report.size() == 3);
    for (std::size_t i = 1; i < report.size(); ++i) {
        const auto cols = split(report[i], ',');
        CHECK(std::stod(cols[2]) == 0.0);
        CHECK(std::stod(cols[3]) == 0.0);
    }
}

TEST_CASE("cli train: config file, flag precedence and unknown keys") {
    const fs::path data = scratch("cfg_data");
    const fs::path out = scratch("cfg_out");
    REQUIRE(run("--quiet synth --count 2 --size 64 --out " + data.string()).code == 0);
    const fs::path cfg = out / "in.cfg";
    std::ofstream(cfg) << "# comment line\nepochs = 7\nalpha = 0.25  # trailing comment\nprofile = tiny\n";
    REQUIRE(run("--quiet --config " + cfg.string() + " --seed 9 " + quick_train_args(data, out)).code == 0);
    const RunConfig echoed = load_run_config(out / "config.txt");
    CHECK(echoed.hp.epochs == 1);
    CHECK(echoed.hp.alpha == 0.25);
    CHECK(echoed.hp.seed == 9);

    const fs::path bad = out / "bad.cfg";
    std::ofstream(bad) << "epochz = 3\n";
    CHECK(run("--config " + bad.string() + " " + quick_train_args(data, out)).code == 2);
    CHECK(run(quick_train_args(data, out) + " --set learning_rate=1").code == 2);
}

TEST_CASE("cli train: fraction subsampling is seeded and deterministic") {
    const fs::path data = scratch("frac_data");
    const fs::path a = scratch("frac_a");
    const fs::path b = scratch("frac_b");
    const fs::path c = scratch("frac_c");
    REQUIRE(run("--quiet synth --count 4 --size 64 --out " + data.string()).code == 0);
    REQUIRE(run("--quiet " + quick_train_args(data, a) + " --fraction 0.5").code == 0);
    REQUIRE(run("--quiet " + quick_train_args(data, b) + " --fraction 0.5").code == 0);
    REQUIRE(run("--quiet " + quick_train_args(data, c) + " --fraction 0.75").code == 0);
    CHECK(slurp(a / "checkpoint.dnsp") == slurp(b / "checkpoint.dnsp"));
    CHECK(slurp(a / "checkpoint.dnsp") != slurp(c / "checkpoint.dnsp"));
    CHECK(run(quick_train_args(data, a) + " --fraction 0").code == 2);
}

TEST_CASE("cli train: failures map to exit codes") {
    const fs::path data = scratch("fail_data");
    const fs::path empty = scratch("fail_empty");
    const fs::path out = scratch("fail_out");
    REQUIRE(run("--quiet synth --count 2 --size 64 --out " + data.string()).code == 0);
    CHECK(run("--quiet " + quick_train_args(empty, out)).code == 2);
    const std::string cmd = std::string(DNSP_CLI) + " --quiet " + quick_train_args(data, out) +
                            " --epochs 20 --eta 1000 --init-std 0.5 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string msg;
    char buf[512];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
        msg.append(buf, n);
    }
    const int status = pclose(pipe);
    CHECK(WEXITSTATUS(status) == 1);
    CHECK(msg.find("diverged in epoch") != std::string::npos);
}

TEST_CASE("cli infer: zero checkpoint, shapes and corrupt files") {
    const fs::path dir = scratch("infer");
    write_pgm(dir / "in.pgm", synth_phantom(3, 64));
    save_checkpoint(init_params(profile_by_name("tiny"), 1, 0.0), dir / "zero.dnsp");
    const Run r = run("infer --checkpoint " + (dir / "zero.dnsp").string() + " --input " + (dir / "in.pgm").string() +
                      " --scale 2 --output " + (dir / "out.pgm").string());
    REQUIRE(r.code == 0);
    const ImageMatrix out = read_pgm(dir / "out.pgm");
    CHECK(out.rows() == 128);
    CHECK(out.cols() == 128);
    CHECK(max_abs(out) == 0.0);

    std::ofstream(dir / "bad.dnsp") << "NOPE not a checkpoint";
    CHECK(run("infer --checkpoint " + (dir / "bad.dnsp").string() + " --input " + (dir / "in.pgm").string() +
              " --output " + (dir / "x.pgm").string())
              .code == 1);
}

TEST_CASE("cli eval: identity, mean row, sanity band and mismatches") {
    const fs::path dir = scratch("eval");
    const ImageMatrix gt = synth_phantom(8, 128);
    write_pgm(dir / "gt.pgm", gt);
    write_pgm(dir / "bic.pgm", degrade_and_enlarge(gt, {1.0, 2}));
    write_pgm(dir / "small.pgm", synth_phantom(8, 64));

    const Run same = run("eval " + (dir / "gt.pgm").string() + " " + (dir / "gt.pgm").string());
    REQUIRE(same.code == 0);
    const auto rows = lines_of(same.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "sr,gt,psnr,ssim");
    CHECK(split(rows[1], ',')[2] == "inf");
    CHECK(std::stod(split(rows[1], ',')[3]) == 1.0);

    const Run two = run("eval " + (dir / "bic.pgm").string() + " " + (dir / "gt.pgm").string() + " " +
                        (dir / "gt.pgm").string() + " " + (dir / "bic.pgm").string());
    REQUIRE(two.code == 0);
    const auto t = lines_of(two.out);
    REQUIRE(t.size() == 4);
    const double p1 = std::stod(split(t[1], ',')[2]);
    const double p2 = std::stod(split(t[2], ',')[2]);
    const double s1 = std::stod(split(t[1], ',')[3]);
    const double s2 = std::stod(split(t[2], ',')[3]);
    CHECK(p1 > 20.0);
    CHECK(p1 < 40.0);
    CHECK(split(t[3], ',')[0] == "mean");
    CHECK(std::stod(split(t[3], ',')[2]) == doctest::Approx((p1 + p2) / 2).epsilon(1e-5));
    CHECK(std::stod(split(t[3], ',')[3]) == doctest::Approx((s1 + s2) / 2).epsilon(1e-5));

    const Run bad = run("eval " + (dir / "small.pgm").string() + " " + (dir / "gt.pgm").string());
    CHECK(bad.code == 1);
    CHECK(lines_of(bad.out)[1].find(",error,") != std::string::npos);
    CHECK(run("eval " + (dir / "gt.pgm").string()).code == 2);
}

TEST_CASE("cli blur-sweep: trend, order and plot") {
    const fs::path dir = scratch("sweep");
    write_pgm(dir / "p.pgm", synth_phantom(21, 128));
    const Run r = run("blur-sweep --image " + (dir / "p.pgm").string() + " --sigmas 0.5,1,1.5,2,2.5 --svg " +
                      (dir / "p.svg").string());
    REQUIRE(r.code == 0);
    const auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == "sigma,variance_of_laplacian");
    for (std::size_t i = 2; i < rows.size(); ++i) {
        CHECK(std::stod(split(rows[i], ',')[1]) < std::stod(split(rows[i - 1], ',')[1]));
    }
    CHECK(slurp(dir / "p.svg").rfind("<svg", 0) == 0);

    const auto single = lines_of(run("blur-sweep --image " + (dir / "p.pgm").string() + " --sigmas 1.5").out);
    CHECK(single.size() == 2);
    const auto unsorted = lines_of(run("blur-sweep --image " + (dir / "p.pgm").string() + " --sigmas 2,0.5,1").out);
    REQUIRE(unsorted.size() == 4);
    CHECK(std::stod(split(unsorted[1], ',')[0]) == 2.0);
    CHECK(std::stod(split(unsorted[2], ',')[0]) == 0.5);
    CHECK(std::stod(split(unsorted[3], ',')[0]) == 1.0);
}

TEST_CASE("cli verify and usage errors") {
    const Run svd = run("verify svd");
    CHECK(svd.code == 0);
    CHECK(svd.out.find("FAIL") == std::string::npos);
    const Run grads = run("verify gradients");
    CHECK(grads.code == 0);
    CHECK(run("verify bogus").code == 2);
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
}
