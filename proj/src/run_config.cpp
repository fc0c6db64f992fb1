#include "dnsp/run_config.hpp"

#include "dnsp/error.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace dnsp {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end || value.empty()) {
        throw ConfigError("config: bad value for '" + key + "': '" + value + "'");
    }
    return out;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), ptr};
}

} // namespace

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> k{
        "delta",      "alpha",  "beta",     "eta",      "batch_size", "epochs",  "seed",
        "eta_last_layer_ratio", "init_std", "sharpness_ceiling",      "blur_sigma", "scale",
        "profile",    "patch_size", "stride", "fraction", "data_dir", "val_dir", "out_dir"};
    return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "delta") {
        hp.delta = parse_number<double>(key, value);
    } else if (key == "alpha") {
        hp.alpha = parse_number<double>(key, value);
    } else if (key == "beta") {
        hp.beta = parse_number<double>(key, value);
    } else if (key == "eta") {
        hp.eta = parse_number<double>(key, value);
    } else if (key == "batch_size") {
        hp.batch_size = parse_number<std::size_t>(key, value);
    } else if (key == "epochs") {
        hp.epochs = parse_number<int>(key, value);
    } else if (key == "seed") {
        hp.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "eta_last_layer_ratio") {
        hp.eta_last_layer_ratio = parse_number<double>(key, value);
    } else if (key == "init_std") {
        hp.init_std = parse_number<double>(key, value);
    } else if (key == "sharpness_ceiling") {
        hp.sharpness_ceiling = parse_number<double>(key, value);
    } else if (key == "blur_sigma") {
        degradation.blur_sigma = parse_number<double>(key, value);
    } else if (key == "scale") {
        degradation.scale = parse_number<int>(key, value);
    } else if (key == "profile") {
        profile = value;
    } else if (key == "patch_size") {
        patch_size = parse_number<std::size_t>(key, value);
    } else if (key == "stride") {
        stride = parse_number<std::size_t>(key, value);
    } else if (key == "fraction") {
        fraction = parse_number<double>(key, value);
    } else if (key == "data_dir") {
        data_dir = value;
    } else if (key == "val_dir") {
        val_dir = value;
    } else if (key == "out_dir") {
        out_dir = value;
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

void RunConfig::validate() const {
    hp.validate();
    degradation.validate();
    (void)profile_by_name(profile);
    if (patch_size < 3 || stride == 0) {
        throw ConfigError("config: patch_size must be >= 3 and stride >= 1");
    }
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ConfigError("config: fraction must lie in (0, 1]");
    }
}

std::string RunConfig::to_text() const {
    std::ostringstream os;
    os << "delta = " << format_double(hp.delta) << '\n'
       << "alpha = " << format_double(hp.alpha) << '\n'
       << "beta = " << format_double(hp.beta) << '\n'
       << "eta = " << format_double(hp.eta) << '\n'
       << "batch_size = " << hp.batch_size << '\n'
       << "epochs = " << hp.epochs << '\n'
       << "seed = " << hp.seed << '\n'
       << "eta_last_layer_ratio = " << format_double(hp.eta_last_layer_ratio) << '\n'
       << "init_std = " << format_double(hp.init_std) << '\n'
       << "sharpness_ceiling = " << format_double(hp.sharpness_ceiling) << '\n'
       << "blur_sigma = " << format_double(degradation.blur_sigma) << '\n'
       << "scale = " << degradation.scale << '\n'
       << "profile = " << profile << '\n'
       << "patch_size = " << patch_size << '\n'
       << "stride = " << stride << '\n'
       << "fraction = " << format_double(fraction) << '\n'
       << "data_dir = " << data_dir << '\n'
       << "val_dir = " << val_dir << '\n'
       << "out_dir = " << out_dir << '\n';
    return os.str();
}

RunConfig parse_run_config(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
        }
        try {
            base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
        }
    }
    return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read config " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), std::move(base));
}

} // namespace dnsp
