#include "dnsp/network.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dnsp {

namespace {

constexpr char magic[4] = {'D', 'N', 'S', 'P'};

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
    }
}

class Reader {
public:
    Reader(const std::string& bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

    template <typename T>
    T get_le(const char* what) {
        need(sizeof(T), what);
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return v;
    }

    double get_double(const char* what) { return std::bit_cast<double>(get_le<std::uint64_t>(what)); }

    void need(std::size_t n, const char* what) const {
        if (pos_ + n > bytes_.size()) {
            throw FormatError(std::string("checkpoint truncated while reading ") + what);
        }
    }

    [[nodiscard]] bool at_end() const { return pos_ == bytes_.size(); }

private:
    const std::string& bytes_;
    std::size_t pos_;
};

} // namespace

std::string serialize_checkpoint(const NetworkParams& params) {
    std::string out(magic, sizeof(magic));
    put_le<std::uint16_t>(out, checkpoint_version);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(params.layers.size()));
    for (const Layer& layer : params.layers) {
        const LayerSpec& s = layer.spec;
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.kernel_height));
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.kernel_width));
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.input_depth));
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.kernel_count));
        put_le<std::uint8_t>(out, static_cast<std::uint8_t>(s.activation));
        for (const ConvKernel& k : layer.kernels) {
            for (double w : k.weights) {
                put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(w));
            }
            put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(k.bias));
        }
    }
    return out;
}

NetworkParams deserialize_checkpoint(const std::string& bytes) {
    if (bytes.size() < sizeof(magic) || std::memcmp(bytes.data(), magic, sizeof(magic)) != 0) {
        throw FormatError("checkpoint: bad magic (expected \"DNSP\")");
    }
    Reader in(bytes, sizeof(magic));
    const auto version = in.get_le<std::uint16_t>("version");
    if (version != checkpoint_version) {
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto layer_count = in.get_le<std::uint16_t>("layer count");
    NetworkParams p;
    for (std::uint16_t l = 0; l < layer_count; ++l) {
        LayerSpec s;
        s.kernel_height = in.get_le<std::uint32_t>("kernel height");
        s.kernel_width = in.get_le<std::uint32_t>("kernel width");
        s.input_depth = in.get_le<std::uint32_t>("input depth");
        s.kernel_count = in.get_le<std::uint32_t>("kernel count");
        const auto tag = in.get_le<std::uint8_t>("activation");
        if (tag > static_cast<std::uint8_t>(Activation::relu)) {
            throw FormatError("checkpoint: unknown activation tag " + std::to_string(tag));
        }
        s.activation = static_cast<Activation>(tag);
        if (s.kernel_height == 0 || s.kernel_width == 0 || s.input_depth == 0 || s.kernel_count == 0) {
            throw FormatError("checkpoint: zero-sized layer " + std::to_string(l));
        }
        const std::size_t per_kernel = s.kernel_height * s.kernel_width * s.input_depth;
        in.need(s.kernel_count * (per_kernel + 1) * sizeof(double), "weights");
        Layer layer{s, {}};
        for (std::size_t k = 0; k < s.kernel_count; ++k) {
            ConvKernel kernel(s.kernel_height, s.kernel_width, s.input_depth);
            for (double& w : kernel.weights) {
                w = in.get_double("weight");
            }
            kernel.bias = in.get_double("bias");
            layer.kernels.push_back(std::move(kernel));
        }
        p.layers.push_back(std::move(layer));
    }
    if (!in.at_end()) {
        throw FormatError("checkpoint: trailing bytes after last layer");
    }
    try {
        validate_spec(p.spec());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
    return p;
}

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    const std::string bytes = serialize_checkpoint(params);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) {
        throw IoError("failed writing " + path.string());
    }
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return deserialize_checkpoint(ss.str());
}

} // namespace dnsp
