#include "dnsp/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dnsp {

namespace {

class HeaderParser {
public:
    explicit HeaderParser(const std::string& bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char ch = bytes_[pos_];
            if (ch == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(static_cast<unsigned char>(ch)) != 0) {
                ++pos_;
            } else {
                return;
            }
        }
    }

    unsigned long number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        unsigned long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_])) != 0) {
            v = v * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
            if (v > 1'000'000'000UL) {
                throw FormatError(std::string("PGM: ") + what + " out of range");
            }
            ++pos_;
        }
        if (pos_ == start) {
            throw FormatError(std::string("PGM: expected ") + what);
        }
        return v;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || std::isspace(static_cast<unsigned char>(bytes_[pos_])) == 0) {
            throw FormatError("PGM: missing whitespace before raster");
        }
        return pos_ + 1;
    }

private:
    const std::string& bytes_;
    std::size_t pos_ = 2; // past the "P5" magic
};

} // namespace

ImageMatrix decode_pgm(const std::string& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw FormatError("PGM: not a binary P5 file");
    }
    HeaderParser h(bytes);
    const unsigned long width = h.number("width");
    const unsigned long height = h.number("height");
    const unsigned long maxval = h.number("maxval");
    if (width == 0 || height == 0) {
        throw FormatError("PGM: zero-sized image");
    }
    if (maxval != 255 && maxval != 65535) {
        throw FormatError("PGM: unsupported maxval " + std::to_string(maxval) + " (expected 255 or 65535)");
    }
    const std::size_t start = h.raster_start();
    const std::size_t bps = maxval == 255 ? 1 : 2;
    const std::size_t count = width * height;
    if (bytes.size() < start + count * bps) {
        throw FormatError("PGM: raster truncated");
    }
    ImageMatrix img(height, width);
    auto out = img.data();
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data() + start);
    const auto scale = static_cast<double>(maxval);
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned v = bps == 1 ? raw[i] : (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
        out[i] = static_cast<double>(v) / scale;
    }
    return img;
}

std::string encode_pgm(const ImageMatrix& img, int maxval) {
    if (maxval != 255 && maxval != 65535) {
        throw ConfigError("PGM: maxval must be 255 or 65535");
    }
    std::string out = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n" + std::to_string(maxval) + "\n";
    const auto scale = static_cast<double>(maxval);
    for (double v : img.data()) {
        const double clamped = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
        const auto q = static_cast<unsigned>(std::lround(clamped * scale));
        if (maxval == 65535) {
            out.push_back(static_cast<char>(q >> 8));
        }
        out.push_back(static_cast<char>(q & 0xFF));
    }
    return out;
}

ImageMatrix read_pgm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    try {
        return decode_pgm(ss.str());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_pgm(const std::filesystem::path& path, const ImageMatrix& img, int maxval) {
    const std::string bytes = encode_pgm(img, maxval);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) {
        throw IoError("failed writing " + path.string());
    }
}

} // namespace dnsp
