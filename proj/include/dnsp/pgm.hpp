#pragma once

#include "dnsp/tensor.hpp"

#include <filesystem>
#include <string>

namespace dnsp {

/// Binary PGM (P5) with maxval 255 or 65535; samples map linearly to [0, 1].
ImageMatrix decode_pgm(const std::string& bytes);
/// Intensities are clamped to [0, 1] and rounded to the nearest level.
std::string encode_pgm(const ImageMatrix& img, int maxval = 65535);

ImageMatrix read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const ImageMatrix& img, int maxval = 65535);

} // namespace dnsp
