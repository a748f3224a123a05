#pragma once

#include <filesystem>

#include "maskcraft/data/sample.hpp"

namespace maskcraft::data {

/// Binary PPM (P6, maxval 255). Values are quantized with round-to-nearest.
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Reads binary PPM (P6) or PGM (P5) files with maxval <= 255. Throws LoadError.
Image read_ppm(const std::filesystem::path& path);

}  // namespace maskcraft::data
