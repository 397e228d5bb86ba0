#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "orsim/imaging.hpp"

namespace orsim {

// Reads 8-bit PNG or binary PPM (P6) / PGM (P5). Values are scaled to [0,1];
// RGB input gives 3 channels, grayscale 1. Alpha is dropped.
// Throws IoError when the file cannot be read and FormatError for anything
// other than 8-bit samples.
RasterImage load_image(const std::filesystem::path& path);

// Writes an 8-bit file chosen by extension (.png, .ppm, .pgm). Values are
// clamped to [0,1] and rounded to the nearest of 256 levels.
void save_image(const std::filesystem::path& path, const RasterImage& img);

// Debug dump of one real plane as PGM, value * 255 clamped to [0,255].
void write_pgm(const std::filesystem::path& path, std::span<const double> plane, int width,
               int height);

// Image files in a directory with a supported extension, sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace orsim
