#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stitch/frame.hpp"

namespace stitch {

// PPM (P6, maxval 255). Writes are bit-exact round trips of the raster.
Frame read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Frame& frame);

// 8-bit RGB PNG. An alpha channel on read becomes the validity mask
// (alpha 0 = invalid); frames with a mask write RGBA.
Frame read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Frame& frame);

/// Dispatches on extension (.png, .ppm).
Frame read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Frame& frame);

/// Numbered image files of a sequence directory, sorted by name.
std::vector<std::filesystem::path> list_sequence(
    const std::filesystem::path& dir);

/// Zero-padded sequence file name, e.g. stem="pano", index 3 -> pano_000003.png
std::string sequence_name(const std::string& stem, int index,
                          const std::string& ext = ".png");

}  // namespace stitch
