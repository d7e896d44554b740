#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mpf/common.hpp"

namespace mpf::io {

struct Image8 {
    Shape shape;
    std::vector<std::uint8_t> pixels;
};

struct Image16 {
    Shape shape;
    std::vector<std::uint16_t> pixels;
};

/// Decodes a PNG, PPM (P6) or PGM (P5) file to 8-bit RGB. Grayscale is
/// replicated to three channels, alpha is dropped, 16-bit samples are scaled.
Image8 read_rgb8(const std::filesystem::path& path);

/// Writes an 8-bit PNG with 1 (gray), 3 (RGB) or 4 (RGBA) channels.
void write_png8(const std::filesystem::path& path, const Shape& shape, std::span<const std::uint8_t> pixels);

/// Writes a 16-bit PNG (gray or RGB); samples are stored big-endian as PNG requires.
void write_png16(const std::filesystem::path& path, const Shape& shape, std::span<const std::uint16_t> pixels);

/// Reads a 16-bit (or 8-bit, widened by 257) gray or RGB PNG without colour conversion.
Image16 read_png16(const std::filesystem::path& path);

/// Writes binary PPM (3 channels) or PGM (1 channel).
void write_pnm(const std::filesystem::path& path, const Shape& shape, std::span<const std::uint8_t> pixels);

}  // namespace mpf::io
