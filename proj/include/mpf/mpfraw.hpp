#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mpf/common.hpp"

namespace mpf::raw {

// .mpfraw layout, all integers little-endian:
//   magic "MPFR" | version u16 (=1) | height u32 | width u32 | channels u8 |
//   fps_num u16 | fps_den u16 | frame_count u32 | frames (row-major, interleaved u8)
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 23;

struct Header {
    Shape shape;
    Rational fps;
    std::uint32_t frame_count = 0;
};

std::vector<std::uint8_t> encode_header(const Header& header);
Header decode_header(std::span<const std::uint8_t> bytes, const std::string& name);

Header read_header(const std::filesystem::path& path);

/// Reads `count` frames starting at `first`. Fails if the file is too short.
std::vector<Frame> read_frames(const std::filesystem::path& path, const Header& header, std::size_t first,
                               std::size_t count);

void write(const std::filesystem::path& path, const Shape& shape, Rational fps, std::span<const Frame> frames);

}  // namespace mpf::raw
