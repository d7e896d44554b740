#include "mpf/mpfraw.hpp"

#include <cstring>
#include <fstream>
#include <limits>

namespace mpf::raw {
namespace fs = std::filesystem;

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(bytes[pos + i]) << (8 * i));
    pos += sizeof(T);
    return value;
}

}  // namespace

std::vector<std::uint8_t> encode_header(const Header& h) {
    constexpr auto u16max = std::numeric_limits<std::uint16_t>::max();
    constexpr auto u32max = std::numeric_limits<std::uint32_t>::max();
    if (h.shape.channels == 0 || h.shape.channels > 255 || h.shape.height == 0 || h.shape.width == 0 ||
        h.shape.height > u32max || h.shape.width > u32max) {
        throw_input_error("sampling.bad_shape", "cannot encode shape " + to_string(h.shape));
    }
    if (h.fps.num == 0 || h.fps.den == 0 || h.fps.num > u16max || h.fps.den > u16max) {
        throw_input_error("sampling.bad_fps", "frame rate " + to_string(h.fps) + " does not fit the container");
    }
    std::vector<std::uint8_t> out{'M', 'P', 'F', 'R'};
    put_le<std::uint16_t>(out, kVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(h.shape.height));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(h.shape.width));
    out.push_back(static_cast<std::uint8_t>(h.shape.channels));
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(h.fps.num));
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(h.fps.den));
    put_le<std::uint32_t>(out, h.frame_count);
    return out;
}

Header decode_header(std::span<const std::uint8_t> bytes, const std::string& name) {
    if (bytes.size() < kHeaderSize) {
        throw_input_error("sampling.truncated", name + ": header needs " + std::to_string(kHeaderSize) + " bytes, got " +
                                                    std::to_string(bytes.size()));
    }
    if (std::memcmp(bytes.data(), "MPFR", 4) != 0) throw_input_error("sampling.bad_magic", name + ": not an .mpfraw container");
    std::size_t pos = 4;
    const auto version = get_le<std::uint16_t>(bytes, pos);
    if (version != kVersion) {
        throw_input_error("sampling.bad_version", name + ": unsupported container version " + std::to_string(version));
    }
    Header h;
    h.shape.height = get_le<std::uint32_t>(bytes, pos);
    h.shape.width = get_le<std::uint32_t>(bytes, pos);
    h.shape.channels = bytes[pos++];
    h.fps.num = get_le<std::uint16_t>(bytes, pos);
    h.fps.den = get_le<std::uint16_t>(bytes, pos);
    h.frame_count = get_le<std::uint32_t>(bytes, pos);
    if (h.shape.size() == 0) throw_input_error("sampling.bad_shape", name + ": zero-sized frames");
    if (h.fps.num == 0 || h.fps.den == 0) throw_input_error("sampling.bad_fps", name + ": zero frame rate");
    return h;
}

Header read_header(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_input_error("sampling.missing_path", "cannot open " + path.string());
    std::vector<std::uint8_t> buf(kHeaderSize);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    buf.resize(static_cast<std::size_t>(in.gcount()));
    Header h = decode_header(buf, path.filename().string());

    std::error_code ec;
    const auto file_size = fs::file_size(path, ec);
    const auto expected = kHeaderSize + static_cast<std::uintmax_t>(h.frame_count) * h.shape.size();
    if (!ec && file_size != expected) {
        throw_input_error("sampling.size_mismatch", path.filename().string() + ": expected " + std::to_string(expected) +
                                                        " bytes, found " + std::to_string(file_size));
    }
    return h;
}

std::vector<Frame> read_frames(const fs::path& path, const Header& header, std::size_t first, std::size_t count) {
    if (first + count > header.frame_count) {
        throw_input_error("sampling.bad_window", "requested frames beyond the end of " + path.filename().string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_input_error("sampling.missing_path", "cannot open " + path.string());
    const std::size_t frame_bytes = header.shape.size();
    in.seekg(static_cast<std::streamoff>(kHeaderSize + first * frame_bytes));
    std::vector<Frame> frames(count, Frame(frame_bytes));
    for (std::size_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(frames[i].data()), static_cast<std::streamsize>(frame_bytes));
        if (static_cast<std::size_t>(in.gcount()) != frame_bytes) {
            throw_input_error("sampling.truncated", path.filename().string() + ": frame " + std::to_string(first + i) +
                                                        " is truncated");
        }
    }
    return frames;
}

void write(const fs::path& path, const Shape& shape, Rational fps, std::span<const Frame> frames) {
    if (frames.size() > std::numeric_limits<std::uint32_t>::max()) throw_input_error("sampling.too_many_frames", "frame count overflow");
    for (const auto& f : frames) {
        if (f.size() != shape.size()) throw_input_error("sampling.dimension_mismatch", "frame size does not match " + to_string(shape));
    }
    const auto header = encode_header({shape, fps, static_cast<std::uint32_t>(frames.size())});
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_input_error("io.unwritable", "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
    for (const auto& f : frames) out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size()));
    if (!out) throw_input_error("io.write_failed", "failed writing " + path.string());
}

}  // namespace mpf::raw
