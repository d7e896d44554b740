#include "mpf/image_io.hpp"

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

namespace mpf::io {
namespace fs = std::filesystem;

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
    return FilePtr(std::fopen(path.c_str(), mode));
}

void png_error_fn(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void png_warning_fn(png_structp, png_const_charp) {}

struct RawPng {
    Shape shape;
    int depth = 8;
    std::vector<std::uint8_t> bytes;
};

// Reads rows with palette and low-bit-depth expansion only; no colour conversion.
RawPng read_png_raw(const fs::path& path) {
    FilePtr fp = open_file(path, "rb");
    if (!fp) throw_input_error("io.missing", "cannot open " + path.string());
    png_byte signature[8];
    if (std::fread(signature, 1, 8, fp.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
        throw_input_error("io.undecodable", path.filename().string() + " is not a PNG file");
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::bad_alloc();
    }
    RawPng out;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw_input_error("io.undecodable", "corrupt PNG data in " + path.filename().string());
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    png_set_expand(png);
    png_read_update_info(png, info);

    out.shape.width = png_get_image_width(png, info);
    out.shape.height = png_get_image_height(png, info);
    out.shape.channels = png_get_channels(png, info);
    out.depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    out.bytes.resize(rowbytes * out.shape.height);
    rows.resize(out.shape.height);
    for (std::size_t y = 0; y < out.shape.height; ++y) rows[y] = out.bytes.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_png_raw(const fs::path& path, const Shape& shape, int depth, const std::uint8_t* bytes) {
    int color_type = 0;
    switch (shape.channels) {
        case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
        case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
        case 3: color_type = PNG_COLOR_TYPE_RGB; break;
        case 4: color_type = PNG_COLOR_TYPE_RGB_ALPHA; break;
        default:
            throw_input_error("io.bad_channels", "cannot write " + std::to_string(shape.channels) + "-channel PNG");
    }
    FilePtr fp = open_file(path, "wb");
    if (!fp) throw_input_error("io.unwritable", "cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::bad_alloc();
    }
    const std::size_t rowbytes = shape.width * shape.channels * static_cast<std::size_t>(depth / 8);
    std::vector<png_bytep> rows(shape.height);
    for (std::size_t y = 0; y < shape.height; ++y) rows[y] = const_cast<png_bytep>(bytes + y * rowbytes);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw_input_error("io.write_failed", "failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(shape.width), static_cast<png_uint_32>(shape.height), depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // Fixed compression settings keep output byte-identical across runs.
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image8 to_rgb8(const Shape& src_shape, int depth, std::span<const std::uint8_t> bytes, const fs::path& path) {
    const std::size_t c = src_shape.channels;
    if (c < 1 || c > 4) throw_input_error("io.bad_channels", path.filename().string() + " has unsupported channel count");
    const std::size_t stride = depth == 16 ? 2 : 1;
    auto sample = [&](std::size_t i) -> std::uint8_t {
        if (stride == 1) return bytes[i];
        const unsigned v = (static_cast<unsigned>(bytes[2 * i]) << 8) | bytes[2 * i + 1];
        return static_cast<std::uint8_t>((v * 255u + 32767u) / 65535u);
    };
    Image8 img;
    img.shape = {src_shape.height, src_shape.width, 3};
    img.pixels.resize(img.shape.size());
    for (std::size_t p = 0; p < src_shape.pixels(); ++p) {
        for (std::size_t k = 0; k < 3; ++k) {
            // gray / gray+alpha replicate channel 0; RGB / RGBA take k.
            const std::size_t src = c <= 2 ? 0 : k;
            img.pixels[p * 3 + k] = sample(p * c + src);
        }
    }
    return img;
}

std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return ext;
}

// Netpbm header token, skipping whitespace and '#' comments.
bool next_pnm_token(std::istream& in, std::string& token) {
    token.clear();
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (std::isspace(ch)) {
            ch = in.get();
        } else {
            break;
        }
    }
    while (ch != EOF && !std::isspace(ch)) {
        token.push_back(static_cast<char>(ch));
        ch = in.get();
    }
    return !token.empty();
}

Image8 read_pnm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_input_error("io.missing", "cannot open " + path.string());
    const std::string name = path.filename().string();
    std::string magic, tw, th, tmax;
    if (!next_pnm_token(in, magic) || (magic != "P5" && magic != "P6")) {
        throw_input_error("io.undecodable", name + " is not a binary PGM/PPM file");
    }
    if (!next_pnm_token(in, tw) || !next_pnm_token(in, th) || !next_pnm_token(in, tmax)) {
        throw_input_error("io.undecodable", name + " has a truncated header");
    }
    std::size_t w = 0, h = 0;
    unsigned long maxval = 0;
    try {
        w = std::stoul(tw);
        h = std::stoul(th);
        maxval = std::stoul(tmax);
    } catch (const std::logic_error&) {
        throw_input_error("io.undecodable", name + " has a malformed header");
    }
    if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) throw_input_error("io.undecodable", name + " has invalid dimensions");
    const Shape src{h, w, magic == "P6" ? 3u : 1u};
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    std::vector<std::uint8_t> raw(src.size() * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw_input_error("io.undecodable", name + " has truncated pixel data");

    Image8 img;
    img.shape = {h, w, 3};
    img.pixels.resize(img.shape.size());
    for (std::size_t p = 0; p < src.pixels(); ++p) {
        for (std::size_t k = 0; k < 3; ++k) {
            const std::size_t i = p * src.channels + (src.channels == 1 ? 0 : k);
            unsigned v = bytes_per == 1 ? raw[i] : ((static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1]);
            img.pixels[p * 3 + k] = static_cast<std::uint8_t>((v * 255u + maxval / 2) / maxval);
        }
    }
    return img;
}

}  // namespace

Image8 read_rgb8(const fs::path& path) {
    if (!fs::exists(path)) throw_input_error("io.missing", "no such file " + path.string());
    const std::string ext = lower_extension(path);
    if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return read_pnm(path);
    RawPng raw = read_png_raw(path);
    return to_rgb8(raw.shape, raw.depth, raw.bytes, path);
}

void write_png8(const fs::path& path, const Shape& shape, std::span<const std::uint8_t> pixels) {
    if (pixels.size() != shape.size()) throw_input_error("io.size_mismatch", "pixel buffer does not match shape");
    write_png_raw(path, shape, 8, pixels.data());
}

void write_png16(const fs::path& path, const Shape& shape, std::span<const std::uint16_t> pixels) {
    if (pixels.size() != shape.size()) throw_input_error("io.size_mismatch", "pixel buffer does not match shape");
    std::vector<std::uint8_t> be(pixels.size() * 2);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        be[2 * i] = static_cast<std::uint8_t>(pixels[i] >> 8);
        be[2 * i + 1] = static_cast<std::uint8_t>(pixels[i] & 0xFF);
    }
    write_png_raw(path, shape, 16, be.data());
}

Image16 read_png16(const fs::path& path) {
    RawPng raw = read_png_raw(path);
    if (raw.shape.channels != 1 && raw.shape.channels != 3) {
        throw_input_error("io.bad_channels", path.filename().string() + " must be gray or RGB");
    }
    Image16 img;
    img.shape = raw.shape;
    img.pixels.resize(raw.shape.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        img.pixels[i] = raw.depth == 16
                            ? static_cast<std::uint16_t>((raw.bytes[2 * i] << 8) | raw.bytes[2 * i + 1])
                            : static_cast<std::uint16_t>(raw.bytes[i] * 257u);
    }
    return img;
}

void write_pnm(const fs::path& path, const Shape& shape, std::span<const std::uint8_t> pixels) {
    if (shape.channels != 1 && shape.channels != 3) throw_input_error("io.bad_channels", "PNM needs 1 or 3 channels");
    if (pixels.size() != shape.size()) throw_input_error("io.size_mismatch", "pixel buffer does not match shape");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_input_error("io.unwritable", "cannot write " + path.string());
    out << (shape.channels == 3 ? "P6" : "P5") << "\n" << shape.width << " " << shape.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

}  // namespace mpf::io
