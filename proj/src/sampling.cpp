#include "mpf/sampling.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>
#include <tuple>

#include "json.hpp"

#include "mpf/image_io.hpp"
#include "mpf/mpfraw.hpp"

namespace mpf::sampling {
namespace fs = std::filesystem;

Mode parse_mode(std::string_view text) {
    if (text == "fixed") return Mode::Fixed;
    if (text == "stochastic") return Mode::Stochastic;
    throw_config_error("sampling.bad_mode", "mode must be fixed or stochastic, got '" + std::string(text) + "'");
}

std::string_view to_string(Mode mode) { return mode == Mode::Fixed ? "fixed" : "stochastic"; }

std::size_t sample_segment(std::size_t total_frames, std::size_t length, Mode mode, std::uint64_t seed) {
    if (length < 2) throw_config_error("sampling.length_too_small", "segment length must be at least 2, got " + std::to_string(length));
    if (total_frames < 1) throw_input_error("sampling.empty_source", "source has no frames");
    if (mode == Mode::Fixed || total_frames <= length) return 0;
    Rng rng(seed);
    return static_cast<std::size_t>(rng.uniform_index(total_frames - length + 1));
}

namespace {

bool is_frame_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".ppm" || ext == ".pgm";
}

// Trailing integer of the stem: frame_000012 -> 12.
std::optional<unsigned long long> stem_number(const fs::path& p) {
    const std::string stem = p.stem().string();
    std::size_t end = stem.size();
    std::size_t begin = end;
    while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
    if (begin == end || end - begin > 18) return std::nullopt;
    return std::stoull(stem.substr(begin));
}

bool is_raw_container(const fs::path& p) { return fs::is_regular_file(p) && p.extension() == ".mpfraw"; }

std::optional<Rational> sidecar_fps(const fs::path& dir) {
    const fs::path meta = dir / "meta.json";
    if (!fs::exists(meta)) return std::nullopt;
    std::ifstream in(meta);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw_input_error("sampling.bad_sidecar", "meta.json: " + std::string(e.what()));
    }
    if (!j.contains("fps")) return std::nullopt;
    const auto& v = j.at("fps");
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number()) {
        const double d = v.get<double>();
        return parse_rational(std::to_string(d));
    }
    throw_input_error("sampling.bad_sidecar", "meta.json: fps must be a number or \"num/den\" string");
}

}  // namespace

std::vector<fs::path> list_frame_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw_input_error("sampling.missing_path", "no such directory " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_frame_file(entry.path())) files.push_back(entry.path());
    }
    auto key = [](const fs::path& p) {
        const auto n = stem_number(p);
        return std::make_tuple(!n.has_value(), n.value_or(0), p.filename().string());
    };
    std::sort(files.begin(), files.end(), [&](const fs::path& a, const fs::path& b) { return key(a) < key(b); });
    return files;
}

std::size_t count_frames(const fs::path& path) {
    if (!fs::exists(path)) throw_input_error("sampling.missing_path", "no such file or directory " + path.string());
    if (is_raw_container(path)) return raw::read_header(path).frame_count;
    return list_frame_files(path).size();
}

FrameSequence load_frames(const fs::path& path, const IngestSpec& spec) {
    if (!fs::exists(path)) throw_input_error("sampling.missing_path", "no such file or directory " + path.string());
    if (spec.length < 2) throw_config_error("sampling.length_too_small", "segment length must be at least 2");

    if (is_raw_container(path)) {
        const raw::Header header = raw::read_header(path);
        if (spec.raw_shape && *spec.raw_shape != header.shape) {
            throw_input_error("sampling.dimension_mismatch", path.filename().string() + ": container holds " +
                                                                 to_string(header.shape) + " frames, expected " +
                                                                 to_string(*spec.raw_shape));
        }
        const std::size_t total = header.frame_count;
        const std::size_t k = sample_segment(total, spec.length, spec.mode, spec.seed);
        const std::size_t n = std::min(spec.length, total);
        auto frames = raw::read_frames(path, header, k, n);
        return FrameSequence(header.shape, std::move(frames), spec.fps.value_or(header.fps), path.stem().string(), k,
                             total, total < spec.length);
    }

    if (!fs::is_directory(path)) {
        throw_input_error("sampling.unsupported_input", path.string() + " is neither a frame directory nor an .mpfraw file");
    }
    const auto files = list_frame_files(path);
    if (files.empty()) throw_input_error("sampling.empty_source", "no frame images in " + path.string());
    const std::size_t total = files.size();
    const std::size_t k = sample_segment(total, spec.length, spec.mode, spec.seed);
    const std::size_t n = std::min(spec.length, total);

    Shape shape{};
    std::vector<Frame> frames;
    frames.reserve(n);
    for (std::size_t i = k; i < k + n; ++i) {
        io::Image8 img = io::read_rgb8(files[i]);
        if (frames.empty()) {
            shape = img.shape;
        } else if (img.shape != shape) {
            throw_input_error("sampling.dimension_mismatch", files[i].filename().string() + " is " + to_string(img.shape) +
                                                                 ", expected " + to_string(shape));
        }
        frames.push_back(std::move(img.pixels));
    }
    const Rational fps = spec.fps ? *spec.fps : sidecar_fps(path).value_or(kDefaultFps);
    std::string id = path.filename().string();
    if (id.empty()) id = path.parent_path().filename().string();
    return FrameSequence(shape, std::move(frames), fps, id, k, total, total < spec.length);
}

FrameSequence extract_segment(const FrameSequence& source, std::size_t start, std::size_t length) {
    if (length < 2) throw_config_error("sampling.length_too_small", "segment length must be at least 2");
    const std::size_t n = std::min(length, source.size());
    if (start + n > source.size()) {
        throw_input_error("sampling.bad_window", "window [" + std::to_string(start) + ", " + std::to_string(start + length) +
                                                     ") does not fit in " + std::to_string(source.size()) + " frames");
    }
    std::vector<Frame> frames(source.frames().begin() + static_cast<std::ptrdiff_t>(start),
                              source.frames().begin() + static_cast<std::ptrdiff_t>(start + n));
    return FrameSequence(source.shape(), std::move(frames), source.fps(), source.source_id(),
                         source.start_index() + start, source.source_length(), n < length);
}

}  // namespace mpf::sampling
