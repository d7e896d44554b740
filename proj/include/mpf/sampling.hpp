#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "mpf/common.hpp"

namespace mpf::sampling {

enum class Mode { Fixed, Stochastic };

inline constexpr std::size_t kDefaultLength = 8;
inline constexpr Rational kDefaultFps{8, 1};

Mode parse_mode(std::string_view text);
std::string_view to_string(Mode mode);

struct IngestSpec {
    /// Expected frame shape; checked against the container header for raw input.
    std::optional<Shape> raw_shape;
    /// Overrides container or sidecar frame rate.
    std::optional<Rational> fps;
    std::size_t length = kDefaultLength;
    Mode mode = Mode::Fixed;
    std::uint64_t seed = 0;
};

/// Start index k of an L-frame window in a T-frame source. Fixed mode always
/// starts at 0; stochastic mode draws k uniformly from {0..T-L}. Returns 0
/// when T < L (the caller keeps all T frames and marks the window short).
std::size_t sample_segment(std::size_t total_frames, std::size_t length, Mode mode, std::uint64_t seed);

/// Image files (png/ppm/pgm) in `dir`, ordered by their numeric stem.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

/// Total frame count of a directory or .mpfraw source without decoding pixels.
std::size_t count_frames(const std::filesystem::path& path);

/// Loads the sampled window of a frame directory or .mpfraw container.
FrameSequence load_frames(const std::filesystem::path& path, const IngestSpec& spec);

/// Cuts frames [start, start+length) out of an already decoded sequence.
FrameSequence extract_segment(const FrameSequence& source, std::size_t start, std::size_t length);

}  // namespace mpf::sampling
