#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mpf/common.hpp"

namespace mpf::residual {

enum class Strategy { Normalized, ChangeMask, LogScale, FrequencyDomain, OpticalFlow };

std::string_view to_string(Strategy s);
/// Accepts the CLI spellings normalized|mask|log|freq|flow as well as the full names.
Strategy parse_strategy(std::string_view text);

inline constexpr double kDefaultAlpha = 10.0;
inline constexpr double kDefaultMaskThreshold = 5.0;
inline constexpr std::size_t kDefaultBlock = 8;
inline constexpr std::size_t kDefaultRadius = 4;

/// One enhanced residual, values in [0, 255]. Scalar strategies have one channel.
struct ResidualMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;
    std::vector<float> values;

    ResidualMap() = default;
    ResidualMap(std::size_t h, std::size_t w, std::size_t c) : height(h), width(w), channels(c), values(h * w * c, 0.0f) {}

    Shape shape() const noexcept { return {height, width, channels}; }
    float& at(std::size_t y, std::size_t x, std::size_t c = 0) { return values[(y * width + x) * channels + c]; }
    float at(std::size_t y, std::size_t x, std::size_t c = 0) const { return values[(y * width + x) * channels + c]; }
};

struct ResidualStack {
    std::vector<ResidualMap> maps;
    Strategy strategy = Strategy::Normalized;
    double alpha = kDefaultAlpha;
};

struct Options {
    Strategy strategy = Strategy::Normalized;
    double alpha = kDefaultAlpha;
    double threshold = kDefaultMaskThreshold;
    std::size_t block = kDefaultBlock;
    std::size_t radius = kDefaultRadius;
};

void validate(const Options& options);

// Pairwise kernels. `a` and `b` are consecutive frames of the given shape.
ResidualMap normalized_pair(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape, double alpha);
ResidualMap change_mask_pair(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape, double threshold);
ResidualMap log_scale_pair(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape);
ResidualMap frequency_pair(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape);
ResidualMap optical_flow_pair(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape,
                              std::size_t block, std::size_t radius);

/// clamp(alpha * |I_{t+1} - I_t|, 0, 255) per pixel and channel.
ResidualStack residual_normalized(const FrameSequence& seq, double alpha = kDefaultAlpha);
/// 255 where the largest channel difference exceeds `threshold`, else 0.
ResidualStack residual_change_mask(const FrameSequence& seq, double threshold = kDefaultMaskThreshold);
/// 255 * ln(1 + |d|) / ln(256) per pixel and channel.
ResidualStack residual_log_scale(const FrameSequence& seq);
/// Centred log-magnitude spectrum of the luma difference, min-max scaled per map.
ResidualStack residual_frequency(const FrameSequence& seq);
/// Block-matching flow magnitude, nearest-neighbour upsampled; radius*sqrt(2) maps to 255.
ResidualStack residual_optical_flow(const FrameSequence& seq, std::size_t block = kDefaultBlock,
                                    std::size_t radius = kDefaultRadius);

ResidualStack compute(const FrameSequence& seq, const Options& options);

/// Rec.601 luma of an RGB (or gray) frame.
std::vector<double> luma(std::span<const std::uint8_t> frame, const Shape& shape);

/// |DFT| of a real h x w field, shifted so the DC term sits at (h/2, w/2). Not log-scaled.
std::vector<double> centered_magnitude_spectrum(std::span<const double> field, std::size_t h, std::size_t w);

/// Frequency-strategy map for an arbitrary real difference field.
ResidualMap frequency_map(std::span<const double> difference, std::size_t h, std::size_t w);

/// Block displacement found by the flow search, in pixels.
struct BlockFlow {
    std::size_t y0 = 0, x0 = 0, y1 = 0, x1 = 0;
    int dy = 0, dx = 0;
};

/// Per-block displacements minimising the forward + backward SAD. Ties prefer
/// the shorter displacement so that swapping the frames negates every vector.
std::vector<BlockFlow> block_flow(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape,
                                  std::size_t block, std::size_t radius);

/// Number of residual maps computed by this process; used to verify pipeline short-circuiting.
std::uint64_t computation_count() noexcept;

}  // namespace mpf::residual
