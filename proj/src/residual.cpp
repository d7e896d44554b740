#include "mpf/residual.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <string>

namespace mpf::residual {

namespace {

std::atomic<std::uint64_t> g_computations{0};

// FFTW's planner is not re-entrant.
std::mutex g_fftw_mutex;

void check_pair(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape) {
    if (a.size() != shape.size() || b.size() != shape.size()) {
        throw_input_error("residual.dimension_mismatch", "frame buffers do not match shape " + to_string(shape));
    }
}

template <typename Kernel>
ResidualStack map_pairs(const FrameSequence& seq, Strategy strategy, double alpha, Kernel&& kernel) {
    if (seq.size() < 2) throw_input_error("residual.too_few_frames", "need at least 2 frames, got " + std::to_string(seq.size()));
    ResidualStack stack;
    stack.strategy = strategy;
    stack.alpha = alpha;
    stack.maps.reserve(seq.size() - 1);
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
        stack.maps.push_back(kernel(seq.frame(t), seq.frame(t + 1), seq.shape()));
    }
    return stack;
}

float clamp255(double v) { return static_cast<float>(std::clamp(v, 0.0, 255.0)); }

}  // namespace

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Normalized: return "normalized";
        case Strategy::ChangeMask: return "mask";
        case Strategy::LogScale: return "log";
        case Strategy::FrequencyDomain: return "freq";
        case Strategy::OpticalFlow: return "flow";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view text) {
    if (text == "normalized") return Strategy::Normalized;
    if (text == "mask" || text == "change-mask") return Strategy::ChangeMask;
    if (text == "log" || text == "log-scale") return Strategy::LogScale;
    if (text == "freq" || text == "frequency") return Strategy::FrequencyDomain;
    if (text == "flow" || text == "optical-flow") return Strategy::OpticalFlow;
    throw_config_error("residual.bad_strategy", "unknown strategy '" + std::string(text) + "'");
}

void validate(const Options& o) {
    if (!(o.alpha > 0.0) || !std::isfinite(o.alpha)) throw_config_error("residual.bad_alpha", "alpha must be positive");
    if (!(o.threshold >= 0.0 && o.threshold <= 255.0)) throw_config_error("residual.bad_threshold", "threshold must be in [0, 255]");
    if (o.block == 0) throw_config_error("residual.bad_block", "block size must be positive");
}

ResidualMap normalized_pair(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape, double alpha) {
    check_pair(a, b, shape);
    ResidualMap map(shape.height, shape.width, shape.channels);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(static_cast<double>(b[i]) - static_cast<double>(a[i]));
        map.values[i] = clamp255(alpha * d);
    }
    ++g_computations;
    return map;
}

ResidualMap change_mask_pair(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape,
                             double threshold) {
    check_pair(a, b, shape);
    ResidualMap map(shape.height, shape.width, 1);
    const std::size_t c = shape.channels;
    for (std::size_t p = 0; p < shape.pixels(); ++p) {
        int largest = 0;
        for (std::size_t k = 0; k < c; ++k) largest = std::max(largest, std::abs(int{b[p * c + k]} - int{a[p * c + k]}));
        map.values[p] = static_cast<double>(largest) > threshold ? 255.0f : 0.0f;
    }
    ++g_computations;
    return map;
}

ResidualMap log_scale_pair(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape) {
    check_pair(a, b, shape);
    ResidualMap map(shape.height, shape.width, shape.channels);
    const double norm = std::log(256.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(static_cast<double>(b[i]) - static_cast<double>(a[i]));
        map.values[i] = clamp255(255.0 * std::log(1.0 + d) / norm);
    }
    ++g_computations;
    return map;
}

std::vector<double> luma(std::span<const std::uint8_t> frame, const Shape& shape) {
    std::vector<double> y(shape.pixels());
    const std::size_t c = shape.channels;
    for (std::size_t p = 0; p < shape.pixels(); ++p) {
        if (c >= 3) {
            y[p] = 0.299 * frame[p * c] + 0.587 * frame[p * c + 1] + 0.114 * frame[p * c + 2];
        } else {
            y[p] = frame[p * c];
        }
    }
    return y;
}

std::vector<double> centered_magnitude_spectrum(std::span<const double> field, std::size_t h, std::size_t w) {
    if (field.size() != h * w || h == 0 || w == 0) throw_input_error("residual.dimension_mismatch", "field does not match h x w");
    const std::size_t n = h * w;
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!buf) throw std::bad_alloc();
    fftw_plan plan;
    {
        std::lock_guard lock(g_fftw_mutex);
        plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < n; ++i) {
        buf[i][0] = field[i];
        buf[i][1] = 0.0;
    }
    fftw_execute(plan);
    std::vector<double> mag(n);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = y * w + x;
            const std::size_t sy = (y + h / 2) % h;
            const std::size_t sx = (x + w / 2) % w;
            mag[sy * w + sx] = std::hypot(buf[i][0], buf[i][1]);
        }
    }
    {
        std::lock_guard lock(g_fftw_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return mag;
}

ResidualMap frequency_map(std::span<const double> difference, std::size_t h, std::size_t w) {
    ResidualMap map(h, w, 1);
    const bool all_zero = std::all_of(difference.begin(), difference.end(), [](double v) { return v == 0.0; });
    if (all_zero) return map;
    std::vector<double> logmag = centered_magnitude_spectrum(difference, h, w);
    for (auto& v : logmag) v = std::log1p(v);
    const auto [lo, hi] = std::minmax_element(logmag.begin(), logmag.end());
    const double range = *hi - *lo;
    // A flat spectrum carries no structure; it maps to zero like the all-zero case.
    if (!(range > 0.0)) return map;
    for (std::size_t i = 0; i < logmag.size(); ++i) map.values[i] = clamp255(255.0 * (logmag[i] - *lo) / range);
    return map;
}

ResidualMap frequency_pair(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape) {
    check_pair(a, b, shape);
    const auto ya = luma(a, shape);
    const auto yb = luma(b, shape);
    std::vector<double> diff(ya.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = yb[i] - ya[i];
    ++g_computations;
    return frequency_map(diff, shape.height, shape.width);
}

std::vector<BlockFlow> block_flow(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape,
                                  std::size_t block, std::size_t radius) {
    check_pair(a, b, shape);
    if (block == 0) throw_config_error("residual.bad_block", "block size must be positive");
    const auto h = static_cast<std::ptrdiff_t>(shape.height);
    const auto w = static_cast<std::ptrdiff_t>(shape.width);
    const std::size_t c = shape.channels;
    const auto r = static_cast<int>(radius);
    auto sample = [&](std::span<const std::uint8_t> img, std::ptrdiff_t y, std::ptrdiff_t x, std::size_t k) -> int {
        y = std::clamp<std::ptrdiff_t>(y, 0, h - 1);
        x = std::clamp<std::ptrdiff_t>(x, 0, w - 1);
        return img[(static_cast<std::size_t>(y) * shape.width + static_cast<std::size_t>(x)) * c + k];
    };

    std::vector<BlockFlow> flows;
    for (std::size_t by = 0; by < shape.height; by += block) {
        for (std::size_t bx = 0; bx < shape.width; bx += block) {
            BlockFlow f;
            f.y0 = by;
            f.x0 = bx;
            f.y1 = std::min(by + block, shape.height);
            f.x1 = std::min(bx + block, shape.width);
            long best_cost = std::numeric_limits<long>::max();
            int best_norm = std::numeric_limits<int>::max();
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    long cost = 0;
                    for (std::size_t y = f.y0; y < f.y1; ++y) {
                        for (std::size_t x = f.x0; x < f.x1; ++x) {
                            const auto py = static_cast<std::ptrdiff_t>(y);
                            const auto px = static_cast<std::ptrdiff_t>(x);
                            for (std::size_t k = 0; k < c; ++k) {
                                cost += std::abs(sample(a, py, px, k) - sample(b, py + dy, px + dx, k));
                                cost += std::abs(sample(b, py, px, k) - sample(a, py - dy, px - dx, k));
                            }
                        }
                    }
                    const int norm = dy * dy + dx * dx;
                    if (cost < best_cost || (cost == best_cost && norm < best_norm)) {
                        best_cost = cost;
                        best_norm = norm;
                        f.dy = dy;
                        f.dx = dx;
                    }
                }
            }
            flows.push_back(f);
        }
    }
    return flows;
}

ResidualMap optical_flow_pair(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const Shape& shape,
                              std::size_t block, std::size_t radius) {
    check_pair(a, b, shape);
    ResidualMap map(shape.height, shape.width, 1);
    ++g_computations;
    if (radius == 0) return map;
    const double scale = 255.0 / (static_cast<double>(radius) * std::sqrt(2.0));
    for (const auto& f : block_flow(a, b, shape, block, radius)) {
        const float v = clamp255(std::hypot(static_cast<double>(f.dx), static_cast<double>(f.dy)) * scale);
        for (std::size_t y = f.y0; y < f.y1; ++y) {
            for (std::size_t x = f.x0; x < f.x1; ++x) map.at(y, x) = v;
        }
    }
    return map;
}

ResidualStack residual_normalized(const FrameSequence& seq, double alpha) {
    if (!(alpha > 0.0)) throw_config_error("residual.bad_alpha", "alpha must be positive");
    return map_pairs(seq, Strategy::Normalized, alpha,
                     [&](auto a, auto b, const Shape& s) { return normalized_pair(a, b, s, alpha); });
}

ResidualStack residual_change_mask(const FrameSequence& seq, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 255.0)) throw_config_error("residual.bad_threshold", "threshold must be in [0, 255]");
    return map_pairs(seq, Strategy::ChangeMask, 1.0,
                     [&](auto a, auto b, const Shape& s) { return change_mask_pair(a, b, s, threshold); });
}

ResidualStack residual_log_scale(const FrameSequence& seq) {
    return map_pairs(seq, Strategy::LogScale, 1.0, [](auto a, auto b, const Shape& s) { return log_scale_pair(a, b, s); });
}

ResidualStack residual_frequency(const FrameSequence& seq) {
    return map_pairs(seq, Strategy::FrequencyDomain, 1.0,
                     [](auto a, auto b, const Shape& s) { return frequency_pair(a, b, s); });
}

ResidualStack residual_optical_flow(const FrameSequence& seq, std::size_t block, std::size_t radius) {
    if (block == 0) throw_config_error("residual.bad_block", "block size must be positive");
    return map_pairs(seq, Strategy::OpticalFlow, 1.0,
                     [&](auto a, auto b, const Shape& s) { return optical_flow_pair(a, b, s, block, radius); });
}

ResidualStack compute(const FrameSequence& seq, const Options& o) {
    validate(o);
    switch (o.strategy) {
        case Strategy::Normalized: return residual_normalized(seq, o.alpha);
        case Strategy::ChangeMask: return residual_change_mask(seq, o.threshold);
        case Strategy::LogScale: return residual_log_scale(seq);
        case Strategy::FrequencyDomain: return residual_frequency(seq);
        case Strategy::OpticalFlow: return residual_optical_flow(seq, o.block, o.radius);
    }
    throw_config_error("residual.bad_strategy", "unknown strategy");
}

std::uint64_t computation_count() noexcept { return g_computations.load(); }

}  // namespace mpf::residual
