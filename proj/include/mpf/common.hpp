#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mpf {

/// Which kind of failure an Error represents. The CLI maps these to exit codes.
enum class ErrorKind { Input, Config };

/// Module-qualified error. `code()` looks like "sampling.dimension_mismatch".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

[[noreturn]] void throw_input_error(std::string code, const std::string& message);
[[noreturn]] void throw_config_error(std::string code, const std::string& message);

struct Shape {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;

    std::size_t pixels() const noexcept { return height * width; }
    std::size_t size() const noexcept { return height * width * channels; }
    bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& shape);

/// Frames per second as a positive rational.
struct Rational {
    std::uint32_t num = 8;
    std::uint32_t den = 1;

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};

/// Parses "24", "30000/1001" or "15.5" into a rational frame rate.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& r);

enum class Verdict { Real = 0, AI = 1 };

std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view text);

/// Row-major, channel-interleaved 8-bit frame.
using Frame = std::vector<std::uint8_t>;

/// A contiguous window of decoded frames. Immutable after construction.
class FrameSequence {
public:
    FrameSequence() = default;
    FrameSequence(Shape shape, std::vector<Frame> frames, Rational fps = {}, std::string source_id = {},
                  std::size_t start_index = 0, std::size_t source_length = 0, bool is_short = false);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return frames_.size(); }
    std::span<const std::uint8_t> frame(std::size_t i) const { return frames_.at(i); }
    const std::vector<Frame>& frames() const noexcept { return frames_; }
    Rational fps() const noexcept { return fps_; }
    const std::string& source_id() const noexcept { return source_id_; }
    std::size_t start_index() const noexcept { return start_index_; }
    /// Total frame count T of the source this window was cut from.
    std::size_t source_length() const noexcept { return source_length_; }
    /// True when the source had fewer frames than the requested length.
    bool is_short() const noexcept { return is_short_; }

private:
    Shape shape_{};
    std::vector<Frame> frames_;
    Rational fps_{};
    std::string source_id_;
    std::size_t start_index_ = 0;
    std::size_t source_length_ = 0;
    bool is_short_ = false;
};

/// Seeded generator whose output is identical across platforms and standard
/// library implementations (the std distributions are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n);
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Standard normal via the Marsaglia polar method.
    double normal();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// SplitMix64 mix of (base, stream); used to give every sequence its own seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t value);

}  // namespace mpf
