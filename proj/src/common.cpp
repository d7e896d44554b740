#include "mpf/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace mpf {

Error::Error(ErrorKind kind, std::string code, const std::string& message)
    : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

void throw_input_error(std::string code, const std::string& message) {
    throw Error(ErrorKind::Input, std::move(code), message);
}

void throw_config_error(std::string code, const std::string& message) {
    throw Error(ErrorKind::Config, std::move(code), message);
}

std::string to_string(const Shape& shape) {
    return std::to_string(shape.height) + "x" + std::to_string(shape.width) + "x" +
           std::to_string(shape.channels);
}

namespace {

bool parse_u64(std::string_view text, std::uint64_t& out) {
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Rational parse_rational(std::string_view text) {
    const auto bad = [&] { throw_config_error("common.bad_rational", "cannot parse frame rate '" + std::string(text) + "'"); };
    constexpr std::uint64_t limit = std::numeric_limits<std::uint16_t>::max();
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        std::uint64_t n = 0, d = 0;
        if (!parse_u64(text.substr(0, slash), n) || !parse_u64(text.substr(slash + 1), d)) bad();
        if (n == 0 || d == 0 || n > limit || d > limit) bad();
        return {static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(d)};
    }
    std::uint64_t whole = 0;
    if (parse_u64(text, whole)) {
        if (whole == 0 || whole > limit) bad();
        return {static_cast<std::uint32_t>(whole), 1};
    }
    // Decimal rates such as 15.52 are stored over 100.
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(std::string(text), &used);
        if (used != text.size()) bad();
    } catch (const std::logic_error&) {
        bad();
    }
    if (!(value > 0.0) || value * 100.0 > static_cast<double>(limit)) bad();
    auto num = static_cast<std::uint32_t>(std::llround(value * 100.0));
    std::uint32_t den = 100;
    const auto g = std::gcd(num, den);
    return {num / g, den / g};
}

std::string to_string(const Rational& r) {
    if (r.den == 1) return std::to_string(r.num);
    return std::to_string(r.num) + "/" + std::to_string(r.den);
}

std::string_view to_string(Verdict v) { return v == Verdict::AI ? "AI" : "Real"; }

Verdict parse_verdict(std::string_view text) {
    if (text == "AI" || text == "ai" || text == "1" || text == "decoder") return Verdict::AI;
    if (text == "Real" || text == "real" || text == "0" || text == "physics") return Verdict::Real;
    throw_input_error("common.bad_verdict", "unknown label '" + std::string(text) + "'");
}

FrameSequence::FrameSequence(Shape shape, std::vector<Frame> frames, Rational fps, std::string source_id,
                             std::size_t start_index, std::size_t source_length, bool is_short)
    : shape_(shape),
      frames_(std::move(frames)),
      fps_(fps),
      source_id_(std::move(source_id)),
      start_index_(start_index),
      source_length_(source_length == 0 ? start_index + frames_.size() : source_length),
      is_short_(is_short) {
    if (shape_.size() == 0) throw_input_error("sampling.bad_shape", "frame shape " + to_string(shape_) + " is empty");
    for (std::size_t i = 0; i < frames_.size(); ++i) {
        if (frames_[i].size() != shape_.size()) {
            throw_input_error("sampling.dimension_mismatch",
                              "frame " + std::to_string(i) + " has " + std::to_string(frames_[i].size()) +
                                  " bytes, expected " + std::to_string(shape_.size()));
        }
    }
    if (start_index_ + frames_.size() > source_length_) {
        throw_input_error("sampling.bad_window", "window exceeds source length");
    }
    if (fps_.num == 0 || fps_.den == 0) throw_input_error("sampling.bad_fps", "frame rate must be positive");
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    // Rejection sampling keeps the mapping exact and implementation independent.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    return u * factor;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace mpf
