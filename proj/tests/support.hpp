#pragma once

// Test-side oracles and generators. Nothing here calls into the code under
// test for the quantity it is checking.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "mpf/common.hpp"

namespace testsupport {

namespace fs = std::filesystem;

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("mpf_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::vector<std::uint8_t> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// ---- hand-rolled generators (std engines so they share nothing with mpf::Rng) ----

class Gen {
public:
    explicit Gen(std::uint32_t seed) : eng_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    double gaussian(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(eng_); }

    std::vector<std::uint8_t> bytes(std::size_t n) {
        std::vector<std::uint8_t> v(n);
        for (auto& b : v) b = static_cast<std::uint8_t>(integer(0, 255));
        return v;
    }

    mpf::Shape shape(int max_side = 24) {
        const int c = integer(0, 1) ? 3 : 1;
        return {static_cast<std::size_t>(integer(2, max_side)), static_cast<std::size_t>(integer(2, max_side)),
                static_cast<std::size_t>(c)};
    }

    mpf::FrameSequence sequence(const mpf::Shape& s, std::size_t length) {
        std::vector<mpf::Frame> frames;
        for (std::size_t i = 0; i < length; ++i) frames.push_back(bytes(s.size()));
        return mpf::FrameSequence(s, std::move(frames));
    }

private:
    std::mt19937 eng_;
};

// ---- numerical oracles ----

/// Upper tail of the chi-square goodness-of-fit statistic against equal expected counts.
inline double chi_square_uniform_p(const std::vector<std::size_t>& counts) {
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    const double expected = total / static_cast<double>(counts.size());
    double stat = 0.0;
    for (auto c : counts) stat += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
    boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Population standard deviation by direct two-pass summation.
inline double pop_sd(const std::vector<double>& v) {
    long double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<long double>(v.size());
    long double acc = 0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return static_cast<double>(std::sqrt(acc / static_cast<long double>(v.size())));
}

/// Central finite-difference gradient of f at x.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                       double h = 1e-6) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f(x);
        x[i] = orig - h;
        const double fm = f(x);
        x[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Naive O(N^2) 2-D DFT magnitudes, row-major, not shifted.
inline std::vector<double> naive_dft_magnitude(const std::vector<double>& field, std::size_t h, std::size_t w) {
    std::vector<double> out(h * w);
    for (std::size_t u = 0; u < h; ++u) {
        for (std::size_t v = 0; v < w; ++v) {
            std::complex<double> acc = 0.0;
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t x = 0; x < w; ++x) {
                    const double phase = -2.0 * std::numbers::pi *
                                         (static_cast<double>(u * y) / static_cast<double>(h) +
                                          static_cast<double>(v * x) / static_cast<double>(w));
                    acc += field[y * w + x] * std::polar(1.0, phase);
                }
            }
            out[u * w + v] = std::abs(acc);
        }
    }
    return out;
}

/// Shannon entropy (bits) of a 256-bin histogram of rounded, clamped values.
inline double histogram_entropy_oracle(const std::vector<float>& values) {
    std::vector<double> hist(256, 0.0);
    for (float v : values) {
        const double c = std::min(255.0, std::max(0.0, static_cast<double>(v)));
        hist[static_cast<std::size_t>(std::floor(c + 0.5))] += 1.0;
    }
    double h = 0.0;
    for (double c : hist) {
        if (c > 0) {
            const double p = c / static_cast<double>(values.size());
            h -= p * std::log(p) / std::log(2.0);
        }
    }
    return h;
}

inline double sigmoid_oracle(double s) { return 1.0 / (1.0 + std::exp(-s)); }

/// Mann-Whitney U of sample a by explicit pair counting (ties count 1/2).
inline double u_by_pairs(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a) {
        for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    }
    return u;
}

}  // namespace testsupport
