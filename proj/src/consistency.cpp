#include "mpf/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mpf::consistency {

void validate(const RegionConfig& r) {
    if (!(r.border_margin >= 0.0 && r.border_margin < 0.5)) {
        throw_config_error("consistency.bad_region", "border margin must be in [0, 0.5)");
    }
    if (!(r.center_fraction > 0.0 && r.center_fraction <= 1.0)) {
        throw_config_error("consistency.bad_region", "center fraction must be in (0, 1]");
    }
    if ((1.0 - r.center_fraction) / 2.0 < r.border_margin) {
        throw_config_error("consistency.bad_region", "center box overlaps the border band");
    }
}

ChangeStats change_stats(const residual::ResidualMap& map, double mask_threshold, const RegionConfig& regions) {
    validate(regions);
    const std::size_t h = map.height, w = map.width, c = map.channels;
    if (map.values.size() != h * w * c || h == 0 || w == 0 || c == 0) {
        throw_input_error("consistency.bad_map", "residual map buffer does not match its shape");
    }
    const double lo_border = regions.border_margin;
    const double hi_border = 1.0 - regions.border_margin;
    const double lo_center = 0.5 - regions.center_fraction / 2.0;
    const double hi_center = 0.5 + regions.center_fraction / 2.0;

    std::size_t changed_pixels = 0, changed_samples = 0;
    double mass = 0.0, mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, border = 0.0, center = 0.0;
    for (std::size_t y = 0; y < h; ++y) {
        const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(h);
        const bool y_border = v < lo_border || v > hi_border;
        const bool y_center = v >= lo_center && v <= hi_center;
        for (std::size_t x = 0; x < w; ++x) {
            const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(w);
            double pixel_mass = 0.0;
            bool any = false;
            for (std::size_t k = 0; k < c; ++k) {
                const double val = map.at(y, x, k);
                if (!std::isfinite(val) || val < 0.0) throw_input_error("consistency.bad_map", "residual values must be finite and non-negative");
                pixel_mass += val;
                if (val > mask_threshold) {
                    ++changed_samples;
                    any = true;
                }
            }
            if (any) ++changed_pixels;
            if (pixel_mass == 0.0) continue;
            mass += pixel_mass;
            mx += pixel_mass * u;
            my += pixel_mass * v;
            mxx += pixel_mass * u * u;
            myy += pixel_mass * v * v;
            if (y_border || u < lo_border || u > hi_border) {
                border += pixel_mass;
            } else if (y_center && u >= lo_center && u <= hi_center) {
                center += pixel_mass;
            }
        }
    }

    ChangeStats s;
    s.change_ratio = static_cast<double>(changed_pixels) / static_cast<double>(h * w);
    s.mask_density = static_cast<double>(changed_samples) / static_cast<double>(h * w * c);
    if (mass > 0.0) {
        s.centroid_x = mx / mass;
        s.centroid_y = my / mass;
        s.ratio_border = border / mass;
        s.ratio_center = center / mass;
        const double var = std::max(0.0, mxx / mass - s.centroid_x * s.centroid_x) +
                           std::max(0.0, myy / mass - s.centroid_y * s.centroid_y);
        s.spread = std::min(1.0, std::sqrt(var / 0.5));
    }
    return s;
}

double population_stddev(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

ConsistencyScore consistency_score(std::span<const ChangeStats> stats, double w1, double w2) {
    if (stats.size() < 2) {
        throw_input_error("consistency.undefined_variance",
                          "need at least 2 change statistics, got " + std::to_string(stats.size()));
    }
    if (!(w1 >= 0.0) || !(w2 >= 0.0)) throw_config_error("consistency.bad_weights", "weights must be non-negative");
    auto sd = [&](double ChangeStats::*field) {
        std::vector<double> v;
        v.reserve(stats.size());
        for (const auto& s : stats) v.push_back(s.*field);
        return population_stddev(v);
    };
    ConsistencyScore score;
    score.w1 = w1;
    score.w2 = w2;
    score.c_qty = 1.0 / (1.0 + sd(&ChangeStats::change_ratio) + sd(&ChangeStats::mask_density));
    score.c_spa = 1.0 / (1.0 + sd(&ChangeStats::centroid_x) + sd(&ChangeStats::centroid_y) +
                         sd(&ChangeStats::ratio_border) + sd(&ChangeStats::ratio_center));
    score.s_cons = w1 * score.c_qty + w2 * score.c_spa;
    return score;
}

SequenceConsistency analyze(const residual::ResidualStack& stack, double mask_threshold, const RegionConfig& regions,
                            double w1, double w2) {
    SequenceConsistency out;
    out.per_frame.reserve(stack.maps.size());
    for (const auto& m : stack.maps) out.per_frame.push_back(change_stats(m, mask_threshold, regions));
    out.score = consistency_score(out.per_frame, w1, w2);
    return out;
}

}  // namespace mpf::consistency
