#pragma once

#include <span>
#include <vector>

#include "mpf/residual.hpp"

namespace mpf::consistency {

/// Border band = outer `border_margin` of each side; center box = the middle
/// `center_fraction` of each axis. Regions are classified by pixel centre.
struct RegionConfig {
    double border_margin = 0.125;
    double center_fraction = 0.5;
};

void validate(const RegionConfig& regions);

/// Per-residual change statistics. All fields lie in [0, 1].
struct ChangeStats {
    double change_ratio = 0.0;   ///< pixels whose largest channel value exceeds the threshold
    double mask_density = 0.0;   ///< channel samples exceeding the threshold
    double centroid_x = 0.5;     ///< intensity-weighted, pixel-centre convention (x + 0.5) / W
    double centroid_y = 0.5;
    double ratio_border = 0.0;   ///< share of residual mass in the border band
    double ratio_center = 0.0;   ///< share of residual mass in the center box
    double spread = 0.0;         ///< RMS distance of mass from the centroid, / sqrt(1/2)
};

struct ConsistencyScore {
    double c_qty = 1.0;
    double c_spa = 1.0;
    double s_cons = 1.0;
    double w1 = 0.5;
    double w2 = 0.5;
};

ChangeStats change_stats(const residual::ResidualMap& map, double mask_threshold = residual::kDefaultMaskThreshold,
                         const RegionConfig& regions = {});

/// Population standard deviation (divides by N).
double population_stddev(std::span<const double> values);

/// c_qty = 1 / (1 + sd(change_ratio) + sd(mask_density))
/// c_spa = 1 / (1 + sd(centroid_x) + sd(centroid_y) + sd(ratio_border) + sd(ratio_center))
/// s_cons = w1 * c_qty + w2 * c_spa
ConsistencyScore consistency_score(std::span<const ChangeStats> stats, double w1 = 0.5, double w2 = 0.5);

struct SequenceConsistency {
    std::vector<ChangeStats> per_frame;
    ConsistencyScore score;
};

SequenceConsistency analyze(const residual::ResidualStack& stack, double mask_threshold = residual::kDefaultMaskThreshold,
                            const RegionConfig& regions = {}, double w1 = 0.5, double w2 = 0.5);

}  // namespace mpf::consistency
