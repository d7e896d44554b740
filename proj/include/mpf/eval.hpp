#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpf/common.hpp"
#include "mpf/synthgen.hpp"

namespace mpf::eval {

/// Binary confusion counts with AI as the positive class.
struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    Confusion& operator+=(const Confusion& other);
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

Confusion confusion(std::span<const Verdict> labels, std::span<const Verdict> predictions);

struct Metrics {
    Confusion counts;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
};

/// Every ratio with a zero denominator is 0.
Metrics metrics(const Confusion& counts);
Metrics metrics(std::span<const Verdict> labels, std::span<const Verdict> predictions);

struct QualityInput {
    std::string subset;
    double fps = 0.0;
    double bitrate_mbps = 0.0;
    double resolution_n = 0.0;
};

struct QualityProfile {
    std::string subset;
    double fps = 0.0;
    double bitrate_mbps = 0.0;
    double resolution_n = 0.0;
    double composite = 0.5;
};

/// Equal-weight mean of the min-max normalised dimensions across all inputs.
/// A dimension with min == max contributes 0.5.
std::vector<QualityProfile> quality_profile(std::span<const QualityInput> subsets);

/// Bitrate proxy for uncompressed frames: bytes per frame * fps * 8 / 1e6.
double bitrate_proxy(double bytes_per_frame, double fps);

/// One QualityInput per subset found in the manifests, in first-seen order.
std::vector<QualityInput> quality_inputs(std::span<const synth::CorpusManifest> manifests);

struct MannWhitney {
    double u = 0.0;
    double z = 0.0;
    double p_value = 1.0;
};

/// Two-sided test, normal approximation with tie and continuity correction.
/// U is reported for the first sample.
MannWhitney mann_whitney_u(std::span<const double> a, std::span<const double> b);

struct TruthRecord {
    std::string id;
    Verdict label = Verdict::Real;
    std::string subset;
};

struct PredictionRecord {
    std::string id;
    Verdict final = Verdict::Real;
    /// True when the first stage terminated the run.
    bool intercepted = false;
    std::optional<Verdict> stage2;
};

struct SubsetReport {
    std::string subset;
    Metrics metrics;
    std::optional<QualityProfile> quality;
    std::size_t intercepted = 0;
    std::size_t remaining = 0;
    double stage2_accuracy = 0.0;
};

struct EvalReport {
    Metrics overall;
    std::vector<SubsetReport> subsets;
    std::size_t intercepted = 0;
    std::size_t remaining = 0;
    double stage1_interception_rate = 0.0;
    double stage2_accuracy = 0.0;
};

/// Joins predictions to truth by id. Every truth record needs exactly one prediction.
EvalReport evaluate(std::span<const TruthRecord> truth, std::span<const PredictionRecord> predictions,
                    std::span<const QualityProfile> quality = {});

nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const EvalReport& report);

/// Columns: subset, composite, stage2_accuracy, remaining.
std::string correlation_csv(const EvalReport& report);

}  // namespace mpf::eval
