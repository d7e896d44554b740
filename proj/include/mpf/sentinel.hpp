#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mpf/common.hpp"

namespace mpf::sentinel {

// ScoreFile layout, little-endian:
//   magic "MPFS" | version u16 (=1) | num_frames u32 | dim u32 | kind u8 |
//   num_frames * dim float32, row-major
inline constexpr std::uint16_t kScoreVersion = 1;
inline constexpr std::size_t kScoreHeaderSize = 15;

enum class ScoreKind : std::uint8_t { Logits = 0, Embeddings = 1 };

struct ScoreMatrix {
    std::uint32_t num_frames = 0;
    std::uint32_t dim = 1;
    ScoreKind kind = ScoreKind::Logits;
    std::vector<float> values;

    std::span<const float> row(std::size_t i) const { return std::span<const float>(values).subspan(i * dim, dim); }
};

std::vector<std::uint8_t> encode_scores(const ScoreMatrix& scores);
ScoreMatrix decode_scores(std::span<const std::uint8_t> bytes, const std::string& name = "scores");
ScoreMatrix load_scores(const std::filesystem::path& path);
void write_scores(const std::filesystem::path& path, const ScoreMatrix& scores);

/// Pretrained linear head mapping an embedding to a logit.
struct LinearHead {
    std::vector<double> weights;
    double bias = 0.0;

    double apply(std::span<const float> embedding) const;
    /// JSON: {"weights": [...], "bias": b}
    static LinearHead load(const std::filesystem::path& path);
};

/// Per-frame logits. Embedding files need a head; logit files must have dim 1.
std::vector<double> to_logits(const ScoreMatrix& scores, const LinearHead* head = nullptr);

class Aggregator {
public:
    virtual ~Aggregator() = default;
    virtual std::string_view name() const = 0;
    virtual double aggregate(std::span<const double> logits) const = 0;
};

class MeanLogits final : public Aggregator {
public:
    std::string_view name() const override { return "mean-logits"; }
    double aggregate(std::span<const double> logits) const override;
};

double aggregate_mean(std::span<const double> logits);

enum class GateVerdict { OffManifold, OnManifold };
std::string_view to_string(GateVerdict v);

struct GateDecision {
    double s_agg = 0.0;
    double tau = 0.0;
    GateVerdict verdict = GateVerdict::OnManifold;
};

inline constexpr double kDefaultTau = 0.0;

/// OffManifold iff s_agg > tau; ties route on to the residual branch.
GateDecision gate(double s_agg, double tau = kDefaultTau);

/// Produces one logit per frame of a segment.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::vector<double> score(const FrameSequence& segment) const = 0;
};

inline constexpr double kNullLogit = -1e9;

/// Constant very negative logit: every video passes the gate.
class NullScorer final : public Scorer {
public:
    std::vector<double> score(const FrameSequence& segment) const override;
};

/// Reads logits from a ScoreFile. Rows index source frames, so the segment
/// window [k, k+L) is used; a file with exactly L rows is taken as the segment itself.
class ScoreFileScorer final : public Scorer {
public:
    explicit ScoreFileScorer(ScoreMatrix scores, std::optional<LinearHead> head = std::nullopt);
    std::vector<double> score(const FrameSequence& segment) const override;

private:
    std::vector<double> logits_;
};

}  // namespace mpf::sentinel
