#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpf/common.hpp"
#include "mpf/microscope.hpp"
#include "mpf/residual.hpp"
#include "mpf/sampling.hpp"
#include "mpf/sentinel.hpp"

namespace mpf::pipeline {

struct PipelineConfig {
    std::size_t length = sampling::kDefaultLength;
    sampling::Mode mode = sampling::Mode::Fixed;
    std::uint64_t seed = 0;
    residual::Options residual;
    consistency::RegionConfig regions;
    double tau = sentinel::kDefaultTau;
    std::optional<std::filesystem::path> model;
    /// A ScoreFile, or a directory holding <input stem>.mpfs per input. Absent: null scorer.
    std::optional<std::filesystem::path> scores;
    std::optional<std::filesystem::path> head;

    /// Checks every module precondition; throws a config error before any work starts.
    void validate() const;
    sampling::IngestSpec ingest() const;
};

/// Stage-2 feature vector of a segment. Training and detection share it.
std::vector<double> segment_features(const FrameSequence& segment, const PipelineConfig& config);

struct Stage1 {
    double s_agg = 0.0;
    double tau = 0.0;
    sentinel::GateVerdict verdict = sentinel::GateVerdict::OnManifold;
};

struct Stage2 {
    double probability = 0.5;
    Verdict verdict = Verdict::Real;
};

struct PipelineResult {
    std::string id;
    std::size_t start_index = 0;
    std::size_t length = 0;
    Stage1 stage1;
    std::optional<Stage2> stage2;
    Verdict final = Verdict::Real;
};

/// Gate first; an OffManifold verdict ends the run with AI and no residual work.
PipelineResult run_pipeline(const FrameSequence& segment, const sentinel::Scorer& scorer,
                            const microscope::ClassifierModel& model, const PipelineConfig& config);

/// Loads the segment, scorer and model named by the config, then runs both stages.
PipelineResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& input);

/// Scorer for one input: null scorer, the single ScoreFile, or <dir>/<stem>.mpfs.
std::unique_ptr<sentinel::Scorer> make_scorer(const PipelineConfig& config, const std::filesystem::path& input);

nlohmann::json to_json(const PipelineResult& result);

}  // namespace mpf::pipeline
