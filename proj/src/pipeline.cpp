#include "mpf/pipeline.hpp"

#include <cmath>
#include <memory>

namespace mpf::pipeline {
namespace fs = std::filesystem;

void PipelineConfig::validate() const {
    if (length < 2) throw_config_error("pipeline.bad_length", "segment length must be at least 2");
    residual::validate(residual);
    consistency::validate(regions);
    if (!std::isfinite(tau)) throw_config_error("pipeline.bad_tau", "tau must be finite");
    if (!model) throw_config_error("pipeline.model_required", "a trained model is required");
}

sampling::IngestSpec PipelineConfig::ingest() const {
    sampling::IngestSpec spec;
    spec.length = length;
    spec.mode = mode;
    spec.seed = seed;
    return spec;
}

std::vector<double> segment_features(const FrameSequence& segment, const PipelineConfig& config) {
    microscope::FeatureOptions options;
    options.mask_threshold = config.residual.threshold;
    options.regions = config.regions;
    return microscope::featurize(residual::compute(segment, config.residual), options);
}

PipelineResult run_pipeline(const FrameSequence& segment, const sentinel::Scorer& scorer,
                            const microscope::ClassifierModel& model, const PipelineConfig& config) {
    PipelineResult r;
    r.id = segment.source_id();
    r.start_index = segment.start_index();
    r.length = segment.size();

    const auto logits = scorer.score(segment);
    const auto decision = sentinel::gate(sentinel::aggregate_mean(logits), config.tau);
    r.stage1 = {decision.s_agg, decision.tau, decision.verdict};
    if (decision.verdict == sentinel::GateVerdict::OffManifold) {
        r.final = Verdict::AI;
        return r;
    }

    const auto features = segment_features(segment, config);
    const auto c = microscope::classify(model, features);
    r.stage2 = Stage2{c.probability, c.verdict};
    r.final = c.verdict;
    return r;
}

std::unique_ptr<sentinel::Scorer> make_scorer(const PipelineConfig& config, const fs::path& input) {
    if (!config.scores) return std::make_unique<sentinel::NullScorer>();
    fs::path file = *config.scores;
    if (fs::is_directory(file)) file /= input.stem().string() + ".mpfs";
    std::optional<sentinel::LinearHead> head;
    if (config.head) head = sentinel::LinearHead::load(*config.head);
    return std::make_unique<sentinel::ScoreFileScorer>(sentinel::load_scores(file), std::move(head));
}

PipelineResult run_pipeline(const PipelineConfig& config, const fs::path& input) {
    config.validate();
    const auto model = microscope::ClassifierModel::load(*config.model);
    const auto scorer = make_scorer(config, input);
    const FrameSequence segment = sampling::load_frames(input, config.ingest());
    return run_pipeline(segment, *scorer, model, config);
}

nlohmann::json to_json(const PipelineResult& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["segment"] = {{"start", r.start_index}, {"length", r.length}};
    j["stage1"] = {{"s_agg", r.stage1.s_agg}, {"tau", r.stage1.tau}, {"verdict", sentinel::to_string(r.stage1.verdict)}};
    if (r.stage2) {
        j["stage2"] = {{"probability", r.stage2->probability}, {"verdict", to_string(r.stage2->verdict)}};
    } else {
        j["stage2"] = nullptr;
    }
    j["terminated_at"] = r.stage2 ? "stage2" : "stage1";
    j["final"] = to_string(r.final);
    return j;
}

}  // namespace mpf::pipeline
