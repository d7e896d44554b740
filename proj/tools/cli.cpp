#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mpf/consistency.hpp"
#include "mpf/eval.hpp"
#include "mpf/image_io.hpp"
#include "mpf/microscope.hpp"
#include "mpf/pipeline.hpp"
#include "mpf/residual.hpp"
#include "mpf/sampling.hpp"
#include "mpf/sentinel.hpp"
#include "mpf/synthgen.hpp"

namespace mpf::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSeedEnv = "MPFSCOPE_SEED";
const std::vector<std::string> kSubcommands{"sample", "residual", "consistency", "synth", "train", "detect", "eval"};

// Flat keys in a config file belong to the subcommand being run; nested
// tables/objects named after a subcommand keep their own scope.
class ScopedConfig : public CLI::Config {
public:
    ScopedConfig(bool json_format, std::string subcommand) : json_(json_format), subcommand_(std::move(subcommand)) {}

    std::string to_config(const CLI::App* app, bool defaults, bool write_desc, std::string prefix) const override {
        return toml_.to_config(app, defaults, write_desc, std::move(prefix));
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        std::vector<CLI::ConfigItem> items = json_ ? from_json(in) : toml_.from_config(in);
        for (auto& item : items) {
            if (item.parents.empty() && !subcommand_.empty()) item.parents = {subcommand_};
        }
        return items;
    }

private:
    static std::vector<CLI::ConfigItem> from_json(std::istream& in) {
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw CLI::ConversionError("config", std::string("invalid JSON config: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config", "JSON config must be an object");
        std::vector<CLI::ConfigItem> items;
        flatten(j, {}, items);
        return items;
    }

    static std::string scalar(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void flatten(const json& obj, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_null()) continue;
            if (value.is_object()) {
                auto sub = parents;
                sub.push_back(key);
                flatten(value, sub, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }

    bool json_;
    std::string subcommand_;
    CLI::ConfigTOML toml_;
};

struct Prescan {
    std::string subcommand;
    bool json_config = false;
};

Prescan prescan(int argc, const char* const* argv) {
    Prescan p;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        std::string path;
        if (a == "--config" && i + 1 < argc) path = argv[i + 1];
        if (a.rfind("--config=", 0) == 0) path = a.substr(9);
        if (!path.empty()) {
            std::string ext = fs::path(path).extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
            p.json_config = ext == ".json";
        }
        if (p.subcommand.empty() && std::find(kSubcommands.begin(), kSubcommands.end(), a) != kSubcommands.end()) {
            p.subcommand = a;
        }
    }
    return p;
}

/// Runs f(i) for i in [0, n) on up to `jobs` threads; results keep input order.
/// The first failing index (in order) is rethrown.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, std::size_t jobs, F f) {
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw_input_error("cli.unwritable", "cannot write " + path.string());
    f << text;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw_input_error("cli.missing_path", "cannot open " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw_input_error("cli.bad_json", path.filename().string() + ": " + e.what());
    }
}

std::string indexed_name(const char* prefix, std::size_t i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03zu%s", prefix, i, ext);
    return buf;
}

json stats_json(const consistency::ChangeStats& s) {
    return {{"change_ratio", s.change_ratio}, {"mask_density", s.mask_density}, {"centroid_x", s.centroid_x},
            {"centroid_y", s.centroid_y},     {"ratio_border", s.ratio_border}, {"ratio_center", s.ratio_center},
            {"spread", s.spread}};
}

// ---- option groups shared by several subcommands ----

struct SegmentArgs {
    std::size_t length = sampling::kDefaultLength;
    std::string mode = "fixed";
    std::uint64_t seed = 0;
    std::string fps;

    void add(CLI::App* app) {
        app->add_option("--length", length, "Segment length L (frames)")->capture_default_str()->check(CLI::Range(2, 1 << 20));
        app->add_option("--mode", mode, "Window placement")->capture_default_str()->check(CLI::IsMember({"fixed", "stochastic"}));
        app->add_option("--seed", seed, "Sampling seed")->envname(kSeedEnv)->capture_default_str();
        app->add_option("--fps", fps, "Override frame rate, e.g. 24 or 30000/1001");
    }

    sampling::IngestSpec spec() const {
        sampling::IngestSpec s;
        s.length = length;
        s.mode = sampling::parse_mode(mode);
        s.seed = seed;
        if (!fps.empty()) s.fps = parse_rational(fps);
        return s;
    }
};

struct ResidualArgs {
    std::string strategy = "normalized";
    double alpha = residual::kDefaultAlpha;
    double threshold = residual::kDefaultMaskThreshold;
    std::size_t block = residual::kDefaultBlock;
    std::size_t radius = residual::kDefaultRadius;

    void add(CLI::App* app) {
        app->add_option("--strategy", strategy, "normalized|mask|log|freq|flow")->capture_default_str();
        app->add_option("--alpha", alpha, "Amplification factor")->capture_default_str();
        app->add_option("--threshold", threshold, "Change threshold on the 0-255 scale")->capture_default_str();
        app->add_option("--block", block, "Optical-flow block size")->capture_default_str();
        app->add_option("--radius", radius, "Optical-flow search radius")->capture_default_str();
    }

    residual::Options options() const {
        residual::Options o;
        o.strategy = residual::parse_strategy(strategy);
        o.alpha = alpha;
        o.threshold = threshold;
        o.block = block;
        o.radius = radius;
        residual::validate(o);
        return o;
    }
};

struct RegionArgs {
    double border_margin = 0.125;
    double center_fraction = 0.5;

    void add(CLI::App* app) {
        app->add_option("--border-margin", border_margin, "Border band width (fraction of each side)")->capture_default_str();
        app->add_option("--center-fraction", center_fraction, "Center box size (fraction of each axis)")->capture_default_str();
    }

    consistency::RegionConfig regions() const {
        consistency::RegionConfig r{border_margin, center_fraction};
        consistency::validate(r);
        return r;
    }
};

// ---- sample ----

struct SampleArgs {
    std::string input;
    std::string out;
    SegmentArgs segment;
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
    const auto seq = sampling::load_frames(a.input, a.segment.spec());
    json j;
    j["source"] = a.input;
    j["id"] = seq.source_id();
    j["total_frames"] = seq.source_length();
    j["start"] = seq.start_index();
    j["length"] = seq.size();
    j["is_short"] = seq.is_short();
    j["fps"] = to_string(seq.fps());
    j["shape"] = to_string(seq.shape());
    if (!a.out.empty()) {
        fs::create_directories(a.out);
        json files = json::array();
        for (std::size_t i = 0; i < seq.size(); ++i) {
            const std::string name = indexed_name("frame", i, ".png");
            io::write_png8(fs::path(a.out) / name, seq.shape(), seq.frame(i));
            files.push_back(name);
        }
        write_text(fs::path(a.out) / "meta.json", json{{"fps", to_string(seq.fps())}}.dump(2) + "\n");
        j["files"] = files;
    }
    out << j.dump(2) << "\n";
    return kExitOk;
}

// ---- residual ----

struct ResidualCmdArgs {
    std::string input;
    std::string out;
    SegmentArgs segment;
    ResidualArgs residual;
};

int cmd_residual(const ResidualCmdArgs& a, std::ostream& out) {
    const auto options = a.residual.options();
    const auto seq = sampling::load_frames(a.input, a.segment.spec());
    const auto stack = residual::compute(seq, options);
    fs::create_directories(a.out);
    json files = json::array();
    for (std::size_t i = 0; i < stack.maps.size(); ++i) {
        const auto& m = stack.maps[i];
        std::vector<std::uint16_t> px(m.values.size());
        for (std::size_t k = 0; k < px.size(); ++k) {
            px[k] = static_cast<std::uint16_t>(std::lround(std::clamp(static_cast<double>(m.values[k]), 0.0, 255.0) * 257.0));
        }
        const std::string name = indexed_name("residual", i, ".png");
        io::write_png16(fs::path(a.out) / name, m.shape(), px);
        files.push_back(name);
    }
    json j;
    j["source"] = seq.source_id();
    j["start"] = seq.start_index();
    j["strategy"] = residual::to_string(options.strategy);
    j["alpha"] = options.alpha;
    j["threshold"] = options.threshold;
    j["count"] = stack.maps.size();
    j["shape"] = stack.maps.empty() ? std::string() : to_string(stack.maps.front().shape());
    j["scale"] = 257;
    j["files"] = files;
    write_text(fs::path(a.out) / "manifest.json", j.dump(2) + "\n");
    out << j.dump(2) << "\n";
    return kExitOk;
}

residual::ResidualStack read_residual_dir(const fs::path& dir) {
    const json m = read_json(dir / "manifest.json");
    residual::ResidualStack stack;
    try {
        stack.strategy = residual::parse_strategy(m.at("strategy").get<std::string>());
        stack.alpha = m.value("alpha", residual::kDefaultAlpha);
        const double scale = m.value("scale", 257.0);
        for (const auto& f : m.at("files")) {
            const auto img = io::read_png16(dir / f.get<std::string>());
            residual::ResidualMap map(img.shape.height, img.shape.width, img.shape.channels);
            for (std::size_t k = 0; k < map.values.size(); ++k) map.values[k] = static_cast<float>(img.pixels[k] / scale);
            stack.maps.push_back(std::move(map));
        }
    } catch (const json::exception& e) {
        throw_input_error("cli.bad_manifest", (dir / "manifest.json").string() + ": " + e.what());
    }
    return stack;
}

// ---- consistency ----

struct ConsistencyArgs {
    std::string input;
    bool json_output = true;
    SegmentArgs segment;
    ResidualArgs residual;
    RegionArgs regions;
    double w1 = 0.5;
    double w2 = 0.5;
};

/// A residual manifest, a directory holding one, or nothing (frames input).
std::optional<fs::path> residual_dir_of(const fs::path& input) {
    if (fs::is_regular_file(input) && input.extension() == ".json") return input.parent_path().empty() ? fs::path(".") : input.parent_path();
    if (fs::is_directory(input) && fs::exists(input / "manifest.json")) {
        const json m = read_json(input / "manifest.json");
        if (m.contains("strategy")) return input;
    }
    return std::nullopt;
}

int cmd_consistency(const ConsistencyArgs& a, std::ostream& out) {
    const auto regions = a.regions.regions();
    residual::ResidualStack stack;
    if (const auto dir = residual_dir_of(a.input)) {
        stack = read_residual_dir(*dir);
    } else {
        const auto options = a.residual.options();
        stack = residual::compute(sampling::load_frames(a.input, a.segment.spec()), options);
    }
    const auto result = consistency::analyze(stack, a.residual.threshold, regions, a.w1, a.w2);
    json j;
    j["count"] = stack.maps.size();
    j["strategy"] = residual::to_string(stack.strategy);
    j["per_frame"] = json::array();
    for (const auto& s : result.per_frame) j["per_frame"].push_back(stats_json(s));
    j["c_qty"] = result.score.c_qty;
    j["c_spa"] = result.score.c_spa;
    j["s_cons"] = result.score.s_cons;
    j["w1"] = result.score.w1;
    j["w2"] = result.score.w2;
    out << j.dump(2) << "\n";
    return kExitOk;
}

// ---- synth ----

struct SynthArgs {
    std::string regime = "decoder";
    std::string out;
    std::size_t count = 200;
    std::size_t length = 8;
    std::size_t height = 64;
    std::size_t width = 64;
    std::size_t channels = 3;
    std::uint64_t seed = 42;
    std::string fps = "8";
    std::string subset;
    std::size_t latent_dim = 16;
    double drift = 0.05;
    std::string nonlinearity = "linear";
    int jitter = synth::PhysicsModel{}.jitter_px;
    double noise = synth::PhysicsModel{}.shot_noise_sigma;
    double motion_prob = synth::PhysicsModel{}.motion_prob;
    std::size_t object_size = synth::PhysicsModel{}.object_size;
    std::string scene = "texture";
    std::optional<double> bitrate;
    std::size_t jobs = 1;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    synth::SynthConfig cfg;
    cfg.regime = synth::parse_regime(a.regime);
    cfg.shape = {a.height, a.width, a.channels};
    cfg.length = a.length;
    cfg.count = a.count;
    cfg.seed = a.seed;
    cfg.fps = parse_rational(a.fps);
    cfg.subset = a.subset;
    cfg.latent_dim = a.latent_dim;
    cfg.drift = a.drift;
    cfg.nonlinearity = synth::parse_nonlinearity(a.nonlinearity);
    cfg.physics.jitter_px = a.jitter;
    cfg.physics.shot_noise_sigma = a.noise;
    cfg.physics.motion_prob = a.motion_prob;
    cfg.physics.object_size = a.object_size;
    cfg.base_scene = synth::parse_base_scene(a.scene);
    cfg.validate();
    auto manifest = synth::generate_corpus(cfg, a.out, a.jobs);
    if (a.bitrate) {
        // Optional per-corpus bitrate tag, consumed by the quality profile.
        for (auto& e : manifest.sequences) e.bitrate_mbps = *a.bitrate;
        write_text(fs::path(a.out) / "manifest.json", synth::manifest_to_json(manifest).dump(2) + "\n");
    }
    json j;
    j["out"] = a.out;
    j["manifest"] = (fs::path(a.out) / "manifest.json").string();
    j["count"] = manifest.sequences.size();
    j["subset"] = cfg.subset_name();
    j["config_hash"] = manifest.config_hash;
    out << j.dump(2) << "\n";
    return kExitOk;
}

// ---- train ----

struct TrainArgs {
    std::vector<std::string> corpora;
    std::string out;
    SegmentArgs segment;
    ResidualArgs residual;
    RegionArgs regions;
    std::size_t epochs = 300;
    double lr = 0.1;
    double l2 = 1e-4;
    double holdout = 0.2;
    double tolerance = 1e-7;
    std::size_t jobs = 1;
};

pipeline::PipelineConfig feature_config(const SegmentArgs& s, const ResidualArgs& r, const RegionArgs& g) {
    pipeline::PipelineConfig cfg;
    cfg.length = s.length;
    cfg.mode = sampling::parse_mode(s.mode);
    cfg.seed = s.seed;
    cfg.residual = r.options();
    cfg.regions = g.regions();
    return cfg;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
    const auto cfg = feature_config(a.segment, a.residual, a.regions);
    if (!(a.holdout >= 0.0 && a.holdout < 1.0)) throw_config_error("cli.bad_holdout", "--holdout must lie in [0, 1)");
    std::vector<synth::CorpusManifest> manifests;
    for (const auto& c : a.corpora) manifests.push_back(synth::read_manifest(c));

    struct Item {
        fs::path path;
        Verdict label;
    };
    std::vector<Item> items;
    for (const auto& m : manifests) {
        for (const auto& e : m.sequences) items.push_back({m.path_of(e), e.label});
    }
    if (items.empty()) throw_input_error("cli.empty_corpus", "the corpus manifests list no sequences");

    const auto spec = a.segment.spec();
    const auto features = parallel_map<std::vector<double>>(items.size(), a.jobs, [&](std::size_t i) {
        return pipeline::segment_features(sampling::load_frames(items[i].path, spec), cfg);
    });

    std::vector<Verdict> labels;
    for (const auto& it : items) labels.push_back(it.label);
    const auto split = microscope::stratified_split(labels, a.holdout, derive_seed(a.segment.seed, 0x5b117));

    std::vector<microscope::LabeledExample> train_set;
    for (std::size_t i : split.train) train_set.push_back({features[i], labels[i]});
    microscope::TrainOptions opts;
    opts.epochs = a.epochs;
    opts.learning_rate = a.lr;
    opts.l2 = a.l2;
    opts.seed = a.segment.seed;
    opts.tolerance = a.tolerance;
    const auto result = microscope::train(train_set, opts);
    result.model.save(a.out);

    json j;
    j["model"] = a.out;
    j["examples"] = items.size();
    j["train"] = split.train.size();
    j["test"] = split.test.size();
    j["feature_dim"] = result.model.feature_dim();
    j["epochs_run"] = result.epochs_run;
    j["final_loss"] = result.final_loss;
    if (split.test.empty()) {
        j["holdout"] = nullptr;
    } else {
        std::vector<Verdict> truth;
        std::vector<Verdict> pred;
        for (std::size_t i : split.test) {
            truth.push_back(labels[i]);
            pred.push_back(microscope::classify(result.model, features[i]).verdict);
        }
        j["holdout"] = eval::to_json(eval::metrics(truth, pred));
    }
    out << j.dump(2) << "\n";
    return kExitOk;
}

// ---- detect ----

struct DetectArgs {
    std::vector<std::string> frames;
    bool pipeline = false;
    std::string scores;
    std::string head;
    std::string model;
    double tau = sentinel::kDefaultTau;
    std::string report;
    std::size_t jobs = 1;
    SegmentArgs segment;
    ResidualArgs residual;
    RegionArgs regions;
};

json stage1_only(const DetectArgs& a, const pipeline::PipelineConfig& cfg, const std::string& input) {
    std::vector<double> logits;
    std::string id;
    if (input.empty()) {
        std::optional<sentinel::LinearHead> head;
        if (cfg.head) head = sentinel::LinearHead::load(*cfg.head);
        logits = sentinel::to_logits(sentinel::load_scores(*cfg.scores), head ? &*head : nullptr);
        id = fs::path(a.scores).stem().string();
    } else {
        const auto seq = sampling::load_frames(input, cfg.ingest());
        logits = pipeline::make_scorer(cfg, input)->score(seq);
        id = seq.source_id();
    }
    const auto d = sentinel::gate(sentinel::aggregate_mean(logits), cfg.tau);
    json j;
    j["id"] = id;
    j["stage1"] = {{"s_agg", d.s_agg}, {"tau", d.tau}, {"verdict", sentinel::to_string(d.verdict)}};
    j["final"] = d.verdict == sentinel::GateVerdict::OffManifold ? json(to_string(Verdict::AI)) : json(nullptr);
    return j;
}

int cmd_detect(const DetectArgs& a, std::ostream& out) {
    auto cfg = feature_config(a.segment, a.residual, a.regions);
    cfg.tau = a.tau;
    if (!std::isfinite(cfg.tau)) throw_config_error("cli.bad_tau", "--tau must be finite");
    if (!a.scores.empty()) cfg.scores = a.scores;
    if (!a.head.empty()) cfg.head = a.head;
    if (!a.model.empty()) cfg.model = a.model;

    std::vector<json> results;
    if (!a.pipeline) {
        if (!cfg.scores) throw_config_error("cli.scores_required", "stage-1 detection needs --scores");
        if (a.frames.empty()) {
            results.push_back(stage1_only(a, cfg, {}));
        } else {
            results = parallel_map<json>(a.frames.size(), a.jobs, [&](std::size_t i) { return stage1_only(a, cfg, a.frames[i]); });
        }
    } else {
        cfg.validate();
        if (a.frames.empty()) throw_config_error("cli.frames_required", "pipeline detection needs --frames");
        const auto model = microscope::ClassifierModel::load(*cfg.model);
        results = parallel_map<json>(a.frames.size(), a.jobs, [&](std::size_t i) {
            const auto scorer = pipeline::make_scorer(cfg, a.frames[i]);
            const auto seq = sampling::load_frames(a.frames[i], cfg.ingest());
            return pipeline::to_json(pipeline::run_pipeline(seq, *scorer, model, cfg));
        });
    }
    const json doc = results.size() == 1 ? results.front() : json{{"results", results}};
    const std::string text = doc.dump(2) + "\n";
    if (!a.report.empty()) write_text(a.report, text);
    out << text;
    return kExitOk;
}

// ---- eval ----

struct EvalArgs {
    std::string pred;
    std::vector<std::string> truth;
    std::string report;
    std::string csv;
};

eval::PredictionRecord parse_prediction(const json& r) {
    eval::PredictionRecord p;
    p.id = r.at("id").get<std::string>();
    const auto& final = r.at("final");
    if (final.is_null()) throw_input_error("eval.undecided", "prediction '" + p.id + "' has no final verdict");
    p.final = parse_verdict(final.get<std::string>());
    const auto stage2 = r.find("stage2");
    if (stage2 != r.end() && !stage2->is_null()) p.stage2 = parse_verdict(stage2->at("verdict").get<std::string>());
    p.intercepted = !p.stage2;
    return p;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const json pred = read_json(a.pred);
    std::vector<eval::PredictionRecord> predictions;
    try {
        if (pred.is_array()) {
            for (const auto& r : pred) predictions.push_back(parse_prediction(r));
        } else if (pred.contains("results")) {
            for (const auto& r : pred.at("results")) predictions.push_back(parse_prediction(r));
        } else {
            predictions.push_back(parse_prediction(pred));
        }
    } catch (const json::exception& e) {
        throw_input_error("eval.bad_predictions", a.pred + ": " + e.what());
    }

    std::vector<synth::CorpusManifest> manifests;
    for (const auto& t : a.truth) manifests.push_back(synth::read_manifest(t));
    std::vector<eval::TruthRecord> truth;
    for (const auto& m : manifests) {
        for (const auto& e : m.sequences) truth.push_back({e.id, e.label, e.subset});
    }
    const auto quality = eval::quality_profile(eval::quality_inputs(manifests));
    const auto report = eval::evaluate(truth, predictions, quality);
    const std::string text = eval::to_json(report).dump(2) + "\n";
    if (!a.report.empty()) write_text(a.report, text);
    if (!a.csv.empty()) write_text(a.csv, eval::correlation_csv(report));
    out << text;
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Forensic detector for AI-generated video based on inter-frame residual consistency", "mpfscope"};
    app.require_subcommand(1);
    app.fallthrough();
    app.allow_config_extras(CLI::config_extras_mode::error);
    const Prescan pre = prescan(argc, argv);
    app.set_config("--config", "", "TOML or JSON file; flat keys set options of the chosen subcommand");
    app.config_formatter(std::make_shared<ScopedConfig>(pre.json_config, pre.subcommand));

    SampleArgs sample;
    auto* s = app.add_subcommand("sample", "Sample an L-frame segment from a frame directory or .mpfraw file");
    s->add_option("--input", sample.input, "Frame directory or .mpfraw file")->required();
    s->add_option("--out", sample.out, "Write the segment as PNG frames into this directory");
    sample.segment.add(s);

    ResidualCmdArgs res;
    auto* r = app.add_subcommand("residual", "Compute enhanced inter-frame residuals and write 16-bit PNGs");
    r->add_option("--input", res.input, "Frame directory or .mpfraw file")->required();
    r->add_option("--out", res.out, "Output directory")->required();
    res.segment.add(r);
    res.residual.add(r);

    ConsistencyArgs con;
    auto* c = app.add_subcommand("consistency", "Change statistics and C_qty / C_spa / S_cons of a residual stack");
    c->add_option("--input", con.input,
                  "Residual manifest.json (or its directory) written by `mpfscope residual`, or frames to analyse "
                  "with normalized residuals")
        ->required();
    c->add_flag("--json", con.json_output, "Emit JSON (the only output format)");
    c->add_option("--w1", con.w1, "Weight of C_qty")->capture_default_str();
    c->add_option("--w2", con.w2, "Weight of C_spa")->capture_default_str();
    con.segment.add(c);
    con.residual.add(c);
    con.regions.add(c);

    SynthArgs syn;
    auto* y = app.add_subcommand("synth", "Generate a synthetic corpus (decoder or physics regime)");
    y->add_option("--regime", syn.regime, "decoder|physics")->capture_default_str();
    y->add_option("--out", syn.out, "Output directory")->required();
    y->add_option("--count", syn.count, "Number of sequences")->capture_default_str();
    y->add_option("--length", syn.length, "Frames per sequence")->capture_default_str();
    y->add_option("--height", syn.height)->capture_default_str();
    y->add_option("--width", syn.width)->capture_default_str();
    y->add_option("--channels", syn.channels)->capture_default_str();
    y->add_option("--seed", syn.seed, "Corpus seed")->envname(kSeedEnv)->capture_default_str();
    y->add_option("--fps", syn.fps, "Frame rate stored in the files")->capture_default_str();
    y->add_option("--subset", syn.subset, "Subset name (defaults to the regime)");
    y->add_option("--latent-dim", syn.latent_dim, "Decoder latent dimension M")->capture_default_str();
    y->add_option("--drift", syn.drift, "Latent drift per frame")->capture_default_str();
    y->add_option("--nonlinearity", syn.nonlinearity, "linear|tanh")->capture_default_str();
    y->add_option("--jitter", syn.jitter, "Physics camera jitter (pixels)")->capture_default_str();
    y->add_option("--noise", syn.noise, "Physics shot-noise sigma")->capture_default_str();
    y->add_option("--motion-prob", syn.motion_prob, "Probability of a moving object")->capture_default_str();
    y->add_option("--object-size", syn.object_size, "Moving object edge length")->capture_default_str();
    y->add_option("--scene", syn.scene, "texture|gradient|checkerboard")->capture_default_str();
    y->add_option("--bitrate", syn.bitrate, "Bitrate tag in Mbps for quality profiling");
    y->add_option("--jobs", syn.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train the residual classifier on one or more corpora");
    t->add_option("--corpus", tr.corpora, "Corpus manifest.json (repeatable)")->required();
    t->add_option("--out", tr.out, "Model file to write")->required();
    t->add_option("--epochs", tr.epochs)->capture_default_str();
    t->add_option("--lr", tr.lr, "Initial learning rate")->capture_default_str();
    t->add_option("--l2", tr.l2, "L2 penalty")->capture_default_str();
    t->add_option("--holdout", tr.holdout, "Held-out fraction per class")->capture_default_str();
    t->add_option("--tolerance", tr.tolerance, "Early-stop loss change")->capture_default_str();
    t->add_option("--jobs", tr.jobs, "Worker threads for feature extraction")->capture_default_str()->check(CLI::PositiveNumber);
    tr.segment.add(t);
    tr.residual.add(t);
    tr.regions.add(t);

    DetectArgs det;
    auto* d = app.add_subcommand("detect", "Run the gate alone or the full two-stage pipeline");
    d->add_option("--frames,frames", det.frames, "Frame directories or .mpfraw files");
    d->add_flag("--pipeline", det.pipeline, "Run the residual stage when the gate does not fire");
    d->add_option("--scores", det.scores, "ScoreFile, or a directory of <id>.mpfs files");
    d->add_option("--head", det.head, "Linear head JSON for embedding ScoreFiles");
    d->add_option("--model", det.model, "Trained model file");
    d->add_option("--tau", det.tau, "Gate threshold")->capture_default_str();
    d->add_option("--report", det.report, "Also write the JSON output to this file");
    d->add_option("--jobs", det.jobs, "Videos processed in parallel")->capture_default_str()->check(CLI::PositiveNumber);
    det.segment.add(d);
    det.residual.add(d);
    det.regions.add(d);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Score detect output against corpus labels");
    e->add_option("--pred", ev.pred, "JSON written by `mpfscope detect`")->required();
    e->add_option("--truth", ev.truth, "Corpus manifest.json (repeatable)")->required();
    e->add_option("--report", ev.report, "Report JSON path");
    e->add_option("--csv", ev.csv, "Quality/accuracy CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        if (ex.get_exit_code() == 0) return app.exit(ex, out, err);
        err << "error[cli.usage]: " << ex.what() << "\n";
        return kExitConfig;
    }

    try {
        if (*s) return cmd_sample(sample, out);
        if (*r) return cmd_residual(res, out);
        if (*c) return cmd_consistency(con, out);
        if (*y) return cmd_synth(syn, out);
        if (*t) return cmd_train(tr, out);
        if (*d) return cmd_detect(det, out);
        if (*e) return cmd_eval(ev, out);
    } catch (const Error& ex) {
        err << "error: " << ex.what() << "\n";
        return ex.kind() == ErrorKind::Config ? kExitConfig : kExitInput;
    } catch (const std::exception& ex) {
        err << "error[io]: " << ex.what() << "\n";
        return kExitInput;
    }
    return kExitConfig;
}

}  // namespace mpf::cli
