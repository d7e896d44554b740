#include "mpf/synthgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <thread>

#include "mpf/mpfraw.hpp"

namespace mpf::synth {
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDecoderStream = 0xDEC0DEULL;
constexpr std::uint64_t kSceneStream = 0x5CE7EULL;
constexpr double kRescaleLow = 32.0;
constexpr double kRescaleHigh = 223.0;

std::uint8_t quantize(double v) { return static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0)); }

Eigen::VectorXd gaussian_vector(Rng& rng, std::size_t n, double scale = 1.0) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * rng.normal();
    return v;
}

std::size_t wrap(std::ptrdiff_t v, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(((v % m) + m) % m);
}

std::string sequence_id(const std::string& subset, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%06zu", index);
    return subset + buf;
}

}  // namespace

std::string_view to_string(Regime r) { return r == Regime::Decoder ? "decoder" : "physics"; }
std::string_view to_string(Nonlinearity n) { return n == Nonlinearity::None ? "none" : "tanh"; }
std::string_view to_string(BaseScene s) {
    switch (s) {
        case BaseScene::RandomTexture: return "random-texture";
        case BaseScene::Gradient: return "gradient";
        case BaseScene::Checkerboard: return "checkerboard";
    }
    return "unknown";
}

Regime parse_regime(std::string_view text) {
    if (text == "decoder") return Regime::Decoder;
    if (text == "physics") return Regime::Physics;
    throw_config_error("synthgen.bad_regime", "regime must be decoder or physics, got '" + std::string(text) + "'");
}

Nonlinearity parse_nonlinearity(std::string_view text) {
    if (text == "none" || text == "linear") return Nonlinearity::None;
    if (text == "tanh" || text == "tanh-on-hidden") return Nonlinearity::TanhHidden;
    throw_config_error("synthgen.bad_nonlinearity", "nonlinearity must be none or tanh, got '" + std::string(text) + "'");
}

BaseScene parse_base_scene(std::string_view text) {
    if (text == "random-texture" || text == "texture") return BaseScene::RandomTexture;
    if (text == "gradient") return BaseScene::Gradient;
    if (text == "checkerboard") return BaseScene::Checkerboard;
    throw_config_error("synthgen.bad_scene", "unknown base scene '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Decoder regime

DecoderModel DecoderModel::random(const Shape& shape, std::size_t latent_dim, Nonlinearity nonlinearity,
                                  std::uint64_t seed) {
    DecoderModel m;
    m.shape = shape;
    m.latent_dim = latent_dim;
    m.nonlinearity = nonlinearity;
    if (latent_dim == 0 || latent_dim >= shape.size()) {
        throw_config_error("synthgen.bad_latent_dim", "latent dimension must satisfy 0 < M < N = " + std::to_string(shape.size()));
    }
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(shape.size());
    const auto md = static_cast<Eigen::Index>(latent_dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
    m.weights.resize(n, md);
    for (Eigen::Index j = 0; j < md; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) m.weights(i, j) = scale * rng.normal();
    }
    m.bias = gaussian_vector(rng, shape.size(), 0.5);
    if (nonlinearity == Nonlinearity::TanhHidden) {
        m.hidden_weights.resize(md, md);
        for (Eigen::Index j = 0; j < md; ++j) {
            for (Eigen::Index i = 0; i < md; ++i) m.hidden_weights(i, j) = scale * rng.normal();
        }
        m.hidden_bias = gaussian_vector(rng, latent_dim, 0.1);
    }
    return m;
}

void DecoderModel::validate() const {
    const auto n = static_cast<Eigen::Index>(shape.size());
    const auto md = static_cast<Eigen::Index>(latent_dim);
    if (latent_dim == 0 || latent_dim >= shape.size()) throw_config_error("synthgen.bad_latent_dim", "decoder must be compressive (M < N)");
    if (weights.rows() != n || weights.cols() != md || bias.size() != n) {
        throw_input_error("synthgen.shape_mismatch", "decoder weights do not match shape " + to_string(shape));
    }
    if (!weights.allFinite() || !bias.allFinite()) throw_input_error("synthgen.non_finite", "decoder weights are not finite");
    if (nonlinearity == Nonlinearity::TanhHidden &&
        (hidden_weights.rows() != md || hidden_weights.cols() != md || hidden_bias.size() != md)) {
        throw_input_error("synthgen.shape_mismatch", "hidden layer must be M x M");
    }
}

Eigen::VectorXd DecoderModel::decode(const Eigen::VectorXd& z) const {
    if (z.size() != static_cast<Eigen::Index>(latent_dim)) throw_input_error("synthgen.shape_mismatch", "latent vector has wrong size");
    if (nonlinearity == Nonlinearity::TanhHidden) {
        const Eigen::VectorXd hidden = (hidden_weights * z + hidden_bias).array().tanh().matrix();
        return weights * hidden + bias;
    }
    return weights * z + bias;
}

std::vector<Eigen::VectorXd> latent_path(std::size_t latent_dim, const LatentTrajectory& traj) {
    if (traj.steps == 0) throw_config_error("synthgen.bad_steps", "trajectory needs at least one step");
    if (!(traj.drift >= 0.0)) throw_config_error("synthgen.bad_drift", "drift must be non-negative");
    if (!(traj.persistence >= 0.0 && traj.persistence < 1.0)) throw_config_error("synthgen.bad_persistence", "persistence must be in [0, 1)");
    Rng rng(traj.seed);
    Eigen::VectorXd z = traj.z0.size() > 0 ? traj.z0 : gaussian_vector(rng, latent_dim);
    if (z.size() != static_cast<Eigen::Index>(latent_dim)) throw_input_error("synthgen.shape_mismatch", "z0 has wrong size");

    const double step_norm = traj.drift * std::sqrt(static_cast<double>(latent_dim));
    // Per-coordinate innovation scale so the new term has unit expected norm.
    const double innovation = std::sqrt((1.0 - traj.persistence * traj.persistence) / static_cast<double>(latent_dim));
    Eigen::VectorXd direction = gaussian_vector(rng, latent_dim).normalized();

    std::vector<Eigen::VectorXd> path;
    path.reserve(traj.steps);
    path.push_back(z);
    for (std::size_t t = 1; t < traj.steps; ++t) {
        if (t > 1) direction = (traj.persistence * direction + innovation * gaussian_vector(rng, latent_dim)).normalized();
        z += step_norm * direction;
        path.push_back(z);
    }
    return path;
}

std::vector<Eigen::VectorXd> decode_path(const DecoderModel& model, const LatentTrajectory& traj) {
    model.validate();
    std::vector<Eigen::VectorXd> frames;
    for (const auto& z : latent_path(model.latent_dim, traj)) frames.push_back(model.decode(z));
    return frames;
}

FrameSequence generate_decoder_sequence(const DecoderModel& model, const LatentTrajectory& traj, const Shape& shape,
                                        Rational fps, std::string source_id) {
    if (shape != model.shape) {
        throw_input_error("synthgen.shape_mismatch", "decoder emits " + to_string(model.shape) + ", requested " + to_string(shape));
    }
    const auto outputs = decode_path(model, traj);
    const double lo = outputs.front().minCoeff();
    const double hi = outputs.front().maxCoeff();
    const double scale = hi > lo ? (kRescaleHigh - kRescaleLow) / (hi - lo) : 1.0;
    std::vector<Frame> frames;
    frames.reserve(outputs.size());
    for (const auto& out : outputs) {
        Frame f(shape.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = quantize(kRescaleLow + (out[static_cast<Eigen::Index>(i)] - lo) * scale);
        frames.push_back(std::move(f));
    }
    return FrameSequence(shape, std::move(frames), fps, std::move(source_id));
}

// ---------------------------------------------------------------------------
// Physics regime

void PhysicsModel::validate() const {
    if (jitter_px < 0 || !(shot_noise_sigma >= 0.0) || !(motion_prob >= 0.0 && motion_prob <= 1.0)) {
        throw_config_error("synthgen.bad_physics", "physics parameters must be non-negative and motion_prob <= 1");
    }
}

std::vector<double> base_scene(BaseScene scene, const Shape& shape, std::uint64_t seed) {
    const std::size_t h = shape.height, w = shape.width, c = shape.channels;
    std::vector<double> img(shape.size());
    Rng rng(seed);
    switch (scene) {
        case BaseScene::RandomTexture: {
            std::vector<double> noise(shape.size());
            for (auto& v : noise) v = rng.normal();
            // Separable wrap-around box blur, radius 2.
            constexpr int r = 2;
            std::vector<double> tmp(shape.size());
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x)
                    for (std::size_t k = 0; k < c; ++k) {
                        double s = 0.0;
                        for (int d = -r; d <= r; ++d) s += noise[(y * w + wrap(static_cast<std::ptrdiff_t>(x) + d, w)) * c + k];
                        tmp[(y * w + x) * c + k] = s;
                    }
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x)
                    for (std::size_t k = 0; k < c; ++k) {
                        double s = 0.0;
                        for (int d = -r; d <= r; ++d) s += tmp[(wrap(static_cast<std::ptrdiff_t>(y) + d, h) * w + x) * c + k];
                        img[(y * w + x) * c + k] = s;
                    }
            const auto [lo, hi] = std::minmax_element(img.begin(), img.end());
            const double l = *lo, range = *hi - *lo;
            for (auto& v : img) v = range > 0.0 ? 40.0 + 175.0 * (v - l) / range : 128.0;
            break;
        }
        case BaseScene::Gradient: {
            const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double cx = std::cos(theta), cy = std::sin(theta);
            const double span = std::abs(cx) * static_cast<double>(w) + std::abs(cy) * static_cast<double>(h);
            const double offset = std::min(0.0, cx) * static_cast<double>(w) + std::min(0.0, cy) * static_cast<double>(h);
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    const double t = (cx * static_cast<double>(x) + cy * static_cast<double>(y) - offset) / span;
                    for (std::size_t k = 0; k < c; ++k) {
                        img[(y * w + x) * c + k] = 40.0 + 175.0 * t * (1.0 - 0.1 * static_cast<double>(k));
                    }
                }
            break;
        }
        case BaseScene::Checkerboard: {
            const std::size_t cell = std::max<std::size_t>(2, std::min(h, w) / 8);
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x)
                    for (std::size_t k = 0; k < c; ++k) {
                        img[(y * w + x) * c + k] = ((y / cell + x / cell) % 2 == 0) ? 60.0 : 190.0;
                    }
            break;
        }
    }
    return img;
}

FrameSequence generate_physics_sequence(const PhysicsModel& model, const Shape& shape, std::size_t length,
                                        BaseScene scene, Rational fps, std::string source_id) {
    model.validate();
    if (shape.size() == 0) throw_config_error("synthgen.bad_shape", "empty frame shape");
    if (length == 0) throw_config_error("synthgen.bad_length", "length must be positive");
    const std::size_t h = shape.height, w = shape.width, c = shape.channels;
    const std::vector<double> base = base_scene(scene, shape, derive_seed(model.seed, kSceneStream));

    Rng rng(model.seed);
    const auto span = static_cast<std::uint64_t>(2 * model.jitter_px + 1);
    std::vector<double> colour(c);
    for (auto& v : colour) v = rng.uniform(20.0, 235.0);
    const auto oy = static_cast<std::ptrdiff_t>(rng.uniform_index(h));
    const auto ox = static_cast<std::ptrdiff_t>(rng.uniform_index(w));
    const auto vy = static_cast<std::ptrdiff_t>(rng.uniform_index(7)) - 3;
    const auto vx = static_cast<std::ptrdiff_t>(rng.uniform_index(7)) - 3;

    std::vector<Frame> frames;
    frames.reserve(length);
    std::vector<double> img(shape.size());
    for (std::size_t t = 0; t < length; ++t) {
        std::ptrdiff_t sy = 0, sx = 0;
        if (t > 0) {
            sy = static_cast<std::ptrdiff_t>(rng.uniform_index(span)) - model.jitter_px;
            sx = static_cast<std::ptrdiff_t>(rng.uniform_index(span)) - model.jitter_px;
        }
        for (std::size_t y = 0; y < h; ++y) {
            const std::size_t src_y = wrap(static_cast<std::ptrdiff_t>(y) - sy, h);
            for (std::size_t x = 0; x < w; ++x) {
                const std::size_t src_x = wrap(static_cast<std::ptrdiff_t>(x) - sx, w);
                for (std::size_t k = 0; k < c; ++k) img[(y * w + x) * c + k] = base[(src_y * w + src_x) * c + k];
            }
        }
        const bool object_visible = rng.uniform01() < model.motion_prob;
        if (object_visible && model.object_size > 0) {
            const auto ti = static_cast<std::ptrdiff_t>(t);
            for (std::size_t dy = 0; dy < model.object_size; ++dy) {
                for (std::size_t dx = 0; dx < model.object_size; ++dx) {
                    const std::size_t y = wrap(oy + vy * ti + static_cast<std::ptrdiff_t>(dy), h);
                    const std::size_t x = wrap(ox + vx * ti + static_cast<std::ptrdiff_t>(dx), w);
                    for (std::size_t k = 0; k < c; ++k) img[(y * w + x) * c + k] = colour[k];
                }
            }
        }
        Frame f(shape.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double noise = model.shot_noise_sigma > 0.0 ? model.shot_noise_sigma * rng.normal() : 0.0;
            f[i] = quantize(img[i] + noise);
        }
        frames.push_back(std::move(f));
    }
    return FrameSequence(shape, std::move(frames), fps, std::move(source_id));
}

// ---------------------------------------------------------------------------
// Corpus

void SynthConfig::validate() const {
    if (shape.size() == 0 || shape.channels > 255) throw_config_error("synthgen.bad_shape", "invalid frame shape " + mpf::to_string(shape));
    if (length < 2) throw_config_error("synthgen.bad_length", "sequence length must be at least 2");
    if (count < 1) throw_config_error("synthgen.bad_count", "count must be at least 1");
    if (regime == Regime::Decoder) {
        if (latent_dim == 0 || latent_dim >= shape.size()) throw_config_error("synthgen.bad_latent_dim", "latent dimension must satisfy 0 < M < N");
        if (!(drift >= 0.0) || !std::isfinite(drift)) throw_config_error("synthgen.bad_drift", "drift must be non-negative");
    } else {
        physics.validate();
    }
}

std::string SynthConfig::subset_name() const { return subset.empty() ? std::string(synth::to_string(regime)) : subset; }

nlohmann::json SynthConfig::to_json() const {
    nlohmann::json j;
    j["regime"] = synth::to_string(regime);
    j["height"] = shape.height;
    j["width"] = shape.width;
    j["channels"] = shape.channels;
    j["length"] = length;
    j["count"] = count;
    j["seed"] = seed;
    j["fps"] = mpf::to_string(fps);
    j["subset"] = subset_name();
    if (regime == Regime::Decoder) {
        j["latent_dim"] = latent_dim;
        j["drift"] = drift;
        j["nonlinearity"] = synth::to_string(nonlinearity);
    } else {
        j["jitter_px"] = physics.jitter_px;
        j["shot_noise_sigma"] = physics.shot_noise_sigma;
        j["motion_prob"] = physics.motion_prob;
        j["object_size"] = physics.object_size;
        j["base_scene"] = synth::to_string(base_scene);
    }
    return j;
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
    SynthConfig c;
    c.regime = parse_regime(j.value("regime", std::string("decoder")));
    c.shape = {j.value("height", std::size_t{64}), j.value("width", std::size_t{64}), j.value("channels", std::size_t{3})};
    c.length = j.value("length", std::size_t{8});
    c.count = j.value("count", std::size_t{1});
    c.seed = j.value("seed", std::uint64_t{42});
    c.fps = parse_rational(j.value("fps", std::string("8")));
    c.subset = j.value("subset", std::string());
    c.latent_dim = j.value("latent_dim", std::size_t{16});
    c.drift = j.value("drift", 0.05);
    c.nonlinearity = parse_nonlinearity(j.value("nonlinearity", std::string("none")));
    c.physics.jitter_px = j.value("jitter_px", 1);
    c.physics.shot_noise_sigma = j.value("shot_noise_sigma", 0.5);
    c.physics.motion_prob = j.value("motion_prob", 0.5);
    c.physics.object_size = j.value("object_size", std::size_t{8});
    c.base_scene = parse_base_scene(j.value("base_scene", std::string("random-texture")));
    return c;
}

namespace {

FrameSequence generate_with(const SynthConfig& cfg, const DecoderModel* decoder, std::size_t index) {
    const std::uint64_t seed = derive_seed(cfg.seed, index);
    std::string id = sequence_id(cfg.subset_name(), index);
    if (cfg.regime == Regime::Decoder) {
        LatentTrajectory traj;
        traj.drift = cfg.drift;
        traj.steps = cfg.length;
        traj.seed = seed;
        return generate_decoder_sequence(*decoder, traj, cfg.shape, cfg.fps, std::move(id));
    }
    PhysicsModel model = cfg.physics;
    model.seed = seed;
    return generate_physics_sequence(model, cfg.shape, cfg.length, cfg.base_scene, cfg.fps, std::move(id));
}

std::optional<DecoderModel> corpus_decoder(const SynthConfig& cfg) {
    if (cfg.regime != Regime::Decoder) return std::nullopt;
    return DecoderModel::random(cfg.shape, cfg.latent_dim, cfg.nonlinearity, derive_seed(cfg.seed, kDecoderStream));
}

}  // namespace

FrameSequence generate_sequence(const SynthConfig& cfg, std::size_t index) {
    cfg.validate();
    const auto decoder = corpus_decoder(cfg);
    return generate_with(cfg, decoder ? &*decoder : nullptr, index);
}

CorpusManifest generate_corpus(const SynthConfig& cfg, const fs::path& out, std::size_t jobs) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw_input_error("synthgen.unwritable", "cannot create output directory " + out.string());

    const auto decoder = corpus_decoder(cfg);
    CorpusManifest manifest;
    manifest.directory = out;
    manifest.config = cfg;
    manifest.config_hash = hex64(fnv1a64(cfg.to_json().dump()));
    manifest.sequences.resize(cfg.count);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.count; i = next++) {
            try {
                const FrameSequence seq = generate_with(cfg, decoder ? &*decoder : nullptr, i);
                CorpusEntry e;
                e.id = seq.source_id();
                e.file = e.id + ".mpfraw";
                e.regime = cfg.regime;
                e.label = cfg.regime == Regime::Decoder ? Verdict::AI : Verdict::Real;
                e.seed = derive_seed(cfg.seed, i);
                e.subset = cfg.subset_name();
                e.fps = cfg.fps;
                raw::write(out / e.file, cfg.shape, cfg.fps, seq.frames());
                manifest.sequences[i] = std::move(e);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cfg.count;
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, cfg.count);
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
    worker();
    for (auto& th : threads) th.join();
    if (failure) std::rethrow_exception(failure);

    std::ofstream mf(out / "manifest.json", std::ios::trunc);
    if (!mf) throw_input_error("synthgen.unwritable", "cannot write manifest in " + out.string());
    mf << manifest_to_json(manifest).dump(2) << "\n";
    if (!mf) throw_input_error("synthgen.unwritable", "failed writing manifest in " + out.string());
    return manifest;
}

nlohmann::json manifest_to_json(const CorpusManifest& m) {
    nlohmann::json j;
    j["format"] = "mpfscope-corpus";
    j["version"] = 1;
    j["config"] = m.config.to_json();
    j["config_hash"] = m.config_hash;
    auto& seqs = j["sequences"] = nlohmann::json::array();
    for (const auto& e : m.sequences) {
        nlohmann::json s;
        s["id"] = e.id;
        s["file"] = e.file;
        s["label"] = mpf::to_string(e.label);
        s["regime"] = synth::to_string(e.regime);
        s["seed"] = e.seed;
        s["subset"] = e.subset;
        s["fps"] = mpf::to_string(e.fps);
        if (e.bitrate_mbps) s["bitrate_mbps"] = *e.bitrate_mbps;
        seqs.push_back(std::move(s));
    }
    return j;
}

CorpusManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw_input_error("synthgen.missing_manifest", "cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        CorpusManifest m;
        m.directory = path.parent_path();
        if (j.contains("config")) m.config = SynthConfig::from_json(j.at("config"));
        m.config_hash = j.value("config_hash", std::string());
        for (const auto& s : j.at("sequences")) {
            CorpusEntry e;
            e.id = s.at("id").get<std::string>();
            e.file = s.value("file", e.id + ".mpfraw");
            e.regime = s.contains("regime") ? parse_regime(s.at("regime").get<std::string>()) : m.config.regime;
            e.label = s.contains("label") ? parse_verdict(s.at("label").get<std::string>())
                                          : (e.regime == Regime::Decoder ? Verdict::AI : Verdict::Real);
            e.seed = s.value("seed", std::uint64_t{0});
            e.subset = s.value("subset", m.config.subset_name());
            const auto& fps = s.contains("fps") ? s.at("fps") : nlohmann::json(mpf::to_string(m.config.fps));
            e.fps = fps.is_string() ? parse_rational(fps.get<std::string>()) : parse_rational(std::to_string(fps.get<double>()));
            if (s.contains("bitrate_mbps")) e.bitrate_mbps = s.at("bitrate_mbps").get<double>();
            m.sequences.push_back(std::move(e));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw_input_error("synthgen.bad_manifest", path.filename().string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_cutoff) {
    if (m.size() == 0) return 0;
    const Eigen::MatrixXd tall = m.rows() >= m.cols() ? m : Eigen::MatrixXd(m.transpose());
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(tall);
    const auto& sv = svd.singularValues();
    const double top = sv.size() > 0 ? sv[0] : 0.0;
    if (!(top > 0.0)) return 0;
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > rel_cutoff * top) ++rank;
    }
    return rank;
}

Eigen::MatrixXd residual_matrix(const std::vector<Eigen::VectorXd>& frames) {
    if (frames.size() < 2) return {};
    Eigen::MatrixXd r(static_cast<Eigen::Index>(frames.size() - 1), frames.front().size());
    for (std::size_t t = 0; t + 1 < frames.size(); ++t) r.row(static_cast<Eigen::Index>(t)) = (frames[t + 1] - frames[t]).transpose();
    return r;
}

std::vector<Eigen::VectorXd> to_vectors(const FrameSequence& seq) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(seq.size());
    for (const auto& f : seq.frames()) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(f.size()));
        for (std::size_t i = 0; i < f.size(); ++i) v[static_cast<Eigen::Index>(i)] = f[i];
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace mpf::synth
