#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "mpf/common.hpp"

namespace mpf::synth {

enum class Regime { Decoder, Physics };
enum class Nonlinearity { None, TanhHidden };
enum class BaseScene { RandomTexture, Gradient, Checkerboard };

std::string_view to_string(Regime r);
std::string_view to_string(Nonlinearity n);
std::string_view to_string(BaseScene s);
Regime parse_regime(std::string_view text);
Nonlinearity parse_nonlinearity(std::string_view text);
BaseScene parse_base_scene(std::string_view text);

/// Frozen decoder I = W h + b with h = z (linear) or h = tanh(A z + a).
/// W is N x M with N = H*W*C and M < N.
struct DecoderModel {
    Shape shape;
    std::size_t latent_dim = 16;
    Nonlinearity nonlinearity = Nonlinearity::None;
    Eigen::MatrixXd weights;         // N x M
    Eigen::VectorXd bias;            // N
    Eigen::MatrixXd hidden_weights;  // M x M, tanh only
    Eigen::VectorXd hidden_bias;     // M, tanh only

    static DecoderModel random(const Shape& shape, std::size_t latent_dim, Nonlinearity nonlinearity, std::uint64_t seed);

    void validate() const;
    Eigen::VectorXd decode(const Eigen::VectorXd& z) const;
};

/// Smooth latent walk: every step has norm drift * sqrt(M) and its direction
/// rotates slowly (`persistence` is the correlation between successive directions).
struct LatentTrajectory {
    Eigen::VectorXd z0;  // empty: drawn from N(0, I) using `seed`
    double drift = 0.05;
    std::size_t steps = 8;
    std::uint64_t seed = 0;
    double persistence = 0.8;
};

std::vector<Eigen::VectorXd> latent_path(std::size_t latent_dim, const LatentTrajectory& traj);

/// Decoder outputs along the path, before rescaling and quantisation.
std::vector<Eigen::VectorXd> decode_path(const DecoderModel& model, const LatentTrajectory& traj);

/// Quantised frames; the affine rescale is fixed from frame 0 for the whole sequence.
FrameSequence generate_decoder_sequence(const DecoderModel& model, const LatentTrajectory& traj, const Shape& shape,
                                        Rational fps = {8, 1}, std::string source_id = {});

struct PhysicsModel {
    int jitter_px = 1;
    double shot_noise_sigma = 0.5;
    double motion_prob = 0.5;
    std::size_t object_size = 8;
    std::uint64_t seed = 0;

    void validate() const;
};

std::vector<double> base_scene(BaseScene scene, const Shape& shape, std::uint64_t seed);

/// Frame 0 is the unshifted scene; later frames are integer wrap-shifts of it.
/// Every frame gets fresh Gaussian noise and, with probability motion_prob, a
/// square that moves at constant velocity.
FrameSequence generate_physics_sequence(const PhysicsModel& model, const Shape& shape, std::size_t length,
                                        BaseScene scene = BaseScene::RandomTexture, Rational fps = {8, 1},
                                        std::string source_id = {});

struct SynthConfig {
    Regime regime = Regime::Decoder;
    Shape shape{64, 64, 3};
    std::size_t length = 8;
    std::size_t count = 200;
    std::uint64_t seed = 42;
    Rational fps{8, 1};
    std::string subset;  // defaults to the regime name
    // decoder regime
    std::size_t latent_dim = 16;
    double drift = 0.05;
    Nonlinearity nonlinearity = Nonlinearity::None;
    // physics regime
    PhysicsModel physics;
    BaseScene base_scene = BaseScene::RandomTexture;

    void validate() const;
    nlohmann::json to_json() const;
    static SynthConfig from_json(const nlohmann::json& j);
    std::string subset_name() const;
};

struct CorpusEntry {
    std::string id;
    std::string file;  // relative to the manifest directory
    Verdict label = Verdict::AI;
    Regime regime = Regime::Decoder;
    std::uint64_t seed = 0;
    std::string subset;
    Rational fps{8, 1};
    std::optional<double> bitrate_mbps;
};

struct CorpusManifest {
    std::filesystem::path directory;
    SynthConfig config;
    std::string config_hash;
    std::vector<CorpusEntry> sequences;

    std::filesystem::path path_of(const CorpusEntry& e) const { return directory / e.file; }
};

/// Sequence i for a given config.
FrameSequence generate_sequence(const SynthConfig& cfg, std::size_t index);

/// Writes `count` .mpfraw files and manifest.json into `out`. Output bytes depend only on cfg.
CorpusManifest generate_corpus(const SynthConfig& cfg, const std::filesystem::path& out, std::size_t jobs = 1);

nlohmann::json manifest_to_json(const CorpusManifest& m);
/// Reads a manifest written by generate_corpus (or a hand-written one with the same schema).
CorpusManifest read_manifest(const std::filesystem::path& path);

/// Rank of a matrix counting singular values above rel_cutoff * sigma_max.
std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_cutoff = 1e-6);

/// Stacks consecutive differences of `frames` as rows of an (L-1) x N matrix.
Eigen::MatrixXd residual_matrix(const std::vector<Eigen::VectorXd>& frames);

std::vector<Eigen::VectorXd> to_vectors(const FrameSequence& seq);

}  // namespace mpf::synth
