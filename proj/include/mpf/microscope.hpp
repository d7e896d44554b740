#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpf/common.hpp"
#include "mpf/consistency.hpp"
#include "mpf/residual.hpp"
#include "mpf/sentinel.hpp"

namespace mpf::microscope {

/// Seven change statistics followed by mean, std and histogram entropy.
inline constexpr std::size_t kFeaturesPerResidual = 10;

struct FeatureOptions {
    double mask_threshold = residual::kDefaultMaskThreshold;
    consistency::RegionConfig regions;
};

using Descriptor = std::array<double, kFeaturesPerResidual>;

/// Shannon entropy (bits) of the 256-bin histogram of rounded map values.
double histogram_entropy(const residual::ResidualMap& map);

Descriptor describe(const residual::ResidualMap& map, const FeatureOptions& options = {});

/// Per-residual descriptors concatenated in temporal order: (L-1) * 10 values.
std::vector<double> featurize(const residual::ResidualStack& stack, const FeatureOptions& options = {});

/// Alternative featurizer: one externally computed embedding per residual, concatenated.
std::vector<double> featurize_embeddings(const sentinel::ScoreMatrix& per_residual);

/// Logistic classifier over z-scored features. Dimensions whose training
/// std is zero are inactive: they are ignored and keep weight 0.
struct ClassifierModel {
    std::vector<double> mean;
    std::vector<double> scale;
    std::vector<bool> active;
    std::vector<double> weights;
    double bias = 0.0;
    double training_loss = 0.0;
    std::size_t epochs_run = 0;

    std::size_t feature_dim() const noexcept { return weights.size(); }

    /// Zero model of a given dimension (probability 0.5 everywhere).
    static ClassifierModel zeros(std::size_t dim);

    void validate() const;
    double decision_value(std::span<const double> features) const;

    /// JSON with 17 significant digits for every real number.
    std::string to_json_text() const;
    void save(const std::filesystem::path& path) const;
    static ClassifierModel from_json_text(const std::string& text);
    static ClassifierModel load(const std::filesystem::path& path);
};

struct Classification {
    Verdict verdict = Verdict::Real;
    double probability = 0.5;
};

/// probability = sigmoid(w . z(x) + b); AI iff probability > 0.5.
Classification classify(const ClassifierModel& model, std::span<const double> features);

double sigmoid(double x);

struct LabeledExample {
    std::vector<double> features;
    Verdict label = Verdict::Real;
};

struct TrainOptions {
    std::size_t epochs = 300;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    double l2 = 1e-4;
    double tolerance = 1e-7;
};

struct TrainResult {
    ClassifierModel model;
    double final_loss = 0.0;
    std::size_t epochs_run = 0;
    /// Loss after each accepted step, starting with the initial loss.
    std::vector<double> loss_history;
};

/// Normalised design matrix (active dims only) and 0/1 targets.
struct Dataset {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Dataset normalized_dataset(std::span<const LabeledExample> examples, const ClassifierModel& normalizer);

/// Mean cross-entropy plus (l2/2)|w|^2; params = [w_active..., b].
double logistic_loss(const Dataset& data, const Eigen::VectorXd& params, double l2);
Eigen::VectorXd logistic_gradient(const Dataset& data, const Eigen::VectorXd& params, double l2);

/// Frozen per-dimension normaliser fitted on the examples (weights zeroed).
ClassifierModel fit_normalizer(std::span<const LabeledExample> examples);

/// Full-batch gradient descent; a step that raises the loss is rejected and the rate halved.
TrainResult train(std::span<const LabeledExample> examples, const TrainOptions& options = {});

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per-class seeded shuffle; round(holdout * n_class) items of each class go to `test`.
/// Both index lists are returned in ascending order.
Split stratified_split(std::span<const Verdict> labels, double holdout, std::uint64_t seed);

}  // namespace mpf::microscope
