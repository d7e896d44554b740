#include "mpf/microscope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mpf::microscope {
namespace fs = std::filesystem;

double histogram_entropy(const residual::ResidualMap& map) {
    std::array<std::size_t, 256> hist{};
    for (float v : map.values) {
        const long bin = std::lround(std::clamp(static_cast<double>(v), 0.0, 255.0));
        ++hist[static_cast<std::size_t>(bin)];
    }
    const double n = static_cast<double>(map.values.size());
    double h = 0.0;
    for (std::size_t count : hist) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / n;
        h -= p * std::log2(p);
    }
    return std::max(0.0, h);
}

Descriptor describe(const residual::ResidualMap& map, const FeatureOptions& options) {
    const auto s = consistency::change_stats(map, options.mask_threshold, options.regions);
    double mean = 0.0;
    for (float v : map.values) mean += v;
    mean /= static_cast<double>(map.values.size());
    double var = 0.0;
    for (float v : map.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(map.values.size());
    return {s.change_ratio, s.mask_density, s.centroid_x, s.centroid_y, s.ratio_border,
            s.ratio_center, s.spread,       mean,         std::sqrt(var), histogram_entropy(map)};
}

std::vector<double> featurize(const residual::ResidualStack& stack, const FeatureOptions& options) {
    std::vector<double> out;
    out.reserve(stack.maps.size() * kFeaturesPerResidual);
    for (const auto& m : stack.maps) {
        const auto d = describe(m, options);
        out.insert(out.end(), d.begin(), d.end());
    }
    return out;
}

std::vector<double> featurize_embeddings(const sentinel::ScoreMatrix& per_residual) {
    if (per_residual.kind != sentinel::ScoreKind::Embeddings) {
        throw_input_error("microscope.bad_kind", "residual features need an embeddings ScoreFile");
    }
    return {per_residual.values.begin(), per_residual.values.end()};
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

ClassifierModel ClassifierModel::zeros(std::size_t dim) {
    ClassifierModel m;
    m.mean.assign(dim, 0.0);
    m.scale.assign(dim, 1.0);
    m.active.assign(dim, true);
    m.weights.assign(dim, 0.0);
    return m;
}

void ClassifierModel::validate() const {
    const std::size_t d = weights.size();
    if (mean.size() != d || scale.size() != d || active.size() != d) {
        throw_input_error("microscope.bad_model", "model arrays have inconsistent lengths");
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (!std::isfinite(weights[i]) || !std::isfinite(mean[i]) || !std::isfinite(scale[i])) {
            throw_input_error("microscope.bad_model", "model values must be finite");
        }
        if (active[i] && !(scale[i] > 0.0)) throw_input_error("microscope.bad_model", "active dimensions need a positive scale");
    }
    if (!std::isfinite(bias)) throw_input_error("microscope.bad_model", "bias must be finite");
}

double ClassifierModel::decision_value(std::span<const double> x) const {
    if (x.size() != weights.size()) {
        throw_input_error("microscope.dimension_mismatch", "model expects " + std::to_string(weights.size()) +
                                                               " features, got " + std::to_string(x.size()));
    }
    double s = bias;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (active[i]) s += weights[i] * (x[i] - mean[i]) / scale[i];
    }
    return s;
}

Classification classify(const ClassifierModel& model, std::span<const double> features) {
    const double p = sigmoid(model.decision_value(features));
    return {p > 0.5 ? Verdict::AI : Verdict::Real, p};
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_array(std::ostream& out, const std::vector<double>& v) {
    out << "[";
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << fmt17(v[i]);
    out << "]";
}

}  // namespace

std::string ClassifierModel::to_json_text() const {
    std::ostringstream out;
    out << "{\n";
    out << "  \"format\": \"mpfscope-model\",\n";
    out << "  \"version\": 1,\n";
    out << "  \"feature_dim\": " << weights.size() << ",\n";
    out << "  \"features_per_residual\": " << kFeaturesPerResidual << ",\n";
    out << "  \"mean\": ";
    write_array(out, mean);
    out << ",\n  \"scale\": ";
    write_array(out, scale);
    out << ",\n  \"active\": [";
    for (std::size_t i = 0; i < active.size(); ++i) out << (i ? ", " : "") << (active[i] ? "true" : "false");
    out << "],\n  \"weights\": ";
    write_array(out, weights);
    out << ",\n  \"bias\": " << fmt17(bias) << ",\n";
    out << "  \"training_loss\": " << fmt17(training_loss) << ",\n";
    out << "  \"epochs_run\": " << epochs_run << "\n";
    out << "}\n";
    return out.str();
}

void ClassifierModel::save(const fs::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw_input_error("microscope.unwritable", "cannot write " + path.string());
    out << to_json_text();
}

ClassifierModel ClassifierModel::from_json_text(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        ClassifierModel m;
        m.mean = j.at("mean").get<std::vector<double>>();
        m.scale = j.at("scale").get<std::vector<double>>();
        m.active = j.at("active").get<std::vector<bool>>();
        m.weights = j.at("weights").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.training_loss = j.value("training_loss", 0.0);
        m.epochs_run = j.value("epochs_run", std::size_t{0});
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw_input_error("microscope.bad_model", std::string("cannot parse model: ") + e.what());
    }
}

ClassifierModel ClassifierModel::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw_input_error("microscope.missing_model", "cannot open model " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

ClassifierModel fit_normalizer(std::span<const LabeledExample> examples) {
    if (examples.empty()) throw_input_error("microscope.empty_corpus", "no training examples");
    const std::size_t d = examples.front().features.size();
    ClassifierModel m = ClassifierModel::zeros(d);
    for (const auto& e : examples) {
        if (e.features.size() != d) throw_input_error("microscope.dimension_mismatch", "training vectors differ in length");
    }
    const double n = static_cast<double>(examples.size());
    for (std::size_t i = 0; i < d; ++i) {
        double mu = 0.0;
        for (const auto& e : examples) mu += e.features[i];
        mu /= n;
        double var = 0.0;
        for (const auto& e : examples) var += (e.features[i] - mu) * (e.features[i] - mu);
        const double sd = std::sqrt(var / n);
        m.mean[i] = mu;
        // Relative floor so that constant columns survive rounding noise in mu.
        m.active[i] = sd > 1e-12 * std::max(1.0, std::abs(mu));
        m.scale[i] = m.active[i] ? sd : 1.0;
    }
    return m;
}

Dataset normalized_dataset(std::span<const LabeledExample> examples, const ClassifierModel& normalizer) {
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < normalizer.active.size(); ++i) {
        if (normalizer.active[i]) cols.push_back(i);
    }
    Dataset data;
    data.x.resize(static_cast<Eigen::Index>(examples.size()), static_cast<Eigen::Index>(cols.size()));
    data.y.resize(static_cast<Eigen::Index>(examples.size()));
    for (std::size_t r = 0; r < examples.size(); ++r) {
        const auto& f = examples[r].features;
        if (f.size() != normalizer.active.size()) throw_input_error("microscope.dimension_mismatch", "feature vector length mismatch");
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::size_t i = cols[c];
            data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (f[i] - normalizer.mean[i]) / normalizer.scale[i];
        }
        data.y[static_cast<Eigen::Index>(r)] = examples[r].label == Verdict::AI ? 1.0 : 0.0;
    }
    return data;
}

double logistic_loss(const Dataset& data, const Eigen::VectorXd& params, double l2) {
    const Eigen::Index d = data.x.cols();
    const Eigen::VectorXd w = params.head(d);
    const double b = params[d];
    const Eigen::VectorXd s = (data.x * w).array() + b;
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        // softplus(s) - y*s, evaluated without overflow
        const double si = s[i];
        const double softplus = si > 0.0 ? si + std::log1p(std::exp(-si)) : std::log1p(std::exp(si));
        total += softplus - data.y[i] * si;
    }
    return total / static_cast<double>(s.size()) + 0.5 * l2 * w.squaredNorm();
}

Eigen::VectorXd logistic_gradient(const Dataset& data, const Eigen::VectorXd& params, double l2) {
    const Eigen::Index d = data.x.cols();
    const Eigen::VectorXd w = params.head(d);
    const double b = params[d];
    const Eigen::VectorXd s = (data.x * w).array() + b;
    Eigen::VectorXd residual(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) residual[i] = sigmoid(s[i]) - data.y[i];
    const double n = static_cast<double>(s.size());
    Eigen::VectorXd g(d + 1);
    g.head(d) = data.x.transpose() * residual / n + l2 * w;
    g[d] = residual.sum() / n;
    return g;
}

TrainResult train(std::span<const LabeledExample> examples, const TrainOptions& options) {
    std::size_t positives = 0;
    for (const auto& e : examples) positives += e.label == Verdict::AI ? 1 : 0;
    const std::size_t negatives = examples.size() - positives;
    if (positives < 2 || negatives < 2) {
        throw_input_error("microscope.single_class", "training needs at least 2 examples per class (got " +
                                                         std::to_string(positives) + " AI, " + std::to_string(negatives) + " Real)");
    }
    if (!(options.learning_rate > 0.0)) throw_config_error("microscope.bad_lr", "learning rate must be positive");
    if (!(options.l2 >= 0.0)) throw_config_error("microscope.bad_l2", "l2 must be non-negative");

    TrainResult result;
    result.model = fit_normalizer(examples);
    const Dataset data = normalized_dataset(examples, result.model);
    const Eigen::Index d = data.x.cols();

    Rng rng(options.seed);
    Eigen::VectorXd params = Eigen::VectorXd::Zero(d + 1);
    for (Eigen::Index i = 0; i < d; ++i) params[i] = 0.01 * rng.normal();

    double lr = options.learning_rate;
    double loss = logistic_loss(data, params, options.l2);
    result.loss_history.push_back(loss);
    std::size_t epoch = 0;
    for (; epoch < options.epochs; ++epoch) {
        const Eigen::VectorXd candidate = params - lr * logistic_gradient(data, params, options.l2);
        const double candidate_loss = logistic_loss(data, candidate, options.l2);
        if (!(candidate_loss <= loss)) {
            lr *= 0.5;
            if (lr < 1e-12) break;
            continue;
        }
        const double delta = loss - candidate_loss;
        params = candidate;
        loss = candidate_loss;
        result.loss_history.push_back(loss);
        if (delta < options.tolerance) {
            ++epoch;
            break;
        }
    }

    Eigen::Index c = 0;
    for (std::size_t i = 0; i < result.model.active.size(); ++i) {
        if (result.model.active[i]) result.model.weights[i] = params[c++];
    }
    result.model.bias = params[d];
    result.model.training_loss = loss;
    result.model.epochs_run = epoch;
    result.final_loss = loss;
    result.epochs_run = epoch;
    return result;
}

Split stratified_split(std::span<const Verdict> labels, double holdout, std::uint64_t seed) {
    if (!(holdout >= 0.0 && holdout < 1.0)) throw_config_error("microscope.bad_holdout", "holdout fraction must lie in [0, 1)");
    Split split;
    Rng rng(seed);
    for (Verdict cls : {Verdict::Real, Verdict::AI}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) idx.push_back(i);
        }
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
        const auto n_test = static_cast<std::size_t>(std::llround(holdout * static_cast<double>(idx.size())));
        split.test.insert(split.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        split.train.insert(split.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

}  // namespace mpf::microscope
