#include "doctest.h"
#include "json.hpp"
#include "mpf/microscope.hpp"
#include "mpf/synthgen.hpp"
#include "support.hpp"

using namespace mpf;
using namespace mpf::microscope;
using residual::ResidualMap;

namespace {

std::vector<LabeledExample> gaussian_blobs(testsupport::Gen& gen, std::size_t per_class, std::size_t dim, double sep) {
    std::vector<LabeledExample> out;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        LabeledExample e;
        e.label = i % 2 ? Verdict::AI : Verdict::Real;
        for (std::size_t d = 0; d < dim; ++d) e.features.push_back(gen.gaussian() + (e.label == Verdict::AI && d == 0 ? sep : 0.0));
        out.push_back(std::move(e));
    }
    return out;
}

double accuracy(const ClassifierModel& m, const std::vector<LabeledExample>& data) {
    std::size_t ok = 0;
    for (const auto& e : data) ok += classify(m, e.features).verdict == e.label;
    return double(ok) / double(data.size());
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("zero stack features take the documented defaults") {
    residual::ResidualStack st;
    st.maps.assign(7, ResidualMap(8, 8, 3));
    const auto f = featurize(st);
    REQUIRE(f.size() == 70);
    for (std::size_t r = 0; r < 7; ++r) {
        const double* d = &f[r * 10];
        CHECK(d[0] == 0.0);
        CHECK(d[1] == 0.0);
        CHECK(d[2] == 0.5);
        CHECK(d[3] == 0.5);
        CHECK(d[7] == 0.0);
        CHECK(d[8] == 0.0);
        CHECK(d[9] == 0.0);
    }
}

TEST_CASE("uniform maps have zero spread of values") {
    ResidualMap m(6, 6, 3);
    std::fill(m.values.begin(), m.values.end(), 42.0f);
    const auto d = describe(m);
    CHECK(d[7] == doctest::Approx(42.0));
    CHECK(d[8] == 0.0);
    CHECK(d[9] == 0.0);
}

TEST_CASE("entropy matches an independent histogram and stays within eight bits") {
    testsupport::Gen gen(3);
    for (int trial = 0; trial < 100; ++trial) {
        ResidualMap m(std::size_t(gen.integer(1, 30)), std::size_t(gen.integer(1, 30)), 3);
        for (auto& v : m.values) v = float(gen.real(0, 255));
        const double h = histogram_entropy(m);
        CHECK(h == doctest::Approx(testsupport::histogram_entropy_oracle(m.values)).epsilon(1e-10));
        CHECK(h >= 0.0);
        CHECK(h <= 8.0);
    }
    // Two equally likely bins carry one bit.
    ResidualMap two(1, 2, 1);
    two.values = {0.0f, 200.0f};
    CHECK(histogram_entropy(two) == doctest::Approx(1.0));
}

TEST_CASE("features follow temporal order") {
    testsupport::Gen gen(4);
    residual::ResidualStack st;
    for (int i = 0; i < 3; ++i) {
        ResidualMap m(5, 5, 1);
        for (auto& v : m.values) v = float(gen.real(0, 255));
        st.maps.push_back(m);
    }
    const auto f = featurize(st);
    REQUIRE(f.size() == 30);
    for (std::size_t r = 0; r < 3; ++r) {
        const auto d = describe(st.maps[r]);
        for (std::size_t k = 0; k < 10; ++k) CHECK(f[r * 10 + k] == d[k]);
    }
    auto reversed = st;
    std::reverse(reversed.maps.begin(), reversed.maps.end());
    CHECK(featurize(reversed) != f);
}

TEST_CASE("embedding featurizer concatenates rows") {
    sentinel::ScoreMatrix m;
    m.num_frames = 2;
    m.dim = 3;
    m.kind = sentinel::ScoreKind::Embeddings;
    m.values = {1, 2, 3, 4, 5, 6};
    CHECK(featurize_embeddings(m) == std::vector<double>{1, 2, 3, 4, 5, 6});
    m.kind = sentinel::ScoreKind::Logits;
    CHECK_THROWS_AS(featurize_embeddings(m), Error);
}

TEST_CASE("classification tie and saturation rules") {
    auto m = ClassifierModel::zeros(5);
    const std::vector<double> x{1, 2, 3, 4, 5};
    const auto c = classify(m, x);
    CHECK(c.probability == 0.5);
    CHECK(c.verdict == Verdict::Real);
    m.bias = 10.0;
    const auto s = classify(m, x);
    CHECK(s.probability > 0.9999);
    CHECK(s.verdict == Verdict::AI);
    CHECK_THROWS_AS(classify(m, std::vector<double>{1, 2}), Error);
}

TEST_CASE("separable toy set is learned within 200 epochs") {
    std::vector<LabeledExample> data;
    for (int i = 0; i < 10; ++i) {
        data.push_back({{1.0, 0.1 * i}, Verdict::AI});
        data.push_back({{-1.0, 0.1 * i}, Verdict::Real});
    }
    TrainOptions o;
    o.epochs = 200;
    const auto r = train(data, o);
    CHECK(r.epochs_run <= 200);
    CHECK(accuracy(r.model, data) == 1.0);
}

TEST_CASE("analytic gradient agrees with central differences") {
    testsupport::Gen gen(7);
    const auto examples = gaussian_blobs(gen, 15, 6, 1.5);
    const auto norm = fit_normalizer(examples);
    const auto data = normalized_dataset(examples, norm);
    for (int point = 0; point < 10; ++point) {
        Eigen::VectorXd p(data.x.cols() + 1);
        for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = gen.real(-2, 2);
        const double l2 = point % 2 ? 1e-4 : 0.3;
        const auto analytic = to_std(logistic_gradient(data, p, l2));
        const auto numeric = testsupport::fd_gradient(
            [&](const std::vector<double>& q) { return logistic_loss(data, Eigen::Map<const Eigen::VectorXd>(q.data(), Eigen::Index(q.size())), l2); },
            to_std(p));
        double diff = 0, scale = 0;
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
            scale += numeric[i] * numeric[i];
        }
        CHECK(std::sqrt(diff) / std::sqrt(scale) < 1e-5);
    }
}

TEST_CASE("accepted steps never increase the loss") {
    testsupport::Gen gen(8);
    for (double lr : {0.1, 5.0, 50.0}) {
        const auto data = gaussian_blobs(gen, 20, 4, 1.0);
        TrainOptions o;
        o.learning_rate = lr;
        const auto r = train(data, o);
        for (std::size_t i = 1; i < r.loss_history.size(); ++i) CHECK(r.loss_history[i] <= r.loss_history[i - 1]);
        CHECK(r.final_loss == r.loss_history.back());
        CHECK(r.model.training_loss == r.final_loss);
    }
}

TEST_CASE("training is deterministic in its seed") {
    testsupport::Gen gen(9);
    const auto data = gaussian_blobs(gen, 20, 4, 1.0);
    TrainOptions o;
    o.seed = 5;
    CHECK(train(data, o).model.to_json_text() == train(data, o).model.to_json_text());
    TrainOptions other = o;
    other.seed = 6;
    other.epochs = 3;
    o.epochs = 3;
    CHECK(train(data, o).model.to_json_text() != train(data, other).model.to_json_text());
}

TEST_CASE("affine rescaling of a feature leaves verdicts unchanged") {
    testsupport::Gen gen(10);
    const auto data = gaussian_blobs(gen, 30, 5, 1.0);
    const auto probe = gaussian_blobs(gen, 30, 5, 1.0);
    const auto base = train(data, {}).model;
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t dim = std::size_t(gen.integer(0, 4));
        const double a = gen.real(0.5, 100.0) * (gen.integer(0, 1) ? 1 : -1), b = gen.real(-50, 50);
        auto scaled = data;
        for (auto& e : scaled) e.features[dim] = a * e.features[dim] + b;
        const auto model = train(scaled, {}).model;
        for (auto e : probe) {
            const auto v0 = classify(base, e.features).verdict;
            e.features[dim] = a * e.features[dim] + b;
            CHECK(classify(model, e.features).verdict == v0);
        }
    }
}

TEST_CASE("constant dimensions are dropped and recorded") {
    testsupport::Gen gen(11);
    auto data = gaussian_blobs(gen, 10, 3, 2.0);
    for (auto& e : data) e.features[1] = 7.0;
    const auto r = train(data, {});
    CHECK(r.model.active == std::vector<bool>{true, false, true});
    CHECK(r.model.weights[1] == 0.0);
    const auto text = r.model.to_json_text();
    CHECK(text.find("\"active\": [true, false, true]") != std::string::npos);
    // Anything in the dropped dimension is ignored.
    auto x = data[0].features;
    const double p = classify(r.model, x).probability;
    x[1] = 1e6;
    CHECK(classify(r.model, x).probability == p);
}

TEST_CASE("training needs two examples of each class") {
    std::vector<LabeledExample> one{{{1.0}, Verdict::AI}, {{2.0}, Verdict::AI}, {{3.0}, Verdict::Real}};
    try {
        train(one, {});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == "microscope.single_class");
    }
}

TEST_CASE("model file round-trips with full precision") {
    testsupport::TempDir d("model");
    testsupport::Gen gen(12);
    const auto r = train(gaussian_blobs(gen, 10, 4, 1.0), {});
    r.model.save(d / "m.json");
    const auto back = ClassifierModel::load(d / "m.json");
    CHECK(back.weights == r.model.weights);
    CHECK(back.mean == r.model.mean);
    CHECK(back.scale == r.model.scale);
    CHECK(back.bias == r.model.bias);
    CHECK(back.to_json_text() == r.model.to_json_text());
    std::ofstream(d / "bad.json") << R"({"mean": [0], "scale": [1], "active": [true], "weights": [0, 1], "bias": 0})";
    CHECK_THROWS_AS(ClassifierModel::load(d / "bad.json"), Error);
    CHECK_THROWS_AS(ClassifierModel::load(d / "missing.json"), Error);
}

TEST_CASE("trained model flags a fresh decoder sequence and its probability can be recomputed") {
    testsupport::TempDir d("fresh");
    synth::SynthConfig dec;
    dec.count = 40;
    dec.seed = 101;
    synth::SynthConfig phy = dec;
    phy.regime = synth::Regime::Physics;
    std::vector<LabeledExample> data;
    for (const auto* cfg : {&dec, &phy}) {
        for (std::size_t i = 0; i < cfg->count; ++i) {
            const auto seq = synth::generate_sequence(*cfg, i);
            data.push_back({featurize(residual::residual_normalized(seq)), cfg == &dec ? Verdict::AI : Verdict::Real});
        }
    }
    train(data, {}).model.save(d / "m.json");

    dec.seed = 999;  // unseen decoder and trajectory
    const auto x = featurize(residual::residual_normalized(synth::generate_sequence(dec, 0)));
    const auto model = ClassifierModel::load(d / "m.json");
    const auto c = classify(model, x);
    CHECK(c.verdict == Verdict::AI);

    std::ifstream in(d / "m.json");
    const auto j = nlohmann::json::parse(in);
    double s = j["bias"].get<double>();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (j["active"][i].get<bool>()) s += j["weights"][i].get<double>() * (x[i] - j["mean"][i].get<double>()) / j["scale"][i].get<double>();
    }
    CHECK(c.probability == doctest::Approx(testsupport::sigmoid_oracle(s)).epsilon(1e-12));
}

TEST_CASE("stratified split keeps class proportions and is seeded") {
    std::vector<Verdict> labels;
    for (int i = 0; i < 200; ++i) labels.push_back(i < 120 ? Verdict::AI : Verdict::Real);
    const auto s = stratified_split(labels, 0.2, 3);
    CHECK(s.test.size() == 40);
    CHECK(s.train.size() == 160);
    std::size_t ai = 0;
    for (auto i : s.test) ai += labels[i] == Verdict::AI;
    CHECK(ai == 24);
    CHECK(stratified_split(labels, 0.2, 3).test == s.test);
    CHECK(stratified_split(labels, 0.2, 4).test != s.test);
    CHECK_THROWS_AS(stratified_split(labels, 1.0, 3), Error);
}
