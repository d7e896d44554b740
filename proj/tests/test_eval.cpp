#include <algorithm>

#include "doctest.h"
#include "mpf/eval.hpp"
#include "support.hpp"

using namespace mpf;
using namespace mpf::eval;

namespace {

std::vector<Verdict> repeat(Verdict v, std::size_t n) { return std::vector<Verdict>(n, v); }

std::vector<Verdict> cat(std::vector<Verdict> a, const std::vector<Verdict>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

double minmax(double x, double lo, double hi) { return hi > lo ? (x - lo) / (hi - lo) : 0.5; }

}  // namespace

TEST_CASE("perfect predictions") {
    const auto labels = cat(repeat(Verdict::AI, 10), repeat(Verdict::Real, 10));
    const auto m = metrics(labels, labels);
    CHECK(m.counts == Confusion{10, 0, 10, 0});
    CHECK(m.recall == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.accuracy == 1.0);
}

TEST_CASE("hand-computed confusion counts") {
    // 10 AI (8 caught), 10 real (1 false alarm).
    const auto labels = cat(repeat(Verdict::AI, 10), repeat(Verdict::Real, 10));
    auto preds = cat(cat(repeat(Verdict::AI, 8), repeat(Verdict::Real, 2)), cat(repeat(Verdict::AI, 1), repeat(Verdict::Real, 9)));
    const auto m = metrics(labels, preds);
    CHECK(m.counts == Confusion{8, 1, 9, 2});
    CHECK(m.recall == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    CHECK(std::abs(m.f1 - 0.842105263157894) < 1e-9);
    CHECK(m.accuracy == doctest::Approx(17.0 / 20.0));
}

TEST_CASE("no positive predictions gives zero precision and f1") {
    const auto labels = cat(repeat(Verdict::AI, 4), repeat(Verdict::Real, 4));
    const auto m = metrics(labels, repeat(Verdict::Real, 8));
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);
    CHECK(m.accuracy == 0.5);
    const auto empty = metrics(Confusion{});
    CHECK(empty.accuracy == 0.0);
    CHECK_THROWS_AS(confusion(labels, repeat(Verdict::AI, 3)), Error);
}

TEST_CASE("metrics ignore pair order and confusions add up") {
    testsupport::Gen gen(1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = std::size_t(gen.integer(1, 40));
        std::vector<std::pair<Verdict, Verdict>> pairs;
        for (std::size_t i = 0; i < n; ++i) {
            pairs.emplace_back(gen.integer(0, 1) ? Verdict::AI : Verdict::Real, gen.integer(0, 1) ? Verdict::AI : Verdict::Real);
        }
        auto split = [](const std::vector<std::pair<Verdict, Verdict>>& p) {
            std::vector<Verdict> l, q;
            for (auto [a, b] : p) {
                l.push_back(a);
                q.push_back(b);
            }
            return std::pair{l, q};
        };
        const auto [l, q] = split(pairs);
        const auto base = confusion(l, q);
        CHECK(base.total() == n);
        auto shuffled = pairs;
        std::reverse(shuffled.begin(), shuffled.end());
        std::rotate(shuffled.begin(), shuffled.begin() + long(n / 3), shuffled.end());
        const auto [l2, q2] = split(shuffled);
        CHECK(confusion(l2, q2) == base);

        const std::size_t cut = std::size_t(gen.integer(0, int(n)));
        Confusion merged = confusion(std::span(l).first(cut), std::span(q).first(cut));
        merged += confusion(std::span(l).subspan(cut), std::span(q).subspan(cut));
        CHECK(merged == base);
        const auto m = metrics(base);
        for (double v : {m.recall, m.precision, m.f1, m.accuracy}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("best and worst subsets map to composite one and zero") {
    const std::vector<QualityInput> in{{"sora", 30, 10.86, 1430178}, {"show1", 8, 0.38, 184320}};
    const auto q = quality_profile(in);
    CHECK(q[0].composite == 1.0);
    CHECK(q[1].composite == 0.0);
    CHECK(q[0].subset == "sora");
}

TEST_CASE("identical subsets sit in the middle") {
    const std::vector<QualityInput> in{{"a", 24, 2, 4096}, {"b", 24, 2, 4096}, {"c", 24, 2, 4096}};
    for (const auto& p : quality_profile(in)) CHECK(p.composite == 0.5);
    const std::vector<QualityInput> bad{{"a", 0, 2, 4096}};
    CHECK_THROWS_AS(quality_profile(bad), Error);
}

TEST_CASE("composite matches an equal-weight min-max oracle") {
    const std::vector<QualityInput> in{{"a", 8, 0.38, 184320}, {"b", 16, 5.0, 409920}, {"c", 30, 10.86, 1430178}};
    const auto q = quality_profile(in);
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double want = (minmax(in[i].fps, 8, 30) + minmax(in[i].bitrate_mbps, 0.38, 10.86) +
                             minmax(in[i].resolution_n, 184320, 1430178)) /
                            3.0;
        CHECK(q[i].composite == doctest::Approx(want).epsilon(1e-12));
    }
    // b by hand: fps 8/22, bitrate 4.62/10.48, resolution 225600/1245858.
    CHECK(q[1].composite == doctest::Approx((8.0 / 22 + 4.62 / 10.48 + 225600.0 / 1245858) / 3).epsilon(1e-12));
}

TEST_CASE("raising one attribute never lowers that subset's composite") {
    testsupport::Gen gen(2);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<QualityInput> in;
        const int n = gen.integer(2, 6);
        for (int i = 0; i < n; ++i) in.push_back({"s" + std::to_string(i), gen.real(1, 60), gen.real(0.1, 20), gen.real(1e3, 1e7)});
        const auto before = quality_profile(in);
        const std::size_t k = std::size_t(gen.integer(0, n - 1));
        switch (gen.integer(0, 2)) {
            case 0: in[k].fps *= gen.real(1, 3); break;
            case 1: in[k].bitrate_mbps *= gen.real(1, 3); break;
            default: in[k].resolution_n *= gen.real(1, 3); break;
        }
        const auto after = quality_profile(in);
        CHECK(after[k].composite >= before[k].composite - 1e-12);
        for (const auto& p : after) {
            CHECK(p.composite >= 0.0);
            CHECK(p.composite <= 1.0);
        }
    }
}

TEST_CASE("bitrate proxy") {
    CHECK(bitrate_proxy(64 * 64 * 3, 8) == doctest::Approx(0.786432));
}

TEST_CASE("Mann-Whitney U equals pair counting") {
    testsupport::Gen gen(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(std::size_t(gen.integer(1, 30))), b(std::size_t(gen.integer(1, 30)));
        // Coarse values so ties are common.
        for (auto& v : a) v = gen.integer(0, 10);
        for (auto& v : b) v = gen.integer(0, 10) + gen.integer(0, 2);
        const auto r = mann_whitney_u(a, b);
        CHECK(r.u == doctest::Approx(testsupport::u_by_pairs(a, b)).epsilon(1e-12));
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);
    }
}

TEST_CASE("Mann-Whitney separates shifted samples") {
    std::vector<double> lo, hi;
    for (int i = 0; i < 50; ++i) {
        lo.push_back(i * 0.01);
        hi.push_back(1.0 + i * 0.01);
    }
    const auto r = mann_whitney_u(hi, lo);
    CHECK(r.u == 2500.0);
    CHECK(r.z > 0.0);
    CHECK(r.p_value < 1e-10);
    const auto same = mann_whitney_u(std::vector<double>(5, 1.0), std::vector<double>(5, 1.0));
    CHECK(same.p_value == 1.0);
    CHECK_THROWS_AS(mann_whitney_u(std::vector<double>{}, lo), Error);
}

TEST_CASE("evaluation splits stage-1 and stage-2 work") {
    const std::vector<TruthRecord> truth{
        {"a", Verdict::AI, "x"}, {"b", Verdict::AI, "x"}, {"c", Verdict::Real, "x"}, {"d", Verdict::Real, "y"}, {"e", Verdict::AI, "y"}};
    const std::vector<PredictionRecord> preds{
        {"e", Verdict::Real, false, Verdict::Real},
        {"a", Verdict::AI, true, std::nullopt},
        {"b", Verdict::AI, false, Verdict::AI},
        {"c", Verdict::Real, false, Verdict::Real},
        {"d", Verdict::Real, false, Verdict::Real},
    };
    const std::vector<QualityProfile> q{{"x", 30, 10, 1e6, 1.0}};
    const auto r = evaluate(truth, preds, q);
    CHECK(r.overall.counts == Confusion{2, 0, 2, 1});
    CHECK(r.intercepted == 1);
    CHECK(r.remaining == 4);
    CHECK(r.stage1_interception_rate == doctest::Approx(0.2));
    CHECK(r.stage2_accuracy == doctest::Approx(0.75));
    REQUIRE(r.subsets.size() == 2);
    CHECK(r.subsets[0].subset == "x");
    CHECK(r.subsets[0].stage2_accuracy == 1.0);
    CHECK(r.subsets[0].quality.has_value());
    CHECK(r.subsets[1].stage2_accuracy == 0.5);
    CHECK_FALSE(r.subsets[1].quality.has_value());

    const auto csv = correlation_csv(r);
    CHECK(csv == "subset,composite,stage2_accuracy,remaining\nx,1,1,2\ny,,0.5,2\n");
    const auto j = to_json(r);
    CHECK(j["overall"]["tp"] == 2);
    CHECK(j["subsets"][1]["quality"].is_null());
}

TEST_CASE("evaluation rejects missing or duplicate predictions") {
    const std::vector<TruthRecord> truth{{"a", Verdict::AI, "x"}};
    const std::vector<PredictionRecord> none{};
    CHECK_THROWS_AS(evaluate(truth, none), Error);
    const std::vector<PredictionRecord> twice{{"a", Verdict::AI, true, std::nullopt}, {"a", Verdict::AI, true, std::nullopt}};
    CHECK_THROWS_AS(evaluate(truth, twice), Error);
}

TEST_CASE("quality inputs average corpus manifests per subset") {
    synth::CorpusManifest m;
    m.config.shape = {64, 64, 3};
    synth::CorpusEntry e1;
    e1.subset = "s";
    e1.fps = Rational{8, 1};
    synth::CorpusEntry e2 = e1;
    e2.bitrate_mbps = 2.0;
    m.sequences = {e1, e2};
    const std::vector<synth::CorpusManifest> ms{m};
    const auto in = quality_inputs(ms);
    REQUIRE(in.size() == 1);
    CHECK(in[0].fps == 8.0);
    CHECK(in[0].resolution_n == 4096.0);
    CHECK(in[0].bitrate_mbps == doctest::Approx((bitrate_proxy(64 * 64 * 3, 8) + 2.0) / 2));
}
