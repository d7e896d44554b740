#include <bit>
#include <cstring>

#include "doctest.h"
#include "mpf/sentinel.hpp"
#include "support.hpp"

using namespace mpf;
using namespace mpf::sentinel;

namespace {

// Independent encoder for the score layout.
std::vector<std::uint8_t> hand_scores(std::uint32_t n, std::uint32_t dim, std::uint8_t kind, const std::vector<float>& v) {
    std::vector<std::uint8_t> b{'M', 'P', 'F', 'S', 1, 0};
    for (std::uint32_t x : {n, dim}) {
        for (int i = 0; i < 4; ++i) b.push_back(std::uint8_t(x >> (8 * i)));
    }
    b.push_back(kind);
    for (float f : v) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        for (int i = 0; i < 4; ++i) b.push_back(std::uint8_t(bits >> (8 * i)));
    }
    return b;
}

FrameSequence blank(std::size_t n, std::size_t start = 0, std::size_t total = 0) {
    return FrameSequence({2, 2, 1}, std::vector<Frame>(n, Frame(4, 0)), {8, 1}, "v", start, total);
}

}  // namespace

TEST_CASE("logit score file parses to one score per frame") {
    const std::vector<float> v{0.5f, -1.0f, 2.25f, 0.0f, 1.0f, 3.0f, -0.5f, 0.125f};
    const auto s = decode_scores(hand_scores(8, 1, 0, v));
    CHECK(s.num_frames == 8);
    CHECK(s.dim == 1);
    CHECK(s.kind == ScoreKind::Logits);
    CHECK(s.values == v);
    const auto logits = to_logits(s);
    REQUIRE(logits.size() == 8);
    double sum = 0;
    for (float f : v) sum += f;
    CHECK(aggregate_mean(logits) == doctest::Approx(sum / 8.0).epsilon(1e-15));
}

TEST_CASE("encoder output equals the hand-built layout") {
    testsupport::Gen gen(1);
    ScoreMatrix s;
    s.num_frames = 5;
    s.dim = 3;
    s.kind = ScoreKind::Embeddings;
    for (int i = 0; i < 15; ++i) s.values.push_back(float(gen.real(-10, 10)));
    CHECK(encode_scores(s) == hand_scores(5, 3, 1, s.values));
    CHECK(kScoreHeaderSize == 15);
}

TEST_CASE("round trip through disk is bit exact") {
    testsupport::TempDir d("scores");
    testsupport::Gen gen(2);
    for (int trial = 0; trial < 50; ++trial) {
        ScoreMatrix s;
        s.num_frames = std::uint32_t(gen.integer(0, 20));
        s.dim = std::uint32_t(gen.integer(1, 9));
        s.kind = gen.integer(0, 1) ? ScoreKind::Embeddings : ScoreKind::Logits;
        for (std::size_t i = 0; i < s.num_frames * s.dim; ++i) {
            const auto bits = std::uint32_t(gen.integer(0, 0x7f7fffff)) | (gen.integer(0, 1) ? 0x80000000u : 0u);
            s.values.push_back(std::bit_cast<float>(bits));
        }
        write_scores(d / "s.mpfs", s);
        const auto back = load_scores(d / "s.mpfs");
        CHECK(back.num_frames == s.num_frames);
        CHECK(back.dim == s.dim);
        CHECK(back.kind == s.kind);
        REQUIRE(back.values.size() == s.values.size());
        for (std::size_t i = 0; i < s.values.size(); ++i) CHECK(std::bit_cast<std::uint32_t>(back.values[i]) == std::bit_cast<std::uint32_t>(s.values[i]));
    }
}

TEST_CASE("malformed score files are rejected with specific codes") {
    auto good = hand_scores(4, 1, 0, {1, 2, 3, 4});
    auto expect_code = [](std::vector<std::uint8_t> bytes, const std::string& code) {
        try {
            decode_scores(bytes);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == code);
            return std::string(e.what());
        }
        return std::string();
    };
    auto trunc = good;
    trunc.resize(trunc.size() - 3);
    const auto msg = expect_code(trunc, "sentinel.size_mismatch");
    CHECK(msg.find("16") != std::string::npos);
    CHECK(msg.find("13") != std::string::npos);
    auto magic = good;
    magic[3] = 'X';
    expect_code(magic, "sentinel.bad_magic");
    auto version = good;
    version[4] = 2;
    expect_code(version, "sentinel.bad_version");
    auto kind = good;
    kind[14] = 7;
    expect_code(kind, "sentinel.bad_kind");
    expect_code(hand_scores(2, 1, 0, {1.0f, std::numeric_limits<float>::infinity()}), "sentinel.non_finite");
    expect_code(hand_scores(2, 1, 0, {std::numeric_limits<float>::quiet_NaN(), 1.0f}), "sentinel.non_finite");
    expect_code({'M', 'P'}, "sentinel.size_mismatch");
}

TEST_CASE("embeddings need a head and logits need dim one") {
    const auto emb = decode_scores(hand_scores(1, 4, 1, {0.3f, 9, 9, 9}));
    CHECK_THROWS_AS(to_logits(emb), Error);
    LinearHead head{{1, 0, 0, 0}, 0.0};
    const auto l = to_logits(emb, &head);
    REQUIRE(l.size() == 1);
    CHECK(l[0] == doctest::Approx(0.3).epsilon(1e-7));
    LinearHead wrong{{1, 0, 0}, 0.0};
    CHECK_THROWS_AS(to_logits(emb, &wrong), Error);
    CHECK_THROWS_AS(to_logits(decode_scores(hand_scores(1, 2, 0, {1, 2}))), Error);
}

TEST_CASE("head file loads and projects") {
    testsupport::TempDir d("head");
    std::ofstream(d / "h.json") << R"({"weights": [0.5, -2, 1], "bias": 0.25})";
    const auto h = LinearHead::load(d / "h.json");
    const std::vector<float> e{2, 1, 3};
    CHECK(h.apply(e) == doctest::Approx(0.5 * 2 - 2 * 1 + 3 + 0.25));
    std::ofstream(d / "bad.json") << R"({"bias": 1})";
    CHECK_THROWS_AS(LinearHead::load(d / "bad.json"), Error);
}

TEST_CASE("mean aggregation") {
    CHECK(aggregate_mean(std::vector<double>{0.2, 0.4, 0.6}) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(aggregate_mean(std::vector<double>{1.3}) == 1.3);
    CHECK_THROWS_AS(aggregate_mean(std::vector<double>{}), Error);
    MeanLogits agg;
    CHECK(agg.aggregate(std::vector<double>{1, 2}) == 1.5);
}

TEST_CASE("gate uses a strict threshold") {
    CHECK(gate(0.7, 0.5).verdict == GateVerdict::OffManifold);
    CHECK(gate(0.5, 0.5).verdict == GateVerdict::OnManifold);
    CHECK(gate(-2.0, 0.0).verdict == GateVerdict::OnManifold);
    CHECK(gate(std::nextafter(0.0, 1.0), 0.0).verdict == GateVerdict::OffManifold);
    CHECK(to_string(GateVerdict::OffManifold) == "OffManifold");
}

TEST_CASE("raising one logit never turns off-manifold into on-manifold") {
    testsupport::Gen gen(9);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> l(std::size_t(gen.integer(1, 12)));
        for (auto& v : l) v = gen.real(-3, 3);
        const double tau = gen.real(-1, 1);
        const auto before = gate(aggregate_mean(l), tau).verdict;
        l[std::size_t(gen.integer(0, int(l.size()) - 1))] += gen.real(0, 5);
        const auto after = gate(aggregate_mean(l), tau).verdict;
        if (before == GateVerdict::OffManifold) CHECK(after == GateVerdict::OffManifold);
    }
}

TEST_CASE("shifting logits and tau together keeps the verdict") {
    testsupport::Gen gen(10);
    for (int trial = 0; trial < 500; ++trial) {
        // Dyadic values keep the shifted mean exact.
        std::vector<double> l(8);
        for (auto& v : l) v = gen.integer(-64, 64) / 16.0;
        const double tau = gen.integer(-16, 16) / 16.0;
        const double c = gen.integer(-64, 64) / 8.0;
        auto shifted = l;
        for (auto& v : shifted) v += c;
        CHECK(gate(aggregate_mean(l), tau).verdict == gate(aggregate_mean(shifted), tau + c).verdict);
    }
}

TEST_CASE("null scorer routes everything onward") {
    NullScorer s;
    const auto l = s.score(blank(8));
    CHECK(l.size() == 8);
    CHECK(gate(aggregate_mean(l), 0.0).verdict == GateVerdict::OnManifold);
    CHECK(gate(aggregate_mean(l), -1e6).verdict == GateVerdict::OnManifold);
}

TEST_CASE("score file scorer windows by start index") {
    ScoreMatrix m;
    m.num_frames = 12;
    for (int i = 0; i < 12; ++i) m.values.push_back(float(i));
    ScoreFileScorer s(m);
    const auto seg = s.score(blank(4, 3, 12));
    CHECK(seg == std::vector<double>{3, 4, 5, 6});
    CHECK(s.score(blank(12)).size() == 12);
    CHECK_THROWS_AS(s.score(blank(4, 10, 20)), Error);
}
