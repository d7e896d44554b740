#include "mpf/sentinel.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "json.hpp"

namespace mpf::sentinel {
namespace fs = std::filesystem;

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t pos) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(bytes[pos + i]) << (8 * i));
    return value;
}

}  // namespace

std::vector<std::uint8_t> encode_scores(const ScoreMatrix& s) {
    if (s.values.size() != static_cast<std::size_t>(s.num_frames) * s.dim) {
        throw_input_error("sentinel.size_mismatch", "payload has " + std::to_string(s.values.size()) + " values, header implies " +
                                                        std::to_string(static_cast<std::size_t>(s.num_frames) * s.dim));
    }
    std::vector<std::uint8_t> out{'M', 'P', 'F', 'S'};
    out.reserve(kScoreHeaderSize + s.values.size() * 4);
    put_le<std::uint16_t>(out, kScoreVersion);
    put_le<std::uint32_t>(out, s.num_frames);
    put_le<std::uint32_t>(out, s.dim);
    out.push_back(static_cast<std::uint8_t>(s.kind));
    for (float v : s.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

ScoreMatrix decode_scores(std::span<const std::uint8_t> bytes, const std::string& name) {
    if (bytes.size() < kScoreHeaderSize) {
        throw_input_error("sentinel.size_mismatch", name + ": header needs " + std::to_string(kScoreHeaderSize) +
                                                        " bytes, got " + std::to_string(bytes.size()));
    }
    if (std::memcmp(bytes.data(), "MPFS", 4) != 0) throw_input_error("sentinel.bad_magic", name + ": not a ScoreFile");
    const auto version = get_le<std::uint16_t>(bytes, 4);
    if (version != kScoreVersion) throw_input_error("sentinel.bad_version", name + ": unsupported version " + std::to_string(version));
    ScoreMatrix s;
    s.num_frames = get_le<std::uint32_t>(bytes, 6);
    s.dim = get_le<std::uint32_t>(bytes, 10);
    const std::uint8_t kind = bytes[14];
    if (kind > 1) throw_input_error("sentinel.bad_kind", name + ": unknown kind " + std::to_string(kind));
    s.kind = static_cast<ScoreKind>(kind);
    if (s.dim == 0) throw_input_error("sentinel.bad_dim", name + ": dim must be positive");
    const std::size_t expected = static_cast<std::size_t>(s.num_frames) * s.dim * 4;
    const std::size_t actual = bytes.size() - kScoreHeaderSize;
    if (expected != actual) {
        throw_input_error("sentinel.size_mismatch", name + ": payload expected " + std::to_string(expected) +
                                                        " bytes, actual " + std::to_string(actual));
    }
    s.values.resize(static_cast<std::size_t>(s.num_frames) * s.dim);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        s.values[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, kScoreHeaderSize + 4 * i));
        if (!std::isfinite(s.values[i])) {
            throw_input_error("sentinel.non_finite", name + ": value " + std::to_string(i) + " is not finite");
        }
    }
    return s;
}

ScoreMatrix load_scores(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_input_error("sentinel.missing_path", "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_scores(bytes, path.filename().string());
}

void write_scores(const fs::path& path, const ScoreMatrix& scores) {
    const auto bytes = encode_scores(scores);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_input_error("sentinel.unwritable", "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

double LinearHead::apply(std::span<const float> embedding) const {
    if (embedding.size() != weights.size()) {
        throw_input_error("sentinel.dim_mismatch", "head expects dim " + std::to_string(weights.size()) + ", embedding has " +
                                                       std::to_string(embedding.size()));
    }
    double acc = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * static_cast<double>(embedding[i]);
    return acc;
}

LinearHead LinearHead::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw_input_error("sentinel.missing_path", "cannot open head file " + path.string());
    try {
        nlohmann::json j;
        in >> j;
        LinearHead head;
        head.weights = j.at("weights").get<std::vector<double>>();
        head.bias = j.value("bias", 0.0);
        for (double w : head.weights) {
            if (!std::isfinite(w)) throw_input_error("sentinel.non_finite", "head weights must be finite");
        }
        if (!std::isfinite(head.bias)) throw_input_error("sentinel.non_finite", "head bias must be finite");
        return head;
    } catch (const nlohmann::json::exception& e) {
        throw_input_error("sentinel.bad_head", path.filename().string() + ": " + e.what());
    }
}

std::vector<double> to_logits(const ScoreMatrix& scores, const LinearHead* head) {
    std::vector<double> logits;
    logits.reserve(scores.num_frames);
    if (scores.kind == ScoreKind::Logits) {
        if (scores.dim != 1) throw_input_error("sentinel.bad_dim", "logit files must have dim 1, got " + std::to_string(scores.dim));
        for (float v : scores.values) logits.push_back(v);
        return logits;
    }
    if (!head) throw_config_error("sentinel.head_required", "embedding scores need a linear head");
    for (std::size_t i = 0; i < scores.num_frames; ++i) logits.push_back(head->apply(scores.row(i)));
    return logits;
}

double MeanLogits::aggregate(std::span<const double> logits) const { return aggregate_mean(logits); }

double aggregate_mean(std::span<const double> logits) {
    if (logits.empty()) throw_input_error("sentinel.empty_scores", "cannot aggregate an empty score list");
    double sum = 0.0;
    for (double v : logits) sum += v;
    return sum / static_cast<double>(logits.size());
}

std::string_view to_string(GateVerdict v) { return v == GateVerdict::OffManifold ? "OffManifold" : "OnManifold"; }

GateDecision gate(double s_agg, double tau) {
    return {s_agg, tau, s_agg > tau ? GateVerdict::OffManifold : GateVerdict::OnManifold};
}

std::vector<double> NullScorer::score(const FrameSequence& segment) const {
    return std::vector<double>(segment.size(), kNullLogit);
}

ScoreFileScorer::ScoreFileScorer(ScoreMatrix scores, std::optional<LinearHead> head)
    : logits_(to_logits(scores, head ? &*head : nullptr)) {}

std::vector<double> ScoreFileScorer::score(const FrameSequence& segment) const {
    const std::size_t k = segment.start_index();
    const std::size_t n = segment.size();
    if (logits_.size() == n) return logits_;
    if (k + n <= logits_.size()) return {logits_.begin() + static_cast<std::ptrdiff_t>(k), logits_.begin() + static_cast<std::ptrdiff_t>(k + n)};
    throw_input_error("sentinel.frame_mismatch", "score file has " + std::to_string(logits_.size()) + " rows; segment needs frames " +
                                                     std::to_string(k) + ".." + std::to_string(k + n - 1));
}

}  // namespace mpf::sentinel
