#include "mpf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

namespace mpf::eval {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Confusion& Confusion::operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
}

Confusion confusion(std::span<const Verdict> labels, std::span<const Verdict> predictions) {
    if (labels.size() != predictions.size()) {
        throw_input_error("eval.length_mismatch", std::to_string(labels.size()) + " labels vs " +
                                                      std::to_string(predictions.size()) + " predictions");
    }
    Confusion c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool truth = labels[i] == Verdict::AI;
        const bool pred = predictions[i] == Verdict::AI;
        if (truth && pred) ++c.tp;
        else if (truth) ++c.fn;
        else if (pred) ++c.fp;
        else ++c.tn;
    }
    return c;
}

Metrics metrics(const Confusion& c) {
    Metrics m;
    m.counts = c;
    m.recall = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
    m.precision = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    m.accuracy = ratio(static_cast<double>(c.tp + c.tn), static_cast<double>(c.total()));
    return m;
}

Metrics metrics(std::span<const Verdict> labels, std::span<const Verdict> predictions) {
    return metrics(confusion(labels, predictions));
}

std::vector<QualityProfile> quality_profile(std::span<const QualityInput> subsets) {
    for (const auto& s : subsets) {
        if (!(s.fps > 0.0) || !(s.bitrate_mbps > 0.0) || !(s.resolution_n > 0.0)) {
            throw_input_error("eval.bad_quality", "subset '" + s.subset + "' needs positive fps, bitrate and resolution");
        }
    }
    auto normalizer = [&](double QualityInput::*field) {
        double lo = INFINITY;
        double hi = -INFINITY;
        for (const auto& s : subsets) {
            lo = std::min(lo, s.*field);
            hi = std::max(hi, s.*field);
        }
        return [lo, hi, field](const QualityInput& s) { return hi > lo ? (s.*field - lo) / (hi - lo) : 0.5; };
    };
    const auto nf = normalizer(&QualityInput::fps);
    const auto nb = normalizer(&QualityInput::bitrate_mbps);
    const auto nr = normalizer(&QualityInput::resolution_n);
    std::vector<QualityProfile> out;
    out.reserve(subsets.size());
    for (const auto& s : subsets) {
        out.push_back({s.subset, s.fps, s.bitrate_mbps, s.resolution_n, (nf(s) + nb(s) + nr(s)) / 3.0});
    }
    return out;
}

double bitrate_proxy(double bytes_per_frame, double fps) { return bytes_per_frame * fps * 8.0 / 1e6; }

std::vector<QualityInput> quality_inputs(std::span<const synth::CorpusManifest> manifests) {
    struct Acc {
        double fps = 0.0;
        double bitrate = 0.0;
        double resolution = 0.0;
        std::size_t n = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Acc> acc;
    for (const auto& m : manifests) {
        const Shape& shape = m.config.shape;
        for (const auto& e : m.sequences) {
            const double fps = e.fps.value();
            const double bitrate = e.bitrate_mbps.value_or(bitrate_proxy(static_cast<double>(shape.size()), fps));
            auto [it, inserted] = acc.try_emplace(e.subset);
            if (inserted) order.push_back(e.subset);
            it->second.fps += fps;
            it->second.bitrate += bitrate;
            it->second.resolution += static_cast<double>(shape.pixels());
            ++it->second.n;
        }
    }
    std::vector<QualityInput> out;
    for (const auto& name : order) {
        const Acc& a = acc.at(name);
        const double n = static_cast<double>(a.n);
        out.push_back({name, a.fps / n, a.bitrate / n, a.resolution / n});
    }
    return out;
}

MannWhitney mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw_input_error("eval.empty_sample", "Mann-Whitney needs two non-empty samples");
    struct Item {
        double v;
        bool first;
    };
    std::vector<Item> all;
    all.reserve(a.size() + b.size());
    for (double v : a) all.push_back({v, true});
    for (double v : b) all.push_back({v, false});
    std::sort(all.begin(), all.end(), [](const Item& x, const Item& y) { return x.v < y.v; });

    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const double n = n1 + n2;
    double rank_sum = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].v == all[i].v) ++j;
        const double t = static_cast<double>(j - i);
        const double mid_rank = (static_cast<double>(i) + static_cast<double>(j) + 1.0) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].first) rank_sum += mid_rank;
        }
        tie_term += t * t * t - t;
        i = j;
    }
    MannWhitney r;
    r.u = rank_sum - n1 * (n1 + 1.0) / 2.0;
    const double mean = n1 * n2 / 2.0;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (!(var > 0.0)) return r;
    const double diff = std::abs(r.u - mean);
    r.z = std::max(0.0, diff - 0.5) / std::sqrt(var);
    if (r.u < mean) r.z = -r.z;
    r.p_value = std::min(1.0, std::erfc(std::abs(r.z) / std::sqrt(2.0)));
    return r;
}

EvalReport evaluate(std::span<const TruthRecord> truth, std::span<const PredictionRecord> predictions,
                    std::span<const QualityProfile> quality) {
    std::map<std::string, const PredictionRecord*> by_id;
    for (const auto& p : predictions) {
        if (!by_id.emplace(p.id, &p).second) throw_input_error("eval.duplicate_id", "duplicate prediction for '" + p.id + "'");
    }
    struct Acc {
        Confusion counts;
        std::size_t intercepted = 0;
        std::size_t remaining = 0;
        std::size_t stage2_correct = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Acc> subsets;
    Acc total;
    for (const auto& t : truth) {
        const auto it = by_id.find(t.id);
        if (it == by_id.end()) throw_input_error("eval.missing_prediction", "no prediction for '" + t.id + "'");
        const PredictionRecord& p = *it->second;
        auto [sit, inserted] = subsets.try_emplace(t.subset);
        if (inserted) order.push_back(t.subset);
        for (Acc* acc : {&sit->second, &total}) {
            const Verdict label = t.label;
            const Verdict pred = p.final;
            acc->counts += confusion(std::span(&label, 1), std::span(&pred, 1));
            if (p.intercepted) {
                ++acc->intercepted;
            } else {
                ++acc->remaining;
                if (p.stage2 && *p.stage2 == t.label) ++acc->stage2_correct;
            }
        }
    }

    EvalReport report;
    report.overall = metrics(total.counts);
    report.intercepted = total.intercepted;
    report.remaining = total.remaining;
    report.stage1_interception_rate = ratio(static_cast<double>(total.intercepted), static_cast<double>(truth.size()));
    report.stage2_accuracy = ratio(static_cast<double>(total.stage2_correct), static_cast<double>(total.remaining));
    for (const auto& name : order) {
        const Acc& a = subsets.at(name);
        SubsetReport s;
        s.subset = name;
        s.metrics = metrics(a.counts);
        s.intercepted = a.intercepted;
        s.remaining = a.remaining;
        s.stage2_accuracy = ratio(static_cast<double>(a.stage2_correct), static_cast<double>(a.remaining));
        for (const auto& q : quality) {
            if (q.subset == name) s.quality = q;
        }
        report.subsets.push_back(std::move(s));
    }
    return report;
}

nlohmann::json to_json(const Metrics& m) {
    return {{"tp", m.counts.tp},         {"fp", m.counts.fp},   {"tn", m.counts.tn},
            {"fn", m.counts.fn},         {"recall", m.recall},  {"precision", m.precision},
            {"f1", m.f1},                {"accuracy", m.accuracy}};
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json j;
    j["overall"] = to_json(r.overall);
    j["intercepted"] = r.intercepted;
    j["remaining"] = r.remaining;
    j["stage1_interception_rate"] = r.stage1_interception_rate;
    j["stage2_accuracy"] = r.stage2_accuracy;
    j["subsets"] = nlohmann::json::array();
    for (const auto& s : r.subsets) {
        nlohmann::json e;
        e["subset"] = s.subset;
        e["metrics"] = to_json(s.metrics);
        e["intercepted"] = s.intercepted;
        e["remaining"] = s.remaining;
        e["stage2_accuracy"] = s.stage2_accuracy;
        if (s.quality) {
            e["quality"] = {{"fps", s.quality->fps},
                            {"bitrate_mbps", s.quality->bitrate_mbps},
                            {"resolution_n", s.quality->resolution_n},
                            {"composite", s.quality->composite}};
        } else {
            e["quality"] = nullptr;
        }
        j["subsets"].push_back(std::move(e));
    }
    return j;
}

std::string correlation_csv(const EvalReport& r) {
    std::string out = "subset,composite,stage2_accuracy,remaining\n";
    for (const auto& s : r.subsets) {
        out += s.subset + "," + (s.quality ? fmt(s.quality->composite) : std::string()) + "," + fmt(s.stage2_accuracy) + "," +
               std::to_string(s.remaining) + "\n";
    }
    return out;
}

}  // namespace mpf::eval
