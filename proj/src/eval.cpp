#include "rdd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "rdd/csv.hpp"
#include "rdd/detect.hpp"
#include "rdd/parallel.hpp"

namespace rdd {

namespace {

std::pair<std::int64_t, std::int64_t> class_counts(std::span<const ScoredUe> scored, const char* what) {
    std::int64_t pos = 0;
    for (const auto& s : scored) {
        if (!std::isfinite(s.score)) throw Error(std::string(what) + ": non-finite score for UE " + std::to_string(s.ue_id));
        pos += s.label == 1;
    }
    const auto neg = static_cast<std::int64_t>(scored.size()) - pos;
    if (pos == 0 || neg == 0) throw Error(std::string(what) + ": both classes must be present");
    return {pos, neg};
}

std::vector<std::size_t> order_by_score(std::span<const ScoredUe> scored) {
    std::vector<std::size_t> idx(scored.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scored[a].score < scored[b].score; });
    return idx;
}

}  // namespace

double roc_auc(std::span<const ScoredUe> scored) {
    const auto [pos, neg] = class_counts(scored, "roc_auc");
    const auto idx = order_by_score(scored);
    // Twice the rank sum of positives; midranks of a tie group (i+1 .. j) sum to (i+1+j)/2 each.
    double twice_rank_sum = 0.0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        std::int64_t group_pos = 0;
        while (j < idx.size() && scored[idx[j]].score == scored[idx[i]].score) group_pos += scored[idx[j++]].label == 1;
        twice_rank_sum += static_cast<double>(group_pos) * static_cast<double>(i + 1 + j);
        i = j;
    }
    const double p = static_cast<double>(pos);
    const double twice_u = twice_rank_sum - p * (p + 1.0);
    return twice_u / (2.0 * p * static_cast<double>(neg));
}

double roc_auc_trapezoid(std::span<const ScoredUe> scored) {
    const auto [pos, neg] = class_counts(scored, "roc_auc_trapezoid");
    auto idx = order_by_score(scored);
    std::reverse(idx.begin(), idx.end());
    // Sweep thresholds from high to low; twice the area stays an integer.
    double twice_area = 0.0;
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        std::int64_t dtp = 0, dfp = 0;
        while (j < idx.size() && scored[idx[j]].score == scored[idx[i]].score) {
            if (scored[idx[j]].label == 1) ++dtp;
            else ++dfp;
            ++j;
        }
        twice_area += static_cast<double>(dfp) * static_cast<double>(2 * tp + dtp);
        tp += dtp;
        fp += dfp;
        i = j;
    }
    return twice_area / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

ZeroFprResult tpr_at_zero_fpr(std::span<const ScoredUe> scored) {
    const auto [pos, neg] = class_counts(scored, "tpr_at_zero_fpr");
    ZeroFprResult r;
    r.threshold = -std::numeric_limits<double>::infinity();
    for (const auto& s : scored)
        if (s.label != 1) r.threshold = std::max(r.threshold, s.score);
    std::int64_t tp = 0;
    for (const auto& s : scored) {
        if (s.score > r.threshold) {
            if (s.label == 1) ++tp;
            else ++r.false_positives;
        }
    }
    if (r.false_positives != 0) throw Error("tpr_at_zero_fpr: threshold admits a false positive");
    r.tpr = static_cast<double>(tp) / static_cast<double>(pos);
    return r;
}

std::map<double, double> per_altitude_detection(std::span<const ScoredUe> scored, double threshold,
                                                std::span<const double> heights) {
    std::map<double, double> out;
    for (double h : heights) {
        std::int64_t n = 0, hit = 0;
        for (const auto& s : scored) {
            if (s.label != 1 || s.true_height_m != h) continue;
            ++n;
            hit += s.score > threshold;
        }
        if (n > 0) out[h] = static_cast<double>(hit) / static_cast<double>(n);
    }
    return out;
}

std::vector<UeProbabilities> group_probabilities(std::span<const LabeledSample> samples,
                                                 std::span<const double> probabilities) {
    if (samples.size() != probabilities.size()) throw Error("group_probabilities: length mismatch");
    std::map<int, std::vector<std::size_t>> by_ue;
    for (std::size_t i = 0; i < samples.size(); ++i) by_ue[samples[i].ue_id].push_back(i);
    std::vector<UeProbabilities> out;
    out.reserve(by_ue.size());
    for (auto& [ue, idx] : by_ue) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return samples[a].t_s < samples[b].t_s; });
        UeProbabilities u;
        u.ue_id = ue;
        u.label = samples[idx.front()].label;
        u.true_height_m = samples[idx.front()].true_height_m;
        for (std::size_t i : idx) {
            u.t_s.push_back(samples[i].t_s);
            u.p.push_back(probabilities[i]);
        }
        out.push_back(std::move(u));
    }
    return out;
}

std::vector<ScoredUe> scores_after(std::span<const UeProbabilities> ues, std::int64_t n) {
    if (n < 1) throw Error("scores_after: need at least one report");
    std::vector<ScoredUe> out;
    out.reserve(ues.size());
    for (const auto& u : ues) {
        DetectorState st;
        st.ue_id = u.ue_id;
        const auto m = std::min<std::size_t>(static_cast<std::size_t>(n), u.p.size());
        for (std::size_t k = 0; k < m; ++k) st = update_running_mean(st, u.p[k], u.t_s[k]);
        out.push_back({u.ue_id, u.label, st.mean_probability, u.true_height_m});
    }
    return out;
}

std::vector<CurvePoint> detection_vs_time(std::span<const UeProbabilities> ues, std::span<const double> instants_s,
                                          double report_period_s, unsigned threads) {
    if (!(report_period_s > 0.0)) throw ConfigError("report period must be positive");
    std::vector<CurvePoint> curve(instants_s.size());
    parallel_for(instants_s.size(), threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double t = instants_s[i];
            const auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(t / report_period_s + 1e-9)));
            const auto scored = scores_after(ues, n);
            curve[i] = {t, roc_auc(scored), tpr_at_zero_fpr(scored).tpr};
        }
    });
    return curve;
}

std::vector<double> default_eval_instants() {
    std::vector<double> v;
    for (int s = 1; s <= 60; ++s) v.push_back(static_cast<double>(s));
    return v;
}

void write_eval_json(const std::string& path, const EvalReport& report) {
    nlohmann::json j;
    j["model_type"] = report.model_type;
    j["feature_subset"] = report.feature_subset;
    j["eval_time_s"] = report.eval_time_s;
    j["ues"] = report.ues;
    j["drones"] = report.drones;
    j["auc"] = report.auc;
    j["auc_trapezoid"] = report.auc_trapezoid;
    j["tpr_at_zero_fpr"] = report.zero_fpr.tpr;
    j["zero_fpr_threshold"] = report.zero_fpr.threshold;
    j["false_positives_at_threshold"] = report.zero_fpr.false_positives;
    auto& alt = j["per_altitude"] = nlohmann::json::array();
    for (const auto& [h, r] : report.per_altitude) alt.push_back({{"height_m", h}, {"detection_rate", r}});
    auto& curve = j["curve"] = nlohmann::json::array();
    for (const auto& c : report.curve) curve.push_back({{"t_s", c.t_s}, {"auc", c.auc}, {"tpr_fpr0", c.tpr_fpr0}});
    if (report.has_importance) {
        auto& imp = j["gini_importance"] = nlohmann::json::object();
        for (Feature f : kAllFeatures) imp[std::string(feature_name(f))] = report.importance[static_cast<std::size_t>(f)];
    }
    std::ofstream out(path);
    if (!out) throw IoError(path, "cannot open for writing");
    out << j.dump(1) << '\n';
    if (!out) throw IoError(path, "write failed");
}

void write_curve_csv(const std::string& path, std::span<const CurvePoint> curve) {
    std::string s = "t_s,auc,tpr_fpr0\n";
    for (const auto& c : curve) {
        csv::append_exact(s, c.t_s);
        s += ',';
        csv::append_exact(s, c.auc);
        s += ',';
        csv::append_exact(s, c.tpr_fpr0);
        s += '\n';
    }
    std::ofstream out(path);
    if (!out) throw IoError(path, "cannot open for writing");
    out << s;
    if (!out) throw IoError(path, "write failed");
}

void write_altitude_csv(const std::string& path, const std::map<double, double>& per_altitude) {
    std::string s = "height_m,detection_rate\n";
    for (const auto& [h, r] : per_altitude) {
        csv::append_exact(s, h);
        s += ',';
        csv::append_exact(s, r);
        s += '\n';
    }
    std::ofstream out(path);
    if (!out) throw IoError(path, "cannot open for writing");
    out << s;
    if (!out) throw IoError(path, "write failed");
}

}  // namespace rdd
