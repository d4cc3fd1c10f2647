#include "rdd/detect.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

namespace rdd {

std::string_view to_string(Decision d) noexcept { return d == Decision::Drone ? "drone" : "ground"; }

Decision parse_decision(std::string_view s) {
    if (s == "drone") return Decision::Drone;
    if (s == "ground") return Decision::Ground;
    throw Error("unknown decision '" + std::string(s) + "'");
}

DetectorState update_running_mean(const DetectorState& state, double p, double t_s) {
    if (!(p >= 0.0 && p <= 1.0))
        throw Error("update_running_mean: probability " + std::to_string(p) + " outside [0, 1]");
    DetectorState next = state;
    next.count = state.count + 1;
    next.mean_probability = state.mean_probability + (p - state.mean_probability) / static_cast<double>(next.count);
    next.last_update_s = t_s;
    return next;
}

Decision classify(const DetectorState& state, double threshold) {
    if (state.count < 1) throw Error("classify: UE " + std::to_string(state.ue_id) + " has no reports");
    return state.mean_probability > threshold ? Decision::Drone : Decision::Ground;
}

std::string_view to_string(GateDirection d) noexcept { return d == GateDirection::Below ? "below" : "above"; }

GateDirection parse_gate_direction(std::string_view s) {
    if (s == "below") return GateDirection::Below;
    if (s == "above") return GateDirection::Above;
    throw ConfigError("stage1_direction: expected 'below' or 'above', got '" + std::string(s) + "'");
}

bool stage1_passes(const TwoStepConfig& config, const FeatureVector& x) {
    const double v = x[parse_feature(config.stage1_feature)];
    return config.stage1_direction == GateDirection::Below ? v <= config.stage1_threshold
                                                           : v >= config.stage1_threshold;
}

TwoStepResult two_step_filter(std::span<const LabeledSample> samples, const TwoStepConfig& config) {
    const Feature gate = parse_feature(config.stage1_feature);
    if (config.stage2_model == nullptr) throw Error("two_step_filter: no stage-2 model");

    std::map<int, std::vector<const LabeledSample*>> by_ue;
    for (const auto& s : samples) by_ue[s.ue_id].push_back(&s);

    TwoStepResult result;
    for (auto& [ue, reports] : by_ue) {
        std::stable_sort(reports.begin(), reports.end(),
                         [](const LabeledSample* a, const LabeledSample* b) { return a->t_s < b->t_s; });
        UeDetection det;
        det.ue_id = ue;
        det.state.ue_id = ue;
        for (const auto* r : reports) {
            const double v = r->features[gate];
            if (config.stage1_direction == GateDirection::Below ? v <= config.stage1_threshold
                                                                : v >= config.stage1_threshold) {
                det.passed_stage1 = true;
                break;
            }
        }
        if (det.passed_stage1) {
            for (const auto* r : reports)
                det.state = update_running_mean(det.state, predict(*config.stage2_model, r->features), r->t_s);
            det.decision = classify(det.state, config.decision_threshold);
            result.passed.push_back(ue);
        }
        result.ues.push_back(det);
    }
    return result;
}

double calibrate_stage1_threshold(std::span<const LabeledSample> train, Feature feature, double q) {
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("stage-1 percentile must be in (0, 1]");
    std::vector<double> values;
    for (const auto& s : train)
        if (s.label == 1) values.push_back(s.features[feature]);
    if (values.empty()) throw Error("calibrate_stage1_threshold: no drone samples");
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size()) - 1e-9));
    return values[std::max<std::size_t>(rank, 1) - 1];
}

void DebugStream::write(const DetectorState& state, double p_instant) {
    const nlohmann::json j{{"ue_id", state.ue_id},
                           {"t", state.last_update_s},
                           {"p_instant", p_instant},
                           {"p_mean", state.mean_probability}};
    out_ << j.dump() << '\n';
}

}  // namespace rdd
