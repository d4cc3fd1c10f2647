#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdd/learn.hpp"

namespace rdd {

// Running-mean fusion state for one UE. Holds only (T, mean), never the sequence.
struct DetectorState {
    int ue_id = 0;
    std::int64_t count = 0;  // T
    double mean_probability = 0.0;
    double last_update_s = 0.0;

    friend bool operator==(const DetectorState&, const DetectorState&) = default;
};

enum class Decision : std::uint8_t { Ground = 0, Drone = 1 };

std::string_view to_string(Decision d) noexcept;
Decision parse_decision(std::string_view s);

// mean += (p - mean) / T. Throws unless p is in [0, 1].
DetectorState update_running_mean(const DetectorState& state, double p, double t_s = 0.0);

// Drone iff mean > threshold. Throws when no report has been consumed.
Decision classify(const DetectorState& state, double threshold);

enum class GateDirection : std::uint8_t { Below, Above };

std::string_view to_string(GateDirection d) noexcept;
GateDirection parse_gate_direction(std::string_view s);

struct TwoStepConfig {
    std::string stage1_feature = "rsrp_std";
    // A report passes when value <= threshold (below) or value >= threshold (above).
    double stage1_threshold = 0.0;
    GateDirection stage1_direction = GateDirection::Below;
    const Model* stage2_model = nullptr;
    double decision_threshold = 0.5;
};

struct UeDetection {
    int ue_id = 0;
    bool passed_stage1 = false;
    DetectorState state;  // empty (T = 0) for UEs stopped at stage 1
    Decision decision = Decision::Ground;
};

struct TwoStepResult {
    std::vector<UeDetection> ues;  // ascending ue_id
    std::vector<int> passed;       // ascending ue_id
};

bool stage1_passes(const TwoStepConfig& config, const FeatureVector& x);

// Reports may arrive in any order; each UE's reports are fused in time order.
TwoStepResult two_step_filter(std::span<const LabeledSample> samples, const TwoStepConfig& config);

// Nearest-rank percentile (q in (0, 1]) of one feature over the drone samples.
double calibrate_stage1_threshold(std::span<const LabeledSample> train, Feature feature, double q = 0.99);

// Per-report fusion trace as JSON lines: {"ue_id","t","p_instant","p_mean"}.
class DebugStream {
public:
    explicit DebugStream(std::ostream& out) : out_(out) {}
    void write(const DetectorState& state, double p_instant);

private:
    std::ostream& out_;
};

}  // namespace rdd
