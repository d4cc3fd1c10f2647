#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rdd/detect.hpp"
#include "rdd/rng.hpp"

namespace rdd {

struct TimedProbability {
    double t_s = 0.0;
    double p = 0.0;

    friend bool operator==(const TimedProbability&, const TimedProbability&) = default;
};

// One batch of per-report probabilities a cell forwards to the central entity.
struct ProbabilityReportMsg {
    int ue_id = 0;
    int cell_id = 0;
    std::vector<TimedProbability> probabilities;  // strictly increasing t
    std::int64_t seq = 0;                         // per-UE batch counter

    void validate() const;
    friend bool operator==(const ProbabilityReportMsg&, const ProbabilityReportMsg&) = default;
};

// Fusion state handed from the source to the target cell on handover.
struct HandoverContextMsg {
    int ue_id = 0;
    int source_cell = 0;
    int target_cell = 0;
    DetectorState carried;
    std::optional<Decision> decided;
    std::int64_t seq = 0;

    void validate() const;
    friend bool operator==(const HandoverContextMsg&, const HandoverContextMsg&) = default;
};

struct TerminationPolicy {
    double low = 0.1;
    double high = 0.9;
    std::int64_t min_reports = 25;

    void validate() const;
};

// Mean over the union of all (t, p) pairs for one UE, folded in time order.
// Messages with a repeated (cell, seq) are counted once. Throws when messages
// belong to different UEs or when two batches claim the same timestamp.
DetectorState centralized_collect(std::span<const ProbabilityReportMsg> messages);

// Per-UE state a cell currently owns.
struct LiveState {
    DetectorState state;
    std::optional<Decision> decided;
    double decided_at_s = 0.0;
    int decided_by_cell = -1;
};

struct CellNode {
    int cell_id = 0;
    std::map<int, LiveState> live;
    std::map<int, std::int64_t> last_context_seq;
};

// Installs the carried state at the target. Throws if the target already holds
// live state for the UE (a fork) or the message is addressed elsewhere.
DetectorState distributed_handover_transfer(const HandoverContextMsg& context, CellNode& target);

std::optional<Decision> check_termination(const DetectorState& state, const TerminationPolicy& policy);

// ---- replay harness ----

enum class AggregationMode : std::uint8_t { Central, Distributed };

std::string_view to_string(AggregationMode m) noexcept;
AggregationMode parse_aggregation_mode(std::string_view s);

// One scored report in trace order (time-major).
struct ScoredReport {
    int ue_id = 0;
    double t_s = 0.0;
    int serving_cell = 0;
    double p = 0.0;
};

struct BusOptions {
    double loss_probability = 0.0;
    double duplicate_probability = 0.0;
    std::uint64_t seed = 42;
};

struct ReplayOptions {
    AggregationMode mode = AggregationMode::Central;
    std::optional<TerminationPolicy> termination;  // distributed mode only
    double decision_threshold = 0.5;
    BusOptions bus;
    std::ostream* message_log = nullptr;
};

struct UeOutcome {
    int ue_id = 0;
    DetectorState state;
    Decision decision = Decision::Ground;
    bool early = false;  // decided by the termination policy
    double decided_at_s = 0.0;
    int decided_by_cell = -1;
};

struct ReplayResult {
    std::vector<UeOutcome> ues;  // ascending ue_id
    std::int64_t messages_sent = 0;
    std::int64_t messages_delivered = 0;
    std::int64_t messages_dropped = 0;
    std::int64_t messages_duplicated = 0;
};

ReplayResult replay_aggregation(std::span<const ScoredReport> reports, const ReplayOptions& options);

// Message log: one JSON object per line, "type" = probability_report | handover_context.
std::string message_to_json(const ProbabilityReportMsg& msg);
std::string message_to_json(const HandoverContextMsg& msg);

struct MessageLog {
    std::vector<ProbabilityReportMsg> reports;
    std::vector<HandoverContextMsg> contexts;
};

MessageLog read_message_log(const std::string& path);

// Recomputes the central result for every UE from logged probability reports.
std::map<int, DetectorState> replay_central_log(const MessageLog& log);

}  // namespace rdd
