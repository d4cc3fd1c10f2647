#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "rdd/radio.hpp"
#include "rdd/rng.hpp"
#include "rdd/scenario.hpp"

namespace rdd {

struct SimParams {
    double duration_s = 60.0;
    double report_period_s = 0.040;
    double a3_offset_db = 2.0;
    double a3_hysteresis_db = 1.0;
    double ttt_s = 0.160;
    int max_reported_cells = 8;
    std::uint64_t seed = 42;

    void validate() const;
    // floor(duration / report_period), robust to representation error.
    int tick_count() const;
    int ttt_ticks() const;
};

struct CellRsrp {
    int cell_id = 0;
    double rsrp_dbm = 0.0;

    friend bool operator==(const CellRsrp&, const CellRsrp&) = default;
};

struct MeasurementReport {
    int ue_id = 0;
    double t_s = 0.0;
    int serving_cell = -1;
    // Strongest cells, descending. The serving cell is appended when it is not
    // among the strongest max_reported_cells.
    std::vector<CellRsrp> cell_rsrps;
    double serving_rsrp_dbm = 0.0;
    double rssi_dbm = 0.0;
    UeClass true_class = UeClass::OutdoorGround;
    double true_height_m = 0.0;
};

struct A3State {
    int ue_id = 0;
    std::optional<int> candidate_cell;
    int consecutive_ticks_met = 0;
};

struct A3Result {
    A3State state;
    std::optional<int> handover_target;
};

// Evaluates the A3 entry condition (neighbour - hysteresis > serving + offset) for the
// strongest neighbour and advances the time-to-trigger counter.
A3Result evaluate_a3(double serving_rsrp_dbm, std::span<const CellRsrp> neighbours,
                     const A3State& state, const SimParams& params);

// Moves a UE by speed * dt. Drones and outdoor UEs keep their heading and reflect off
// the bounds; indoor UEs draw a fresh heading every tick.
Ue move_ue(const Ue& ue, double dt_s, const Bounds& bounds, Rng& rng);

struct ScenarioConfig {
    DeploymentConfig deployment;
    PopulationSpec population;
    SimParams sim;
    ChannelParams channel;

    void validate() const;
};

// Mutable simulation state. Each UE owns its links, A3 machine and RNG stream,
// so per-UE work can run on any thread without changing the results.
class World {
public:
    explicit World(const ScenarioConfig& config);

    const std::vector<CellSector>& cells() const noexcept { return cells_; }
    const std::vector<Ue>& ues() const noexcept { return ues_; }
    const Bounds& bounds() const noexcept { return bounds_; }
    const ScenarioConfig& config() const noexcept { return config_; }
    int tick() const noexcept { return tick_; }
    std::int64_t handover_count() const noexcept;
    std::array<std::int64_t, kUeClassCount> handovers_by_class() const;

    // Advances one report period (the first call only measures, without moving) and
    // writes one report per UE, indexed by ue_id.
    void step(std::vector<MeasurementReport>& reports, unsigned threads = 0);

private:
    void step_ue(std::size_t i, bool move, double t, MeasurementReport& report);
    void measure(std::size_t i, std::vector<double>& rsrp);

    struct SiteView {
        double p_los = 0.0;
        double pl_los = 0.0;
        double pl_nlos = 0.0;
        double bearing_deg = 0.0;
        double depression_deg = 0.0;
    };

    ScenarioConfig config_;
    std::vector<CellSector> cells_;
    std::vector<Point2> sites_;
    std::vector<double> site_heights_;
    Bounds bounds_;
    double noise_floor_dbm_ = 0.0;
    double wideband_offset_db_ = 0.0;
    std::vector<Ue> ues_;
    std::vector<std::vector<LinkState>> links_;
    std::vector<A3State> a3_;
    std::vector<Rng> rngs_;
    std::vector<std::normal_distribution<double>> normals_;  // per UE, keeps the paired draw
    std::vector<std::int64_t> handovers_;
    int tick_ = 0;
};

struct SimulationSummary {
    std::int64_t report_count = 0;
    std::int64_t handover_count = 0;
    std::array<std::int64_t, kUeClassCount> ues_by_class{};
    std::array<std::int64_t, kUeClassCount> handovers_by_class{};
    int tick_count = 0;
    int cell_count = 0;
    std::uint64_t deployment_seed = 0;
    std::uint64_t sim_seed = 0;
};

// Called once per tick with that tick's reports in ue_id order.
using ReportSink = std::function<void(std::span<const MeasurementReport>)>;

SimulationSummary run_simulation(const ScenarioConfig& config, const ReportSink& sink,
                                 unsigned threads = 0);

}  // namespace rdd
