#include "rdd/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rdd/parallel.hpp"

namespace rdd {

void SimParams::validate() const {
    if (!(report_period_s > 0.0)) throw ConfigError("report_period: must be positive");
    if (!(duration_s >= report_period_s))
        throw ConfigError("duration: must be at least one report period");
    const double ratio = ttt_s / report_period_s;
    if (ttt_s < 0.0 || std::abs(ratio - std::round(ratio)) > 1e-9)
        throw ConfigError("ttt: must be a non-negative integer multiple of report_period");
    if (max_reported_cells < 2) throw ConfigError("max_reported_cells: must be at least 2");
    if (a3_hysteresis_db < 0.0) throw ConfigError("a3_hysteresis: must be >= 0");
}

int SimParams::tick_count() const {
    return static_cast<int>(std::floor(duration_s / report_period_s + 1e-9));
}

int SimParams::ttt_ticks() const { return static_cast<int>(std::lround(ttt_s / report_period_s)); }

void ScenarioConfig::validate() const {
    deployment.validate();
    population.validate();
    sim.validate();
    channel.validate();
}

A3Result evaluate_a3(double serving_rsrp_dbm, std::span<const CellRsrp> neighbours,
                     const A3State& state, const SimParams& params) {
    A3Result out{state, std::nullopt};
    const CellRsrp* best = nullptr;
    for (const auto& n : neighbours) {
        if (!best || n.rsrp_dbm > best->rsrp_dbm ||
            (n.rsrp_dbm == best->rsrp_dbm && n.cell_id < best->cell_id))
            best = &n;
    }
    const bool entered = best && best->rsrp_dbm - params.a3_hysteresis_db >
                                     serving_rsrp_dbm + params.a3_offset_db;
    if (!entered) {
        out.state.candidate_cell.reset();
        out.state.consecutive_ticks_met = 0;
        return out;
    }
    if (out.state.candidate_cell == best->cell_id) {
        ++out.state.consecutive_ticks_met;
    } else {
        out.state.candidate_cell = best->cell_id;
        out.state.consecutive_ticks_met = 1;
    }
    if (out.state.consecutive_ticks_met >= std::max(1, params.ttt_ticks())) {
        out.handover_target = best->cell_id;
        out.state.candidate_cell.reset();
        out.state.consecutive_ticks_met = 0;
    }
    return out;
}

namespace {

void reflect(double& coord, double lo, double hi, bool& flipped) {
    // Repeat in case a single step overshoots the whole box.
    for (int guard = 0; guard < 8 && (coord < lo || coord > hi); ++guard) {
        coord = coord < lo ? 2.0 * lo - coord : 2.0 * hi - coord;
        flipped = !flipped;
    }
    coord = std::clamp(coord, lo, hi);
}

}  // namespace

Ue move_ue(const Ue& ue, double dt_s, const Bounds& bounds, Rng& rng) {
    Ue out = ue;
    if (ue.cls == UeClass::IndoorGround) {
        std::uniform_real_distribution<double> uh(0.0, 2.0 * kPi);
        out.heading_rad = uh(rng);
    }
    const double step = ue.speed_kmh / 3.6 * dt_s;
    if (step <= 0.0) return out;
    double x = out.position.x + step * std::cos(out.heading_rad);
    double y = out.position.y + step * std::sin(out.heading_rad);
    bool flip_x = false;
    bool flip_y = false;
    reflect(x, bounds.min_x, bounds.max_x, flip_x);
    reflect(y, bounds.min_y, bounds.max_y, flip_y);
    double h = out.heading_rad;
    if (flip_x) h = kPi - h;
    if (flip_y) h = -h;
    out.heading_rad = std::remainder(h, 2.0 * kPi);
    out.position = {x, y};
    return out;
}

World::World(const ScenarioConfig& config) : config_(config) {
    config_.validate();
    cells_ = build_hex_grid(config_.deployment, config_.channel.downtilt_deg);
    bounds_ = deployment_bounds(cells_, config_.deployment.inter_site_distance_m);
    for (const auto& c : cells_) {
        if (static_cast<std::size_t>(c.site_id) >= sites_.size()) {
            sites_.resize(static_cast<std::size_t>(c.site_id) + 1);
            site_heights_.resize(sites_.size());
        }
        sites_[static_cast<std::size_t>(c.site_id)] = c.site_position;
        site_heights_[static_cast<std::size_t>(c.site_id)] = c.height_m;
    }
    ues_ = spawn_population(config_.population, bounds_, config_.deployment.seed);
    noise_floor_dbm_ = noise_floor_dbm(config_.deployment.bandwidth_mhz, config_.channel);
    wideband_offset_db_ = 10.0 * std::log10(static_cast<double>(config_.channel.resource_elements));

    const std::size_t n = ues_.size();
    links_.resize(n);
    a3_.resize(n);
    handovers_.assign(n, 0);
    rngs_.reserve(n);
    normals_.resize(n);
    std::vector<double> rsrp(cells_.size());
    for (std::size_t i = 0; i < n; ++i) {
        const Ue& ue = ues_[i];
        rngs_.push_back(make_rng(config_.sim.seed, Stream::UeMotion, static_cast<std::uint64_t>(ue.ue_id)));
        links_[i].reserve(cells_.size());
        for (const auto& c : cells_)
            links_[i].push_back(init_link(ue.ue_id, c.cell_id, ue.position, 1.0, rngs_[i]));
        a3_[i].ue_id = ue.ue_id;
        measure(i, rsrp);
        // Initial serving cell: strongest at spawn, lowest id on ties.
        ues_[i].serving_cell = static_cast<int>(std::max_element(rsrp.begin(), rsrp.end()) - rsrp.begin());
    }
}

std::int64_t World::handover_count() const noexcept {
    return std::accumulate(handovers_.begin(), handovers_.end(), std::int64_t{0});
}

std::array<std::int64_t, kUeClassCount> World::handovers_by_class() const {
    std::array<std::int64_t, kUeClassCount> out{};
    for (std::size_t i = 0; i < ues_.size(); ++i) out[static_cast<int>(ues_[i].cls)] += handovers_[i];
    return out;
}

// Refreshes every link of UE i at its current position and writes per-cell RSRP.
// Geometry, LOS probability and path loss depend only on the site, so they are
// computed once per site and shared by its sectors.
void World::measure(std::size_t i, std::vector<double>& rsrp) {
    thread_local std::vector<SiteView> views;
    auto& links = links_[i];
    auto& rng = rngs_[i];
    auto& normal = normals_[i];
    const Ue& ue = ues_[i];
    const auto& ch = config_.channel;
    const double prop_h = propagation_height(ue.height_m, ue.cls);
    const double fc = config_.deployment.carrier_frequency_ghz;

    views.resize(sites_.size());
    for (std::size_t s = 0; s < sites_.size(); ++s) {
        SiteView& v = views[s];
        const double dx = ue.position.x - sites_[s].x;
        const double dy = ue.position.y - sites_[s].y;
        const double d2 = std::hypot(dx, dy);
        const double dz = site_heights_[s] - ue.height_m;
        const double d3 = std::sqrt(d2 * d2 + dz * dz);
        v.p_los = los_probability(ue.height_m, d2, ue.indoor);
        v.pl_los = pathloss_db(d3, prop_h, fc, true);
        v.pl_nlos = pathloss_db(d3, prop_h, fc, false);
        v.bearing_deg = rad_to_deg(std::atan2(dy, dx));
        v.depression_deg = rad_to_deg(std::atan2(dz, d2));
    }

    // Every link of a UE was last updated at the same position.
    const double moved = distance(links.front().last_update_position, ue.position);
    const double rho = moved > 0.0 ? std::exp(-moved / ch.shadow_decorrelation_m) : 1.0;
    const double sigma_los = shadow_sigma_db(prop_h, true);
    const double sigma_nlos = shadow_sigma_db(prop_h, false);

    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const CellSector& cell = cells_[c];
        const SiteView& v = views[static_cast<std::size_t>(cell.site_id)];
        LinkState& link = links[c];
        link.los = link.los_draw < v.p_los;
        const double z = rho < 1.0 ? normal(rng) : 0.0;
        advance_shadow(link, ue.position, rho, link.los ? sigma_los : sigma_nlos, z);
        const double gain = antenna_gain_from_angles(v.bearing_deg, v.depression_deg, cell, ch);
        rsrp[c] = rsrp_dbm(cell, gain, link.los ? v.pl_los : v.pl_nlos, link.shadow_db, ue.indoor, ch);
    }
}

void World::step_ue(std::size_t i, bool move, double t, MeasurementReport& report) {
    thread_local std::vector<double> rsrp;
    thread_local std::vector<double> wideband;
    thread_local std::vector<int> order;
    const std::size_t nc = cells_.size();
    rsrp.resize(nc);
    wideband.resize(nc);
    order.resize(nc);

    if (move) ues_[i] = move_ue(ues_[i], config_.sim.report_period_s, bounds_, rngs_[i]);
    measure(i, rsrp);
    Ue& ue = ues_[i];

    for (std::size_t c = 0; c < nc; ++c) wideband[c] = rsrp[c] + wideband_offset_db_;
    const double rssi = rssi_dbm(wideband, noise_floor_dbm_);

    std::iota(order.begin(), order.end(), 0);
    const std::size_t top = std::min<std::size_t>(nc, static_cast<std::size_t>(config_.sim.max_reported_cells));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](int a, int b) { return rsrp[a] > rsrp[b] || (rsrp[a] == rsrp[b] && a < b); });

    report.ue_id = ue.ue_id;
    report.t_s = t;
    report.serving_cell = ue.serving_cell;
    report.cell_rsrps.clear();
    bool serving_listed = false;
    for (std::size_t k = 0; k < top; ++k) {
        report.cell_rsrps.push_back({order[k], rsrp[order[k]]});
        serving_listed = serving_listed || order[k] == ue.serving_cell;
    }
    const double serving_rsrp = rsrp[ue.serving_cell];
    if (!serving_listed) report.cell_rsrps.push_back({ue.serving_cell, serving_rsrp});
    report.serving_rsrp_dbm = serving_rsrp;
    report.rssi_dbm = rssi;
    report.true_class = ue.cls;
    report.true_height_m = ue.height_m;

    // Only the strongest neighbour matters for A3; it is the first non-serving entry.
    const CellRsrp* strongest = nullptr;
    for (const auto& cr : report.cell_rsrps) {
        if (cr.cell_id != ue.serving_cell) {
            strongest = &cr;
            break;
        }
    }
    const auto a3 = strongest ? evaluate_a3(serving_rsrp, std::span(strongest, 1), a3_[i], config_.sim)
                              : evaluate_a3(serving_rsrp, {}, a3_[i], config_.sim);
    a3_[i] = a3.state;
    if (a3.handover_target) {
        ue.serving_cell = *a3.handover_target;
        ++handovers_[i];
    }
}

void World::step(std::vector<MeasurementReport>& reports, unsigned threads) {
    reports.resize(ues_.size());
    const bool move = tick_ > 0;
    const double t = tick_ * config_.sim.report_period_s;
    parallel_for(ues_.size(), threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) step_ue(i, move, t, reports[i]);
    });
    ++tick_;
}

SimulationSummary run_simulation(const ScenarioConfig& config, const ReportSink& sink,
                                 unsigned threads) {
    World world(config);
    SimulationSummary summary;
    summary.tick_count = config.sim.tick_count();
    summary.cell_count = static_cast<int>(world.cells().size());
    summary.deployment_seed = config.deployment.seed;
    summary.sim_seed = config.sim.seed;
    for (const auto& ue : world.ues()) ++summary.ues_by_class[static_cast<int>(ue.cls)];

    std::vector<MeasurementReport> reports;
    for (int k = 0; k < summary.tick_count; ++k) {
        world.step(reports, threads);
        summary.report_count += static_cast<std::int64_t>(reports.size());
        if (sink) sink(reports);
    }
    summary.handover_count = world.handover_count();
    summary.handovers_by_class = world.handovers_by_class();
    return summary;
}

}  // namespace rdd
