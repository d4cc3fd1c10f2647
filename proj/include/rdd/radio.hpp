#pragma once

#include <span>

#include "rdd/common.hpp"
#include "rdd/rng.hpp"
#include "rdd/scenario.hpp"

namespace rdd {

/// Large-scale channel constants. The model is a simplified urban-macro
/// channel with an aerial extension above 22.5 m:
///
///   ground LOS   PL = 28.0 + 22 log10(d3) + 20 log10(fc)
///   ground NLOS  PL = 13.54 + 39.08 log10(d3) + 20 log10(fc) - 0.6 (h - 1.5)
///   aerial NLOS  PL = -17.5 + (46 - 7 log10 h) log10(d3) + 20 log10(40 pi fc / 3)
///
/// NLOS loss is floored at the LOS loss for the same geometry. Fast fading is
/// not modelled; reports are treated as layer-3 filtered values.
struct ChannelParams {
    double noise_figure_db = 9.0;
    double thermal_noise_density_dbm_hz = -174.0;
    double shadow_decorrelation_m = 50.0;
    double indoor_penetration_loss_db = 20.0;
    int resource_elements = 600;
    double antenna_max_gain_dbi = 8.0;
    double horizontal_beamwidth_deg = 65.0;
    double vertical_beamwidth_deg = 10.0;
    double front_back_ratio_db = 30.0;
    double downtilt_deg = 10.0;

    void validate() const;
};

// Heights at or below this use the terrestrial model.
inline constexpr double kAerialHeightThresholdM = 22.5;
// LOS is certain above this height.
inline constexpr double kLosCertainHeightM = 100.0;

struct LinkState {
    int ue_id = 0;
    int cell_id = 0;
    bool los = true;
    double shadow_db = 0.0;
    // Unit-variance AR(1) state; shadow_db = shadow_unit * sigma for the current LOS state.
    double shadow_unit = 0.0;
    // Fixed uniform draw compared against the LOS probability at the current geometry,
    // so LOS changes only when the geometry does.
    double los_draw = 0.0;
    Point2 last_update_position;
};

double los_probability(double ue_height_m, double distance_2d_m, bool indoor);

// distance_3d below 1 m is clamped to 1 m.
double pathloss_db(double distance_3d_m, double ue_height_m, double carrier_ghz, bool los);

double shadow_sigma_db(double ue_height_m, bool los);

// Effective height for propagation. Terrestrial (indoor/outdoor) UEs stay on the
// ground model, capped at the terrestrial height limit.
double propagation_height(double ue_height_m, UeClass cls);

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

double antenna_gain_dbi(const CellSector& sector, Point3 ue, const ChannelParams& params);

// Same pattern from precomputed angles: bearing of the UE seen from the site and
// depression angle below the horizon, both in degrees.
double antenna_gain_from_angles(double bearing_deg, double depression_deg, const CellSector& sector,
                                const ChannelParams& params);

// Initialises LOS and shadow state with fresh draws at the UE's spawn point.
LinkState init_link(int ue_id, int cell_id, Point2 position, double sigma_db, Rng& rng);

// AR(1) update with correlation exp(-moved / decorrelation_distance).
void update_shadow(LinkState& link, Point2 new_position, double sigma_db,
                   double decorrelation_m, Rng& rng);

// Lower-level form of update_shadow for links that share one displacement. z is the
// standard-normal innovation; rho = 1 leaves the unit draw untouched and ignores z.
void advance_shadow(LinkState& link, Point2 new_position, double rho, double sigma_db, double z);

double per_re_power_dbm(double tx_power_dbm, int resource_elements);

double rsrp_dbm(const CellSector& sector, double antenna_gain_dbi, double pathloss_db,
                double shadow_db, bool indoor, const ChannelParams& params);

double noise_floor_dbm(double bandwidth_mhz, const ChannelParams& params);

// Log-sum of wideband powers plus the thermal noise floor. Throws on empty input.
double rssi_dbm(std::span<const double> wideband_powers_dbm, double noise_floor_dbm);

}  // namespace rdd
