#include "rdd/radio.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rdd {

void ChannelParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ConfigError(std::string(name) + ": must be positive");
    };
    positive(shadow_decorrelation_m, "shadow_decorrelation_distance");
    positive(antenna_max_gain_dbi, "antenna_max_gain");
    positive(horizontal_beamwidth_deg, "horizontal_3db_beamwidth");
    positive(vertical_beamwidth_deg, "vertical_3db_beamwidth");
    positive(front_back_ratio_db, "front_back_ratio");
    if (resource_elements <= 0) throw ConfigError("resource_elements_per_band: must be positive");
    if (indoor_penetration_loss_db < 0.0)
        throw ConfigError("indoor_penetration_loss: must be >= 0");
    if (noise_figure_db < 0.0) throw ConfigError("noise_figure: must be >= 0");
}

namespace {

double ground_los_probability(double h, double d) {
    if (d <= 18.0) return 1.0;
    const double base = 18.0 / d + std::exp(-d / 63.0) * (1.0 - 18.0 / d);
    double c = 0.0;
    if (h > 13.0) c = std::pow((std::min(h, 23.0) - 13.0) / 10.0, 1.5);
    const double boost = 1.0 + c * 1.25 * std::pow(d / 100.0, 3.0) * std::exp(-d / 150.0);
    return std::min(1.0, base * boost);
}

double aerial_los_probability(double h, double d) {
    if (h > kLosCertainHeightM) return 1.0;
    const double lh = std::log10(h);
    const double d1 = std::max(460.0 * lh - 700.0, 18.0);
    const double p1 = 4300.0 * lh - 3800.0;
    if (d <= d1) return 1.0;
    return std::min(1.0, d1 / d + std::exp(-d / p1) * (1.0 - d1 / d));
}

}  // namespace

double los_probability(double ue_height_m, double distance_2d_m, bool indoor) {
    const double d = std::max(0.0, distance_2d_m);
    if (indoor) return ground_los_probability(std::min(ue_height_m, kAerialHeightThresholdM), d);
    if (ue_height_m <= kAerialHeightThresholdM) return ground_los_probability(ue_height_m, d);
    return aerial_los_probability(ue_height_m, d);
}

double pathloss_db(double distance_3d_m, double h, double fc, bool los) {
    const double d = std::max(1.0, distance_3d_m);
    const double ld = std::log10(d);
    const double los_loss = 28.0 + 22.0 * ld + 20.0 * std::log10(fc);
    if (los) return los_loss;
    double nlos = 0.0;
    if (h <= kAerialHeightThresholdM) {
        nlos = 13.54 + 39.08 * ld + 20.0 * std::log10(fc) - 0.6 * (h - 1.5);
    } else {
        nlos = -17.5 + (46.0 - 7.0 * std::log10(h)) * ld + 20.0 * std::log10(40.0 * kPi * fc / 3.0);
    }
    return std::max(los_loss, nlos);
}

double shadow_sigma_db(double h, bool los) {
    if (!los) return 6.0;
    if (h <= kAerialHeightThresholdM) return 4.0;
    return 4.64 * std::exp(-0.0066 * h);
}

double propagation_height(double ue_height_m, UeClass cls) {
    if (cls == UeClass::Drone) return ue_height_m;
    return std::min(ue_height_m, kAerialHeightThresholdM);
}

double antenna_gain_dbi(const CellSector& sector, Point3 ue, const ChannelParams& params) {
    const double dx = ue.x - sector.site_position.x;
    const double dy = ue.y - sector.site_position.y;
    const double d2 = std::hypot(dx, dy);
    return antenna_gain_from_angles(rad_to_deg(std::atan2(dy, dx)),
                                    rad_to_deg(std::atan2(sector.height_m - ue.z, d2)), sector, params);
}

double antenna_gain_from_angles(double bearing_deg, double depression_deg, const CellSector& sector,
                                const ChannelParams& params) {
    const double phi = std::remainder(bearing_deg - sector.azimuth_deg, 360.0);  // [-180, 180]
    const double cap = params.front_back_ratio_db;
    const double h_ratio = phi / params.horizontal_beamwidth_deg;
    const double v_ratio = (depression_deg - sector.downtilt_deg) / params.vertical_beamwidth_deg;
    const double att_h = std::min(12.0 * h_ratio * h_ratio, cap);
    const double att_v = std::min(12.0 * v_ratio * v_ratio, cap);
    return params.antenna_max_gain_dbi - std::min(att_h + att_v, cap);
}

LinkState init_link(int ue_id, int cell_id, Point2 position, double sigma_db, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    LinkState link;
    link.ue_id = ue_id;
    link.cell_id = cell_id;
    link.los_draw = u(rng);
    link.shadow_unit = n(rng);
    link.shadow_db = link.shadow_unit * sigma_db;
    link.last_update_position = position;
    return link;
}

void update_shadow(LinkState& link, Point2 new_position, double sigma_db, double decorrelation_m,
                   Rng& rng) {
    const double moved = distance(link.last_update_position, new_position);
    if (moved > 0.0) {
        std::normal_distribution<double> n(0.0, 1.0);
        advance_shadow(link, new_position, std::exp(-moved / decorrelation_m), sigma_db, n(rng));
    } else {
        advance_shadow(link, new_position, 1.0, sigma_db, 0.0);
    }
}

void advance_shadow(LinkState& link, Point2 new_position, double rho, double sigma_db, double z) {
    link.last_update_position = new_position;
    if (rho < 1.0) link.shadow_unit = rho * link.shadow_unit + std::sqrt(1.0 - rho * rho) * z;
    link.shadow_db = link.shadow_unit * sigma_db;
}

double per_re_power_dbm(double tx_power_dbm, int resource_elements) {
    return tx_power_dbm - 10.0 * std::log10(static_cast<double>(resource_elements));
}

double rsrp_dbm(const CellSector& sector, double gain_dbi, double pl_db, double shadow_db,
                bool indoor, const ChannelParams& params) {
    double p = per_re_power_dbm(sector.tx_power_dbm, params.resource_elements) + gain_dbi -
               pl_db - shadow_db;
    if (indoor) p -= params.indoor_penetration_loss_db;
    return p;
}

double noise_floor_dbm(double bandwidth_mhz, const ChannelParams& params) {
    return params.thermal_noise_density_dbm_hz + 10.0 * std::log10(bandwidth_mhz * 1e6) +
           params.noise_figure_db;
}

double rssi_dbm(std::span<const double> wideband_powers_dbm, double noise_floor) {
    if (wideband_powers_dbm.empty()) throw Error("rssi: at least one cell power is required");
    double total_mw = std::pow(10.0, noise_floor / 10.0);
    for (double p : wideband_powers_dbm) total_mw += std::pow(10.0, p / 10.0);
    return 10.0 * std::log10(total_mw);
}

}  // namespace rdd
