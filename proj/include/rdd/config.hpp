#pragma once

#include <string>

#include "rdd/simulator.hpp"

namespace rdd {

// Reads an INI-style scenario file:
//
//   [deployment]  site_count, inter_site_distance, bs_height, bs_tx_power,
//                 carrier_frequency, bandwidth, sectors_per_site, seed
//   [population]  total_ues, drone_fraction, indoor_fraction, outdoor_fraction,
//                 drone_heights, indoor_heights (comma lists), outdoor_height,
//                 drone_speed, outdoor_speed, indoor_speed
//   [simulation]  duration, report_period, a3_offset, a3_hysteresis, ttt,
//                 max_reported_cells, seed
//   [channel]     noise_figure, thermal_noise_density, shadow_decorrelation_distance,
//                 indoor_penetration_loss, resource_elements_per_band, antenna_max_gain,
//                 horizontal_3db_beamwidth, vertical_3db_beamwidth, front_back_ratio,
//                 downtilt
//
// Omitted keys keep the reference-scenario defaults. Unknown sections or keys and
// invalid values raise ConfigError naming the field.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);

// Inverse of parse_config, used for manifests.
std::string format_config(const ScenarioConfig& config);

// Scales total_ues by factor (rounded, at least 1).
void apply_population_scale(ScenarioConfig& config, double factor);

}  // namespace rdd
