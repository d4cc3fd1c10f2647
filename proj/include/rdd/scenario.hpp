#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "rdd/common.hpp"

namespace rdd {

// Macro deployment. Defaults reproduce the 19-site urban reference layout.
struct DeploymentConfig {
    int site_count = 19;
    double inter_site_distance_m = 500.0;
    double bs_height_m = 25.0;
    double bs_tx_power_dbm = 46.0;
    double carrier_frequency_ghz = 2.0;
    double bandwidth_mhz = 10.0;
    int sectors_per_site = 3;
    std::uint64_t seed = 42;

    void validate() const;
};

struct CellSector {
    int cell_id = 0;
    int site_id = 0;
    Point2 site_position;
    double azimuth_deg = 0.0;
    double downtilt_deg = 10.0;
    double height_m = 25.0;
    double tx_power_dbm = 46.0;
};

struct PopulationSpec {
    int total_ues = 19000;
    double drone_fraction = 0.25;
    double indoor_fraction = 0.65;
    double outdoor_fraction = 0.10;
    std::vector<double> drone_heights_m{15.0, 30.0, 60.0, 120.0, 300.0};
    std::vector<double> indoor_heights_m{1.5, 11.5, 21.5, 31.5};
    double outdoor_height_m = 1.5;
    double drone_speed_kmh = 120.0;
    double outdoor_speed_kmh = 120.0;
    double indoor_speed_kmh = 3.0;

    void validate() const;
};

struct Ue {
    int ue_id = 0;
    UeClass cls = UeClass::OutdoorGround;
    double height_m = 1.5;
    double speed_kmh = 0.0;
    Point2 position;
    double heading_rad = 0.0;
    int serving_cell = -1;
    bool indoor = false;

    friend bool operator==(const Ue&, const Ue&) = default;
};

// Axis-aligned drop region for UEs.
struct Bounds {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    bool contains(Point2 p) const {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
};

// Sites laid out site-major; each site contributes sectors at 0/120/240 degrees.
std::vector<CellSector> build_hex_grid(const DeploymentConfig& config, double downtilt_deg = 10.0);

// Distinct site positions in the order build_hex_grid uses them.
std::vector<Point2> hex_site_positions(int site_count, double inter_site_distance_m);

// Smallest rectangle around all sites, grown by one inter-site distance.
Bounds deployment_bounds(std::span<const CellSector> cells, double inter_site_distance_m);

// Largest-remainder apportionment of total_ues over (drone, indoor, outdoor).
std::array<int, kUeClassCount> class_counts(const PopulationSpec& spec);

std::vector<Ue> spawn_population(const PopulationSpec& spec, const Bounds& bounds,
                                 std::uint64_t rng_seed);

}  // namespace rdd
