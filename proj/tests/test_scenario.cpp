#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "rdd/config.hpp"
#include "rdd/scenario.hpp"

using namespace rdd;

namespace {

DeploymentConfig sites(int n) {
    DeploymentConfig c;
    c.site_count = n;
    return c;
}

std::vector<double> sorted_center_distances(const std::vector<Point2>& pts) {
    std::vector<double> d;
    for (auto p : pts) d.push_back(std::hypot(p.x, p.y));
    std::sort(d.begin(), d.end());
    return d;
}

}  // namespace

TEST_CASE("hex grid sizes") {
    CHECK(build_hex_grid(sites(19)).size() == 57);
    CHECK(build_hex_grid(sites(7)).size() == 21);
    CHECK(build_hex_grid(sites(1)).size() == 3);
    CHECK_THROWS_AS(build_hex_grid(sites(5)), ConfigError);
}

TEST_CASE("single site has three sectors at the origin") {
    const auto cells = build_hex_grid(sites(1));
    const double az[3] = {0.0, 120.0, 240.0};
    for (int k = 0; k < 3; ++k) {
        CHECK(cells[k].cell_id == k);
        CHECK(cells[k].site_position == Point2{0.0, 0.0});
        CHECK(cells[k].azimuth_deg == az[k]);
    }
}

TEST_CASE("ring-1 sites sit one ISD from the center") {
    const auto pts = hex_site_positions(7, 500.0);
    REQUIRE(pts.size() == 7);
    CHECK(pts[0] == Point2{0.0, 0.0});
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(distance(pts[i], pts[0]) == doctest::Approx(500.0).epsilon(1e-12));
    // Neighbouring ring sites are also one ISD apart.
    int neighbours = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) neighbours += std::abs(distance(pts[i], pts[j]) - 500.0) < 1e-9;
    CHECK(neighbours == 6);
}

TEST_CASE("ring-2 geometry") {
    const auto pts = hex_site_positions(19, 500.0);
    const auto d = sorted_center_distances(pts);
    // 1 center, 6 at ISD, 6 at sqrt(3) ISD, 6 at 2 ISD.
    CHECK(d[0] == doctest::Approx(0.0));
    for (int i = 1; i <= 6; ++i) CHECK(d[i] == doctest::Approx(500.0));
    for (int i = 7; i <= 12; ++i) CHECK(d[i] == doctest::Approx(500.0 * std::sqrt(3.0)));
    for (int i = 13; i <= 18; ++i) CHECK(d[i] == doctest::Approx(1000.0));
}

TEST_CASE("center distances are invariant under 60 degree rotation") {
    for (int n : {7, 19}) {
        const auto pts = hex_site_positions(n, 500.0);
        std::vector<Point2> rot;
        const double c = std::cos(kPi / 3.0), s = std::sin(kPi / 3.0);
        for (auto p : pts) rot.push_back({c * p.x - s * p.y, s * p.x + c * p.y});
        // Every rotated site coincides with an original one.
        for (auto r : rot) {
            const bool hit = std::any_of(pts.begin(), pts.end(), [&](Point2 p) { return distance(p, r) < 1e-6; });
            CHECK(hit);
        }
        const auto a = sorted_center_distances(pts), b = sorted_center_distances(rot);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]));
    }
}

TEST_CASE("cell ids dense and sector azimuths 120 degrees apart") {
    const auto cells = build_hex_grid(sites(19));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        CHECK(cells[i].cell_id == static_cast<int>(i));
        CHECK(cells[i].site_id == static_cast<int>(i / 3));
        CHECK(cells[i].azimuth_deg == 120.0 * static_cast<double>(i % 3));
    }
}

TEST_CASE("deployment bounds add one ISD around the sites") {
    const auto cells = build_hex_grid(sites(1));
    const Bounds b = deployment_bounds(cells, 500.0);
    CHECK(b.min_x == -500.0);
    CHECK(b.max_x == 500.0);
    CHECK(b.min_y == -500.0);
    CHECK(b.max_y == 500.0);
}

TEST_CASE("class counts by largest remainder") {
    PopulationSpec spec;
    spec.total_ues = 19000;
    CHECK(class_counts(spec) == std::array<int, 3>{4750, 12350, 1900});
    spec.total_ues = 4;
    // Quotas 1.0 / 2.6 / 0.4: floors 1/2/0, the leftover seat goes to the 0.6 remainder.
    CHECK(class_counts(spec) == std::array<int, 3>{1, 3, 0});
    spec.total_ues = 1900;
    CHECK(class_counts(spec) == std::array<int, 3>{475, 1235, 190});
}

TEST_CASE("class counts always sum to total") {
    PopulationSpec spec;
    for (int n = 1; n < 200; ++n) {
        for (double d : {0.0, 0.1, 0.33, 0.5}) {
            spec.total_ues = n;
            spec.drone_fraction = d;
            spec.indoor_fraction = (1.0 - d) * 0.7;
            spec.outdoor_fraction = 1.0 - d - spec.indoor_fraction;
            const auto c = class_counts(spec);
            CHECK(c[0] + c[1] + c[2] == n);
        }
    }
}

TEST_CASE("spawned population respects class invariants") {
    PopulationSpec spec;
    spec.total_ues = 400;
    const auto cells = build_hex_grid(sites(19));
    const Bounds b = deployment_bounds(cells, 500.0);
    const auto ues = spawn_population(spec, b, 7);
    REQUIRE(ues.size() == 400);
    std::array<int, 3> counts{};
    const std::set<double> drone_h(spec.drone_heights_m.begin(), spec.drone_heights_m.end());
    const std::set<double> indoor_h(spec.indoor_heights_m.begin(), spec.indoor_heights_m.end());
    for (std::size_t i = 0; i < ues.size(); ++i) {
        const Ue& u = ues[i];
        CHECK(u.ue_id == static_cast<int>(i));
        CHECK(b.contains(u.position));
        ++counts[static_cast<int>(u.cls)];
        CHECK(u.indoor == (u.cls == UeClass::IndoorGround));
        if (u.cls == UeClass::Drone) CHECK(drone_h.count(u.height_m) == 1);
        if (u.cls == UeClass::IndoorGround) CHECK(indoor_h.count(u.height_m) == 1);
        if (u.cls == UeClass::OutdoorGround) CHECK(u.height_m == 1.5);
    }
    CHECK(counts == class_counts(spec));
}

TEST_CASE("all-drone population") {
    PopulationSpec spec;
    spec.total_ues = 100;
    spec.drone_fraction = 1.0;
    spec.indoor_fraction = 0.0;
    spec.outdoor_fraction = 0.0;
    const auto ues = spawn_population(spec, {-100, -100, 100, 100}, 1);
    for (const auto& u : ues) {
        CHECK(u.cls == UeClass::Drone);
        CHECK(std::set<double>{15, 30, 60, 120, 300}.count(u.height_m) == 1);
    }
}

TEST_CASE("population is deterministic under seed") {
    PopulationSpec spec;
    spec.total_ues = 300;
    const Bounds b{-1000, -1000, 1000, 1000};
    CHECK(spawn_population(spec, b, 11) == spawn_population(spec, b, 11));
    CHECK(spawn_population(spec, b, 11) != spawn_population(spec, b, 12));
}

TEST_CASE("empty height list for a populated class is rejected") {
    PopulationSpec spec;
    spec.total_ues = 10;
    spec.drone_heights_m.clear();
    CHECK_THROWS_AS(spawn_population(spec, {-1, -1, 1, 1}, 1), ConfigError);
}

TEST_CASE("invalid fractions name the field") {
    PopulationSpec spec;
    spec.drone_fraction = 1.5;
    try {
        spec.validate();
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("drone_fraction") != std::string::npos);
    }
}

TEST_CASE("config: empty file gives the reference scenario") {
    const ScenarioConfig c = parse_config("");
    CHECK(c.deployment.site_count == 19);
    CHECK(c.deployment.inter_site_distance_m == 500.0);
    CHECK(c.deployment.bs_tx_power_dbm == 46.0);
    CHECK(c.deployment.carrier_frequency_ghz == 2.0);
    CHECK(c.deployment.bandwidth_mhz == 10.0);
    CHECK(c.population.total_ues == 19000);
    CHECK(c.population.drone_fraction == 0.25);
    CHECK(c.population.indoor_fraction == 0.65);
    CHECK(c.population.outdoor_fraction == 0.10);
    CHECK(c.population.drone_speed_kmh == 120.0);
    CHECK(c.sim.duration_s == 60.0);
    CHECK(c.sim.report_period_s == 0.040);
    CHECK(c.sim.a3_offset_db == 2.0);
    CHECK(c.sim.a3_hysteresis_db == 1.0);
    CHECK(c.sim.ttt_s == 0.160);
}

TEST_CASE("config: single override") {
    const ScenarioConfig c = parse_config("[deployment]\nsite_count = 7\n");
    CHECK(c.deployment.site_count == 7);
    CHECK(c.population.total_ues == 19000);
    CHECK(c.deployment.inter_site_distance_m == 500.0);
}

TEST_CASE("config: errors name the field") {
    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("[population]\ndrone_fraction = 1.5\n").find("drone_fraction") != std::string::npos);
    CHECK(message("[deployment]\nbogus = 1\n").find("deployment.bogus") != std::string::npos);
    CHECK(message("[deployment]\nsite_count = seven\n").find("site_count") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("config: format round-trips") {
    ScenarioConfig c = parse_config("[population]\ntotal_ues = 123\ndrone_heights = 15, 300\n[simulation]\nseed = 9\n");
    const ScenarioConfig back = parse_config(format_config(c));
    CHECK(back.population.total_ues == 123);
    CHECK(back.population.drone_heights_m == std::vector<double>{15.0, 300.0});
    CHECK(back.sim.seed == 9);
    CHECK(format_config(back) == format_config(c));
}

TEST_CASE("population scale") {
    ScenarioConfig c;
    apply_population_scale(c, 0.1);
    CHECK(c.population.total_ues == 1900);
    CHECK_THROWS_AS(apply_population_scale(c, 0.0), ConfigError);
}
