#include "rdd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "rdd/rng.hpp"

namespace rdd {

namespace {

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ConfigError(field + ": " + why);
}

}  // namespace

void DeploymentConfig::validate() const {
    require(site_count == 1 || site_count == 7 || site_count == 19, "site_count",
            "must be 1, 7 or 19 (got " + std::to_string(site_count) + ")");
    require(sectors_per_site == 3, "sectors_per_site", "only 3 sectors per site are supported");
    require(inter_site_distance_m > 0.0, "inter_site_distance", "must be positive");
    require(bandwidth_mhz > 0.0, "bandwidth", "must be positive");
    require(carrier_frequency_ghz > 0.0, "carrier_frequency", "must be positive");
    require(bs_height_m > 0.0, "bs_height", "must be positive");
}

void PopulationSpec::validate() const {
    require(total_ues >= 1, "total_ues", "must be at least 1");
    for (auto [name, f] : {std::pair{"drone_fraction", drone_fraction},
                           std::pair{"indoor_fraction", indoor_fraction},
                           std::pair{"outdoor_fraction", outdoor_fraction}}) {
        require(std::isfinite(f) && f >= 0.0 && f <= 1.0, name, "must lie in [0, 1]");
    }
    require(std::abs(drone_fraction + indoor_fraction + outdoor_fraction - 1.0) <= 1e-9,
            "drone_fraction", "class fractions must sum to 1");
    auto heights_ok = [](const std::vector<double>& hs) {
        return std::all_of(hs.begin(), hs.end(), [](double h) { return std::isfinite(h) && h >= 0.0; });
    };
    require(heights_ok(drone_heights_m), "drone_heights", "heights must be >= 0");
    require(heights_ok(indoor_heights_m), "indoor_heights", "heights must be >= 0");
    require(outdoor_height_m >= 0.0, "outdoor_height", "must be >= 0");
    require(drone_speed_kmh >= 0.0, "drone_speed", "must be >= 0");
    require(outdoor_speed_kmh >= 0.0, "outdoor_speed", "must be >= 0");
    require(indoor_speed_kmh >= 0.0, "indoor_speed", "must be >= 0");
}

std::vector<Point2> hex_site_positions(int site_count, double isd) {
    const int rings = site_count == 1 ? 0 : site_count == 7 ? 1 : site_count == 19 ? 2 : -1;
    if (rings < 0) throw ConfigError("site_count: must be 1, 7 or 19");

    struct Site {
        int ring;
        double angle;
        Point2 p;
    };
    std::vector<Site> sites;
    const double s3 = std::sqrt(3.0);
    for (int q = -rings; q <= rings; ++q) {
        for (int r = -rings; r <= rings; ++r) {
            const int ring = (std::abs(q) + std::abs(r) + std::abs(q + r)) / 2;
            if (ring > rings) continue;
            Point2 p{isd * (q + 0.5 * r), isd * (0.5 * s3 * r)};
            double a = std::atan2(p.y, p.x);
            if (a < -1e-12) a += 2.0 * kPi;
            sites.push_back({ring, ring == 0 ? 0.0 : a, p});
        }
    }
    std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
        if (a.ring != b.ring) return a.ring < b.ring;
        return a.angle < b.angle;
    });
    std::vector<Point2> out;
    out.reserve(sites.size());
    for (const auto& s : sites) out.push_back(s.p);
    return out;
}

std::vector<CellSector> build_hex_grid(const DeploymentConfig& config, double downtilt_deg) {
    config.validate();
    const auto sites = hex_site_positions(config.site_count, config.inter_site_distance_m);
    std::vector<CellSector> cells;
    cells.reserve(sites.size() * 3);
    for (std::size_t s = 0; s < sites.size(); ++s) {
        for (int k = 0; k < config.sectors_per_site; ++k) {
            CellSector c;
            c.cell_id = static_cast<int>(cells.size());
            c.site_id = static_cast<int>(s);
            c.site_position = sites[s];
            c.azimuth_deg = 120.0 * k;
            c.downtilt_deg = downtilt_deg;
            c.height_m = config.bs_height_m;
            c.tx_power_dbm = config.bs_tx_power_dbm;
            cells.push_back(c);
        }
    }
    return cells;
}

Bounds deployment_bounds(std::span<const CellSector> cells, double isd) {
    if (cells.empty()) throw ConfigError("deployment has no cells");
    Bounds b{cells[0].site_position.x, cells[0].site_position.y, cells[0].site_position.x,
             cells[0].site_position.y};
    for (const auto& c : cells) {
        b.min_x = std::min(b.min_x, c.site_position.x);
        b.min_y = std::min(b.min_y, c.site_position.y);
        b.max_x = std::max(b.max_x, c.site_position.x);
        b.max_y = std::max(b.max_y, c.site_position.y);
    }
    b.min_x -= isd;
    b.min_y -= isd;
    b.max_x += isd;
    b.max_y += isd;
    return b;
}

std::array<int, kUeClassCount> class_counts(const PopulationSpec& spec) {
    const std::array<double, kUeClassCount> fractions{spec.drone_fraction, spec.indoor_fraction,
                                                      spec.outdoor_fraction};
    std::array<int, kUeClassCount> counts{};
    std::array<double, kUeClassCount> remainders{};
    int assigned = 0;
    for (int i = 0; i < kUeClassCount; ++i) {
        const double quota = fractions[i] * spec.total_ues;
        // Absorb representation error so 0.65 * 19000 is exactly 12350.
        const double whole = std::floor(quota + 1e-9);
        counts[i] = static_cast<int>(whole);
        remainders[i] = std::max(0.0, quota - whole);
        assigned += counts[i];
    }
    std::array<int, kUeClassCount> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainders[a] > remainders[b]; });
    for (int k = 0; assigned < spec.total_ues; k = (k + 1) % kUeClassCount) {
        ++counts[order[k]];
        ++assigned;
    }
    return counts;
}

std::vector<Ue> spawn_population(const PopulationSpec& spec, const Bounds& bounds,
                                 std::uint64_t rng_seed) {
    spec.validate();
    const auto counts = class_counts(spec);
    if (counts[0] > 0 && spec.drone_heights_m.empty())
        throw ConfigError("drone_heights: empty height list for a non-empty drone class");
    if (counts[1] > 0 && spec.indoor_heights_m.empty())
        throw ConfigError("indoor_heights: empty height list for a non-empty indoor class");

    std::vector<UeClass> classes;
    classes.reserve(spec.total_ues);
    for (int i = 0; i < kUeClassCount; ++i)
        classes.insert(classes.end(), counts[i], static_cast<UeClass>(i));

    Rng rng = make_rng(rng_seed, Stream::Population);
    std::shuffle(classes.begin(), classes.end(), rng);

    std::uniform_real_distribution<double> ux(bounds.min_x, bounds.max_x);
    std::uniform_real_distribution<double> uy(bounds.min_y, bounds.max_y);
    std::uniform_real_distribution<double> uh(0.0, 2.0 * kPi);

    auto pick = [&rng](const std::vector<double>& hs) {
        std::uniform_int_distribution<std::size_t> idx(0, hs.size() - 1);
        return hs[idx(rng)];
    };

    std::vector<Ue> ues;
    ues.reserve(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) {
        Ue ue;
        ue.ue_id = static_cast<int>(i);
        ue.cls = classes[i];
        ue.position = {ux(rng), uy(rng)};
        ue.heading_rad = uh(rng);
        switch (ue.cls) {
            case UeClass::Drone:
                ue.height_m = pick(spec.drone_heights_m);
                ue.speed_kmh = spec.drone_speed_kmh;
                break;
            case UeClass::IndoorGround:
                ue.height_m = pick(spec.indoor_heights_m);
                ue.speed_kmh = spec.indoor_speed_kmh;
                ue.indoor = true;
                break;
            case UeClass::OutdoorGround:
                ue.height_m = spec.outdoor_height_m;
                ue.speed_kmh = spec.outdoor_speed_kmh;
                break;
        }
        ues.push_back(ue);
    }
    return ues;
}

}  // namespace rdd
