#include "rdd/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace rdd {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& field, const std::string& raw) {
    const std::string s = trim(raw);
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ConfigError(field + ": cannot parse '" + raw + "' as a number");
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) throw ConfigError(field + ": must be finite");
    }
    return value;
}

std::vector<double> parse_list(const std::string& field, const std::string& raw) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_number<double>(field, item));
    }
    return out;
}

using Setter = std::function<void(ScenarioConfig&, const std::string&)>;
using SectionTable = std::map<std::string, Setter>;

template <class T, class M>
Setter num(std::string field, M member) {
    return [field, member](ScenarioConfig& c, const std::string& v) {
        std::invoke(member, c) = parse_number<T>(field, v);
    };
}

const std::map<std::string, SectionTable>& schema() {
    static const std::map<std::string, SectionTable> table = [] {
        std::map<std::string, SectionTable> t;
        auto& d = t["deployment"];
        d["site_count"] = num<int>("site_count", [](ScenarioConfig& c) -> int& { return c.deployment.site_count; });
        d["inter_site_distance"] = num<double>("inter_site_distance", [](ScenarioConfig& c) -> double& { return c.deployment.inter_site_distance_m; });
        d["bs_height"] = num<double>("bs_height", [](ScenarioConfig& c) -> double& { return c.deployment.bs_height_m; });
        d["bs_tx_power"] = num<double>("bs_tx_power", [](ScenarioConfig& c) -> double& { return c.deployment.bs_tx_power_dbm; });
        d["carrier_frequency"] = num<double>("carrier_frequency", [](ScenarioConfig& c) -> double& { return c.deployment.carrier_frequency_ghz; });
        d["bandwidth"] = num<double>("bandwidth", [](ScenarioConfig& c) -> double& { return c.deployment.bandwidth_mhz; });
        d["sectors_per_site"] = num<int>("sectors_per_site", [](ScenarioConfig& c) -> int& { return c.deployment.sectors_per_site; });
        d["seed"] = num<std::uint64_t>("deployment.seed", [](ScenarioConfig& c) -> std::uint64_t& { return c.deployment.seed; });

        auto& p = t["population"];
        p["total_ues"] = num<int>("total_ues", [](ScenarioConfig& c) -> int& { return c.population.total_ues; });
        p["drone_fraction"] = num<double>("drone_fraction", [](ScenarioConfig& c) -> double& { return c.population.drone_fraction; });
        p["indoor_fraction"] = num<double>("indoor_fraction", [](ScenarioConfig& c) -> double& { return c.population.indoor_fraction; });
        p["outdoor_fraction"] = num<double>("outdoor_fraction", [](ScenarioConfig& c) -> double& { return c.population.outdoor_fraction; });
        p["drone_heights"] = [](ScenarioConfig& c, const std::string& v) { c.population.drone_heights_m = parse_list("drone_heights", v); };
        p["indoor_heights"] = [](ScenarioConfig& c, const std::string& v) { c.population.indoor_heights_m = parse_list("indoor_heights", v); };
        p["outdoor_height"] = num<double>("outdoor_height", [](ScenarioConfig& c) -> double& { return c.population.outdoor_height_m; });
        p["drone_speed"] = num<double>("drone_speed", [](ScenarioConfig& c) -> double& { return c.population.drone_speed_kmh; });
        p["outdoor_speed"] = num<double>("outdoor_speed", [](ScenarioConfig& c) -> double& { return c.population.outdoor_speed_kmh; });
        p["indoor_speed"] = num<double>("indoor_speed", [](ScenarioConfig& c) -> double& { return c.population.indoor_speed_kmh; });

        auto& s = t["simulation"];
        s["duration"] = num<double>("duration", [](ScenarioConfig& c) -> double& { return c.sim.duration_s; });
        s["report_period"] = num<double>("report_period", [](ScenarioConfig& c) -> double& { return c.sim.report_period_s; });
        s["a3_offset"] = num<double>("a3_offset", [](ScenarioConfig& c) -> double& { return c.sim.a3_offset_db; });
        s["a3_hysteresis"] = num<double>("a3_hysteresis", [](ScenarioConfig& c) -> double& { return c.sim.a3_hysteresis_db; });
        s["ttt"] = num<double>("ttt", [](ScenarioConfig& c) -> double& { return c.sim.ttt_s; });
        s["max_reported_cells"] = num<int>("max_reported_cells", [](ScenarioConfig& c) -> int& { return c.sim.max_reported_cells; });
        s["seed"] = num<std::uint64_t>("simulation.seed", [](ScenarioConfig& c) -> std::uint64_t& { return c.sim.seed; });

        auto& ch = t["channel"];
        ch["noise_figure"] = num<double>("noise_figure", [](ScenarioConfig& c) -> double& { return c.channel.noise_figure_db; });
        ch["thermal_noise_density"] = num<double>("thermal_noise_density", [](ScenarioConfig& c) -> double& { return c.channel.thermal_noise_density_dbm_hz; });
        ch["shadow_decorrelation_distance"] = num<double>("shadow_decorrelation_distance", [](ScenarioConfig& c) -> double& { return c.channel.shadow_decorrelation_m; });
        ch["indoor_penetration_loss"] = num<double>("indoor_penetration_loss", [](ScenarioConfig& c) -> double& { return c.channel.indoor_penetration_loss_db; });
        ch["resource_elements_per_band"] = num<int>("resource_elements_per_band", [](ScenarioConfig& c) -> int& { return c.channel.resource_elements; });
        ch["antenna_max_gain"] = num<double>("antenna_max_gain", [](ScenarioConfig& c) -> double& { return c.channel.antenna_max_gain_dbi; });
        ch["horizontal_3db_beamwidth"] = num<double>("horizontal_3db_beamwidth", [](ScenarioConfig& c) -> double& { return c.channel.horizontal_beamwidth_deg; });
        ch["vertical_3db_beamwidth"] = num<double>("vertical_3db_beamwidth", [](ScenarioConfig& c) -> double& { return c.channel.vertical_beamwidth_deg; });
        ch["front_back_ratio"] = num<double>("front_back_ratio", [](ScenarioConfig& c) -> double& { return c.channel.front_back_ratio_db; });
        ch["downtilt"] = num<double>("downtilt", [](ScenarioConfig& c) -> double& { return c.channel.downtilt_deg; });
        return t;
    }();
    return table;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
    return out;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
    }

    ScenarioConfig config;
    const auto& table = schema();
    for (const auto& [section, body] : tree) {
        const auto sec = table.find(section);
        if (sec == table.end()) {
            if (body.empty()) throw ConfigError(section + ": key outside of any section");
            throw ConfigError(section + ": unknown section");
        }
        for (const auto& [key, value] : body) {
            const auto setter = sec->second.find(key);
            if (setter == sec->second.end()) throw ConfigError(section + "." + key + ": unknown key");
            setter->second(config, value.get_value<std::string>());
        }
    }
    config.validate();
    return config;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_config(const ScenarioConfig& c) {
    std::ostringstream os;
    os << "[deployment]\n"
       << "site_count=" << c.deployment.site_count << "\n"
       << "inter_site_distance=" << fmt(c.deployment.inter_site_distance_m) << "\n"
       << "bs_height=" << fmt(c.deployment.bs_height_m) << "\n"
       << "bs_tx_power=" << fmt(c.deployment.bs_tx_power_dbm) << "\n"
       << "carrier_frequency=" << fmt(c.deployment.carrier_frequency_ghz) << "\n"
       << "bandwidth=" << fmt(c.deployment.bandwidth_mhz) << "\n"
       << "sectors_per_site=" << c.deployment.sectors_per_site << "\n"
       << "seed=" << c.deployment.seed << "\n\n"
       << "[population]\n"
       << "total_ues=" << c.population.total_ues << "\n"
       << "drone_fraction=" << fmt(c.population.drone_fraction) << "\n"
       << "indoor_fraction=" << fmt(c.population.indoor_fraction) << "\n"
       << "outdoor_fraction=" << fmt(c.population.outdoor_fraction) << "\n"
       << "drone_heights=" << fmt_list(c.population.drone_heights_m) << "\n"
       << "indoor_heights=" << fmt_list(c.population.indoor_heights_m) << "\n"
       << "outdoor_height=" << fmt(c.population.outdoor_height_m) << "\n"
       << "drone_speed=" << fmt(c.population.drone_speed_kmh) << "\n"
       << "outdoor_speed=" << fmt(c.population.outdoor_speed_kmh) << "\n"
       << "indoor_speed=" << fmt(c.population.indoor_speed_kmh) << "\n\n"
       << "[simulation]\n"
       << "duration=" << fmt(c.sim.duration_s) << "\n"
       << "report_period=" << fmt(c.sim.report_period_s) << "\n"
       << "a3_offset=" << fmt(c.sim.a3_offset_db) << "\n"
       << "a3_hysteresis=" << fmt(c.sim.a3_hysteresis_db) << "\n"
       << "ttt=" << fmt(c.sim.ttt_s) << "\n"
       << "max_reported_cells=" << c.sim.max_reported_cells << "\n"
       << "seed=" << c.sim.seed << "\n\n"
       << "[channel]\n"
       << "noise_figure=" << fmt(c.channel.noise_figure_db) << "\n"
       << "thermal_noise_density=" << fmt(c.channel.thermal_noise_density_dbm_hz) << "\n"
       << "shadow_decorrelation_distance=" << fmt(c.channel.shadow_decorrelation_m) << "\n"
       << "indoor_penetration_loss=" << fmt(c.channel.indoor_penetration_loss_db) << "\n"
       << "resource_elements_per_band=" << c.channel.resource_elements << "\n"
       << "antenna_max_gain=" << fmt(c.channel.antenna_max_gain_dbi) << "\n"
       << "horizontal_3db_beamwidth=" << fmt(c.channel.horizontal_beamwidth_deg) << "\n"
       << "vertical_3db_beamwidth=" << fmt(c.channel.vertical_beamwidth_deg) << "\n"
       << "front_back_ratio=" << fmt(c.channel.front_back_ratio_db) << "\n"
       << "downtilt=" << fmt(c.channel.downtilt_deg) << "\n";
    return os.str();
}

void apply_population_scale(ScenarioConfig& config, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw ConfigError("scale: must be positive");
    const double scaled = std::round(config.population.total_ues * factor);
    config.population.total_ues = std::max(1, static_cast<int>(scaled));
}

}  // namespace rdd
