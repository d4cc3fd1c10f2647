#include "rdd/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "rdd/csv.hpp"
#include "rdd/rng.hpp"

namespace rdd {

std::string_view feature_name(Feature f) noexcept {
    switch (f) {
        case Feature::Rssi: return "rssi";
        case Feature::RsrpStd: return "rsrp_std";
        case Feature::RsrpGap: return "rsrp_gap";
        case Feature::ServingRsrp: return "serving_rsrp";
    }
    return "unknown";
}

Feature parse_feature(std::string_view name) {
    for (Feature f : kAllFeatures)
        if (feature_name(f) == name) return f;
    throw ConfigError("unknown feature '" + std::string(name) + "'");
}

FeatureSubset parse_feature_subset(std::string_view spec) {
    if (spec == "all") return FeatureSubset(kAllFeatures.begin(), kAllFeatures.end());
    std::array<bool, kFeatureCount> seen{};
    std::size_t start = 0;
    while (start <= spec.size()) {
        auto comma = spec.find(',', start);
        if (comma == std::string_view::npos) comma = spec.size();
        const auto name = spec.substr(start, comma - start);
        const Feature f = parse_feature(name);
        auto& flag = seen[static_cast<std::size_t>(f)];
        if (flag) throw ConfigError("feature '" + std::string(name) + "' listed twice");
        flag = true;
        start = comma + 1;
    }
    FeatureSubset out;
    for (Feature f : kAllFeatures)
        if (seen[static_cast<std::size_t>(f)]) out.push_back(f);
    return out;
}

std::string format_feature_subset(const FeatureSubset& subset) {
    std::string out;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (i) out += ',';
        out += feature_name(subset[i]);
    }
    return out;
}

ExtractedFeatures extract_features(const MeasurementReport& report) {
    const auto& cells = report.cell_rsrps;
    if (cells.size() < 2)
        throw Error("extract_features: report for UE " + std::to_string(report.ue_id) +
                    " lists fewer than two cells");
    const std::size_t n = std::min<std::size_t>(cells.size(), kStrongestCells);

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += cells[i].rsrp_dbm;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = cells[i].rsrp_dbm - mean;
        ss += d * d;
    }

    ExtractedFeatures out;
    out.partial = n < static_cast<std::size_t>(kStrongestCells);
    out.features[Feature::Rssi] = report.rssi_dbm;
    out.features[Feature::RsrpStd] = std::sqrt(ss / static_cast<double>(n));
    out.features[Feature::RsrpGap] = cells[0].rsrp_dbm - cells[1].rsrp_dbm;
    out.features[Feature::ServingRsrp] = report.serving_rsrp_dbm;
    return out;
}

LabeledSample make_sample(const MeasurementReport& report) {
    LabeledSample s;
    s.features = extract_features(report).features;
    s.label = report.true_class == UeClass::Drone ? 1 : 0;
    s.ue_id = report.ue_id;
    s.t_s = report.t_s;
    s.true_height_m = report.true_height_m;
    return s;
}

DatasetSplit split_by_ue(std::span<const LabeledSample> samples, double train_fraction,
                         std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train_fraction: must lie strictly between 0 and 1");

    std::map<int, int> label_of;
    for (const auto& s : samples) {
        const auto [it, inserted] = label_of.emplace(s.ue_id, s.label);
        if (!inserted && it->second != s.label)
            throw Error("split_by_ue: UE " + std::to_string(s.ue_id) + " has inconsistent labels");
    }
    std::array<std::vector<int>, 2> by_label;
    for (const auto& [ue, label] : label_of) by_label[label == 1 ? 1 : 0].push_back(ue);

    Rng rng = make_rng(seed, Stream::Split);
    std::unordered_set<int> train_set;
    DatasetSplit out;
    for (int label = 0; label < 2; ++label) {
        auto& ues = by_label[label];
        if (ues.size() < 2)
            throw Error(std::string("split_by_ue: class '") + (label ? "drone" : "ground") +
                        "' has fewer than 2 UEs");
        std::shuffle(ues.begin(), ues.end(), rng);
        const auto n = static_cast<double>(ues.size());
        auto n_train = static_cast<std::size_t>(std::floor(n * train_fraction + 0.5));
        n_train = std::clamp<std::size_t>(n_train, 1, ues.size() - 1);
        for (std::size_t i = 0; i < ues.size(); ++i) {
            if (i < n_train) {
                train_set.insert(ues[i]);
                out.train_ues.push_back(ues[i]);
            } else {
                out.test_ues.push_back(ues[i]);
            }
        }
    }
    std::sort(out.train_ues.begin(), out.train_ues.end());
    std::sort(out.test_ues.begin(), out.test_ues.end());
    for (const auto& s : samples) (train_set.count(s.ue_id) ? out.train : out.test).push_back(s);
    return out;
}

Standardizer Standardizer::identity() {
    Standardizer s;
    s.mean.fill(0.0);
    s.stddev.fill(1.0);
    return s;
}

FeatureVector Standardizer::apply(const FeatureVector& v) const {
    FeatureVector out;
    for (std::size_t i = 0; i < kFeatureCount; ++i) out.values[i] = (v.values[i] - mean[i]) / stddev[i];
    return out;
}

Standardizer fit_standardizer(std::span<const LabeledSample> train, const FeatureSubset& subset) {
    if (train.empty()) throw Error("fit_standardizer: empty training set");
    Standardizer s = Standardizer::identity();
    const auto n = static_cast<double>(train.size());
    for (Feature f : subset) {
        const auto i = static_cast<std::size_t>(f);
        double mean = 0.0;
        for (const auto& x : train) mean += x.features.values[i];
        mean /= n;
        double ss = 0.0;
        for (const auto& x : train) {
            const double d = x.features.values[i] - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / n);
        if (!(sd > 0.0) || !std::isfinite(sd))
            throw Error("fit_standardizer: feature '" + std::string(feature_name(f)) +
                        "' has zero variance");
        s.mean[i] = mean;
        s.stddev[i] = sd;
    }
    return s;
}

std::vector<LabeledSample> apply_standardizer(const Standardizer& s,
                                              std::span<const LabeledSample> samples) {
    std::vector<LabeledSample> out(samples.begin(), samples.end());
    for (auto& x : out) x.features = s.apply(x.features);
    return out;
}

void write_dataset(const std::string& path, std::span<const LabeledSample> samples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open dataset file for writing");
    out << "ue_id,t_s,label,true_height_m,rssi,rsrp_std,rsrp_gap,serving_rsrp\n";
    std::string buf;
    buf.reserve(1 << 20);
    for (const auto& s : samples) {
        csv::append_int(buf, s.ue_id);
        buf += ',';
        csv::append_fixed(buf, s.t_s, 3);
        buf += ',';
        csv::append_int(buf, s.label);
        buf += ',';
        csv::append_exact(buf, s.true_height_m);
        for (double v : s.features.values) {
            buf += ',';
            csv::append_exact(buf, v);
        }
        buf += '\n';
        if (buf.size() > (1u << 20)) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.close();
    if (out.fail()) throw IoError(path, "write failed");
}

std::vector<LabeledSample> read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open dataset file");
    std::string line;
    if (!std::getline(in, line) || line.rfind("ue_id,t_s,label,true_height_m,rssi", 0) != 0)
        throw IoError(path, "unrecognised dataset header");
    std::vector<LabeledSample> out;
    std::vector<std::string_view> f;
    std::int64_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        csv::split(line, f);
        if (f.size() != 8) throw IoError(path, "line " + std::to_string(lineno) + ": expected 8 columns");
        try {
            LabeledSample s;
            s.ue_id = csv::parse<int>(f[0], "ue_id");
            s.t_s = csv::parse<double>(f[1], "t_s");
            s.label = csv::parse<int>(f[2], "label");
            if (s.label != 0 && s.label != 1) throw Error("label must be 0 or 1");
            s.true_height_m = csv::parse<double>(f[3], "true_height_m");
            for (std::size_t k = 0; k < kFeatureCount; ++k)
                s.features.values[k] = csv::parse<double>(f[4 + k], "feature");
            out.push_back(s);
        } catch (const IoError&) {
            throw;
        } catch (const Error& e) {
            throw IoError(path, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace rdd
