#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rdd/simulator.hpp"

namespace rdd {

// Fixed feature order. Every subset and every stored index refers to it.
enum class Feature : std::uint8_t { Rssi = 0, RsrpStd = 1, RsrpGap = 2, ServingRsrp = 3 };

inline constexpr std::size_t kFeatureCount = 4;
inline constexpr std::array<Feature, kFeatureCount> kAllFeatures{
    Feature::Rssi, Feature::RsrpStd, Feature::RsrpGap, Feature::ServingRsrp};

std::string_view feature_name(Feature f) noexcept;
Feature parse_feature(std::string_view name);

using FeatureSubset = std::vector<Feature>;

// "all" or a comma list such as "rssi,rsrp_std". Duplicates are rejected and the
// result is kept in canonical order.
FeatureSubset parse_feature_subset(std::string_view spec);
std::string format_feature_subset(const FeatureSubset& subset);

struct FeatureVector {
    std::array<double, kFeatureCount> values{};

    double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
    double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
    double rssi() const { return (*this)[Feature::Rssi]; }
    double rsrp_std() const { return (*this)[Feature::RsrpStd]; }
    double rsrp_gap() const { return (*this)[Feature::RsrpGap]; }
    double serving_rsrp() const { return (*this)[Feature::ServingRsrp]; }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct ExtractedFeatures {
    FeatureVector features;
    // True when fewer than eight cells were available for the RSRP spread.
    bool partial = false;
};

inline constexpr int kStrongestCells = 8;

// rsrp_std: population standard deviation (dB) of the eight strongest RSRPs.
// rsrp_gap: strongest minus second strongest. Throws if fewer than two cells are listed.
ExtractedFeatures extract_features(const MeasurementReport& report);

struct LabeledSample {
    FeatureVector features;
    int label = 0;  // 1 drone, 0 ground
    int ue_id = 0;
    double t_s = 0.0;
    double true_height_m = 0.0;
};

LabeledSample make_sample(const MeasurementReport& report);

struct DatasetSplit {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
    std::vector<int> train_ues;
    std::vector<int> test_ues;
};

// Partitions at UE granularity, stratified by label. Sample order within each side
// follows the input order.
DatasetSplit split_by_ue(std::span<const LabeledSample> samples, double train_fraction,
                         std::uint64_t seed);

struct Standardizer {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> stddev{};

    static Standardizer identity();
    double apply(Feature f, double x) const {
        const auto i = static_cast<std::size_t>(f);
        return (x - mean[i]) / stddev[i];
    }
    FeatureVector apply(const FeatureVector& v) const;
};

// Population mean and standard deviation per feature of the given subset; features
// outside the subset keep the identity transform. Throws naming any zero-variance feature.
Standardizer fit_standardizer(std::span<const LabeledSample> train, const FeatureSubset& subset);
std::vector<LabeledSample> apply_standardizer(const Standardizer& s,
                                              std::span<const LabeledSample> samples);

// Dataset CSV: ue_id,t_s,label,true_height_m,rssi,rsrp_std,rsrp_gap,serving_rsrp
void write_dataset(const std::string& path, std::span<const LabeledSample> samples);
std::vector<LabeledSample> read_dataset(const std::string& path);

}  // namespace rdd
