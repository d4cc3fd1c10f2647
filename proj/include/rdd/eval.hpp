#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rdd/features.hpp"

namespace rdd {

struct ScoredUe {
    int ue_id = 0;
    int label = 0;  // 1 drone
    double score = 0.0;
    double true_height_m = 0.0;
};

// Mann-Whitney statistic via midranks. Throws unless both classes are present.
double roc_auc(std::span<const ScoredUe> scored);
// Trapezoidal area under the empirical ROC curve; ties form diagonal segments.
double roc_auc_trapezoid(std::span<const ScoredUe> scored);

struct ZeroFprResult {
    double threshold = 0.0;  // maximum negative score
    double tpr = 0.0;        // positives strictly above threshold
    std::int64_t false_positives = 0;
};

// Throws unless both classes are present; the returned threshold admits no negatives.
ZeroFprResult tpr_at_zero_fpr(std::span<const ScoredUe> scored);

// Fraction of drones per configured height with score > threshold. Heights without
// drones are omitted.
std::map<double, double> per_altitude_detection(std::span<const ScoredUe> scored, double threshold,
                                                std::span<const double> heights);

// Per-report probabilities of one UE in time order.
struct UeProbabilities {
    int ue_id = 0;
    int label = 0;
    double true_height_m = 0.0;
    std::vector<double> t_s;
    std::vector<double> p;
};

// Groups scored samples per UE, ordered by time.
std::vector<UeProbabilities> group_probabilities(std::span<const LabeledSample> samples,
                                                 std::span<const double> probabilities);

// Running-mean score of each UE over its first n reports (all reports if it has fewer).
std::vector<ScoredUe> scores_after(std::span<const UeProbabilities> ues, std::int64_t n);

struct CurvePoint {
    double t_s = 0.0;
    double auc = 0.0;
    double tpr_fpr0 = 0.0;
};

// For each instant T, every UE is scored on its first floor(T / report_period) reports.
std::vector<CurvePoint> detection_vs_time(std::span<const UeProbabilities> ues, std::span<const double> instants_s,
                                          double report_period_s, unsigned threads = 1);

std::vector<double> default_eval_instants();  // 1, 2, ..., 60 s

struct EvalReport {
    std::string model_type;
    std::string feature_subset;
    double eval_time_s = 0.0;
    std::int64_t ues = 0;
    std::int64_t drones = 0;
    double auc = 0.0;
    double auc_trapezoid = 0.0;
    ZeroFprResult zero_fpr;
    std::map<double, double> per_altitude;
    std::vector<CurvePoint> curve;
    std::array<double, kFeatureCount> importance{};  // decision trees only
    bool has_importance = false;
};

void write_eval_json(const std::string& path, const EvalReport& report);
void write_curve_csv(const std::string& path, std::span<const CurvePoint> curve);
void write_altitude_csv(const std::string& path, const std::map<double, double>& per_altitude);

}  // namespace rdd
