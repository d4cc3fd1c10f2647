#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rdd/features.hpp"

namespace rdd {

struct TrainConfig {
    // Logistic regression: full-batch gradient descent with backtracking.
    double learning_rate = 1.0;  // first trial step
    double l2_lambda = 1e-4;     // on the slopes only, never the intercept
    int max_iters = 10000;
    double grad_tolerance = 1e-6;
    // Decision tree.
    int max_depth = 8;
    int min_leaf = 50;
    std::uint64_t seed = 42;
    unsigned threads = 0;

    void validate() const;
};

struct TrainingInfo {
    bool converged = false;
    int iterations = 0;
    double final_loss = 0.0;
    double final_grad_norm = 0.0;
    std::int64_t samples = 0;
    // UEs seen in training; evaluation refuses to score any of them.
    std::vector<int> train_ues;
    // Objective after each accepted step (logistic regression only; not persisted).
    std::vector<double> loss_history;
};

struct LogisticModel {
    double alpha = 0.0;
    std::vector<double> betas;
    FeatureSubset feature_subset;
    Standardizer standardizer = Standardizer::identity();
    TrainingInfo info;
};

struct TreeNode {
    int feature = -1;  // index in the fixed feature order; -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_probability = 0.0;     // positive fraction among the node's samples
    double node_sample_fraction = 0.0;  // node samples / training samples
    double impurity_decrease = 0.0;     // parent Gini minus weighted child Gini
    std::int64_t samples = 0;

    bool is_leaf() const noexcept { return feature < 0; }
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // preorder, root at 0
    FeatureSubset feature_subset;
    int max_depth = 0;
    int min_leaf = 1;
    TrainingInfo info;
};

using Model = std::variant<LogisticModel, TreeModel>;

// ---- logistic regression ----

double sigmoid(double z) noexcept;
double predict_logistic(const LogisticModel& model, const FeatureVector& x);

// Regularised mean negative log-likelihood over already-standardised samples.
// Parameters are laid out as [alpha, beta_1, ..., beta_n] over the subset.
class LogisticObjective {
public:
    LogisticObjective(std::span<const LabeledSample> standardized, const FeatureSubset& subset,
                      double l2_lambda, unsigned threads = 1);

    std::size_t dimension() const noexcept { return subset_.size() + 1; }
    std::size_t samples() const noexcept { return labels_.size(); }
    double loss(std::span<const double> params) const;
    double loss_and_gradient(std::span<const double> params, std::span<double> gradient) const;

private:
    double evaluate(std::span<const double> params, std::span<double> gradient) const;

    FeatureSubset subset_;
    double lambda_;
    unsigned threads_;
    std::vector<std::vector<double>> columns_;  // one contiguous column per subset feature
    std::vector<double> labels_;
};

LogisticModel train_logistic(std::span<const LabeledSample> train, const FeatureSubset& subset,
                             const TrainConfig& config);

// ---- decision tree ----

// 2 p (1 - p) with p = n_pos / (n_pos + n_neg). Throws on an empty node.
double gini_impurity(std::int64_t n_pos, std::int64_t n_neg);

struct Split {
    Feature feature = Feature::Rssi;
    double threshold = 0.0;
    double weighted_impurity = 0.0;  // sample-weighted child Gini
};

// Exhaustive scan over the subset's features and midpoints between consecutive distinct
// values. Lowest weighted child impurity wins; ties go to the lower feature index, then the
// lower threshold. Returns nothing when no threshold leaves min_leaf samples on both sides.
std::optional<Split> best_split(std::span<const LabeledSample> samples, const FeatureSubset& subset,
                                int min_leaf = 1);

TreeModel train_tree(std::span<const LabeledSample> train, const FeatureSubset& subset,
                     const TrainConfig& config);

// x[feature] <= threshold descends left.
double predict_tree(const TreeModel& model, const FeatureVector& x);

// Gini importance per feature in the fixed order, normalised to sum 1 (all zeros for a
// tree without any impurity decrease).
std::array<double, kFeatureCount> feature_importance(const TreeModel& model);

// ---- any model ----

double predict(const Model& model, const FeatureVector& x);
const FeatureSubset& model_features(const Model& model);
const TrainingInfo& model_info(const Model& model);
std::string model_type(const Model& model);  // "lr" or "dt"

inline constexpr int kModelFormatVersion = 1;

// Versioned JSON document. load_model rejects unknown formats, versions and
// truncated files without returning a partial model.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);

}  // namespace rdd
