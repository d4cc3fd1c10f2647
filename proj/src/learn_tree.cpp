#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rdd/learn.hpp"

namespace rdd {

namespace {

struct ScanResult {
    bool found = false;
    double weighted = std::numeric_limits<double>::infinity();
    double threshold = 0.0;
    std::int64_t n_left = 0;
};

// Threshold strictly below hi and not below lo, so "<= threshold" separates the two.
double midpoint(double lo, double hi) {
    const double m = lo + (hi - lo) * 0.5;
    return m < hi ? m : lo;
}

// values ascending with labels aligned. Weighted child Gini is
// (2/n) * sum_c pos_c * neg_c / n_c.
ScanResult scan_sorted(const double* v, const std::uint8_t* y, std::int64_t n, std::int64_t pos_total,
                       std::int64_t min_leaf) {
    ScanResult best;
    const double scale = 2.0 / static_cast<double>(n);
    std::int64_t pos_left = 0;
    for (std::int64_t i = 0; i + 1 < n; ++i) {
        pos_left += y[i];
        const std::int64_t nl = i + 1;
        const std::int64_t nr = n - nl;
        if (nr < min_leaf) break;
        if (nl < min_leaf || v[i] == v[i + 1]) continue;
        const std::int64_t pr = pos_total - pos_left;
        const double w = scale * (static_cast<double>(pos_left) * static_cast<double>(nl - pos_left) / static_cast<double>(nl) +
                                  static_cast<double>(pr) * static_cast<double>(nr - pr) / static_cast<double>(nr));
        if (w < best.weighted) best = {true, w, midpoint(v[i], v[i + 1]), nl};
    }
    return best;
}

FeatureSubset canonical(const FeatureSubset& subset) {
    FeatureSubset out = subset;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

class TreeBuilder {
public:
    TreeBuilder(std::span<const LabeledSample> train, const FeatureSubset& subset, const TrainConfig& config)
        : subset_(canonical(subset)), max_depth_(config.max_depth), min_leaf_(config.min_leaf) {
        n_ = static_cast<std::int64_t>(train.size());
        labels_.resize(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) labels_[i] = static_cast<std::uint8_t>(train[i].label == 1);
        for (Feature f : subset_) {
            auto& col = values_[static_cast<std::size_t>(f)];
            col.resize(train.size());
            for (std::size_t i = 0; i < train.size(); ++i) col[i] = train[i].features[f];
            auto& ord = order_[static_cast<std::size_t>(f)];
            ord.resize(train.size());
            std::iota(ord.begin(), ord.end(), 0u);
            std::stable_sort(ord.begin(), ord.end(), [&col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
        }
        is_left_.assign(train.size(), 0);
        scratch_v_.resize(train.size());
        scratch_y_.resize(train.size());
        scratch_i_.resize(train.size());
    }

    std::vector<TreeNode> build() {
        build_node(0, n_, 0);
        return std::move(nodes_);
    }

private:
    int build_node(std::int64_t lo, std::int64_t hi, int depth) {
        const std::int64_t n = hi - lo;
        const auto& any_order = order_[static_cast<std::size_t>(subset_.front())];
        std::int64_t pos = 0;
        for (std::int64_t k = lo; k < hi; ++k) pos += labels_[any_order[k]];

        const int idx = static_cast<int>(nodes_.size());
        TreeNode node;
        node.samples = n;
        node.leaf_probability = static_cast<double>(pos) / static_cast<double>(n);
        node.node_sample_fraction = static_cast<double>(n) / static_cast<double>(n_);
        nodes_.push_back(node);

        if (depth >= max_depth_ || pos == 0 || pos == n || n < 2 * static_cast<std::int64_t>(min_leaf_)) return idx;

        ScanResult best;
        Feature best_feature = subset_.front();
        for (Feature f : subset_) {
            const auto fi = static_cast<std::size_t>(f);
            const auto& ord = order_[fi];
            const auto& col = values_[fi];
            for (std::int64_t k = lo; k < hi; ++k) {
                scratch_v_[k - lo] = col[ord[k]];
                scratch_y_[k - lo] = labels_[ord[k]];
            }
            const ScanResult r = scan_sorted(scratch_v_.data(), scratch_y_.data(), n, pos, min_leaf_);
            if (r.found && r.weighted < best.weighted) {
                best = r;
                best_feature = f;
            }
        }
        if (!best.found) return idx;

        const auto bf = static_cast<std::size_t>(best_feature);
        for (std::int64_t k = lo; k < hi; ++k) is_left_[order_[bf][k]] = k < lo + best.n_left ? 1 : 0;
        for (Feature f : subset_) {
            if (f == best_feature) continue;
            auto& ord = order_[static_cast<std::size_t>(f)];
            std::int64_t l = lo;
            std::int64_t r = 0;
            for (std::int64_t k = lo; k < hi; ++k) {
                const std::uint32_t s = ord[k];
                if (is_left_[s]) ord[l++] = s;
                else scratch_i_[r++] = s;
            }
            std::copy(scratch_i_.begin(), scratch_i_.begin() + r, ord.begin() + l);
        }

        const double parent = gini_impurity(pos, n - pos);
        nodes_[idx].feature = static_cast<int>(best_feature);
        nodes_[idx].threshold = best.threshold;
        nodes_[idx].impurity_decrease = std::max(0.0, parent - best.weighted);
        const int left = build_node(lo, lo + best.n_left, depth + 1);
        const int right = build_node(lo + best.n_left, hi, depth + 1);
        nodes_[idx].left = left;
        nodes_[idx].right = right;
        return idx;
    }

    FeatureSubset subset_;
    int max_depth_;
    int min_leaf_;
    std::int64_t n_ = 0;
    std::vector<std::uint8_t> labels_;
    std::array<std::vector<double>, kFeatureCount> values_;
    std::array<std::vector<std::uint32_t>, kFeatureCount> order_;
    std::vector<std::uint8_t> is_left_;
    std::vector<double> scratch_v_;
    std::vector<std::uint8_t> scratch_y_;
    std::vector<std::uint32_t> scratch_i_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

double gini_impurity(std::int64_t n_pos, std::int64_t n_neg) {
    if (n_pos < 0 || n_neg < 0 || n_pos + n_neg < 1) throw Error("gini_impurity: empty node");
    const double p = static_cast<double>(n_pos) / static_cast<double>(n_pos + n_neg);
    return 2.0 * p * (1.0 - p);
}

std::optional<Split> best_split(std::span<const LabeledSample> samples, const FeatureSubset& subset,
                                int min_leaf) {
    const auto n = static_cast<std::int64_t>(samples.size());
    if (n < 2 || subset.empty()) return std::nullopt;
    std::int64_t pos = 0;
    for (const auto& s : samples) pos += s.label == 1;

    std::vector<std::uint32_t> order(samples.size());
    std::vector<double> v(samples.size());
    std::vector<std::uint8_t> y(samples.size());
    std::optional<Split> best;
    for (Feature f : canonical(subset)) {
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return samples[a].features[f] < samples[b].features[f];
        });
        for (std::size_t k = 0; k < order.size(); ++k) {
            v[k] = samples[order[k]].features[f];
            y[k] = static_cast<std::uint8_t>(samples[order[k]].label == 1);
        }
        const ScanResult r = scan_sorted(v.data(), y.data(), n, pos, std::max(1, min_leaf));
        if (r.found && (!best || r.weighted < best->weighted_impurity)) best = Split{f, r.threshold, r.weighted};
    }
    return best;
}

TreeModel train_tree(std::span<const LabeledSample> train, const FeatureSubset& subset,
                     const TrainConfig& config) {
    config.validate();
    if (subset.empty()) throw ConfigError("train_tree: empty feature subset");
    if (train.empty()) throw Error("train_tree: empty training set");
    TreeModel model;
    model.feature_subset = canonical(subset);
    model.max_depth = config.max_depth;
    model.min_leaf = config.min_leaf;
    model.nodes = TreeBuilder(train, model.feature_subset, config).build();
    model.info.converged = true;
    model.info.samples = static_cast<std::int64_t>(train.size());
    return model;
}

double predict_tree(const TreeModel& model, const FeatureVector& x) {
    if (model.nodes.empty()) throw Error("predict_tree: empty tree");
    std::size_t idx = 0;
    while (!model.nodes[idx].is_leaf()) {
        const TreeNode& node = model.nodes[idx];
        const double v = x.values[static_cast<std::size_t>(node.feature)];
        if (!std::isfinite(v))
            throw Error("predict_tree: feature '" +
                        std::string(feature_name(static_cast<Feature>(node.feature))) + "' is missing");
        idx = static_cast<std::size_t>(v <= node.threshold ? node.left : node.right);
    }
    return model.nodes[idx].leaf_probability;
}

std::array<double, kFeatureCount> feature_importance(const TreeModel& model) {
    std::array<double, kFeatureCount> imp{};
    for (const auto& node : model.nodes)
        if (!node.is_leaf()) imp[static_cast<std::size_t>(node.feature)] += node.node_sample_fraction * node.impurity_decrease;
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (total > 0.0)
        for (double& v : imp) v /= total;
    return imp;
}

}  // namespace rdd
