#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "rdd/learn.hpp"

using namespace rdd;

namespace {

LabeledSample sample(double rssi, double rsrp_std, int label, int ue = 0) {
    LabeledSample s;
    s.features.values = {rssi, rsrp_std, 0.0, 0.0};
    s.label = label;
    s.ue_id = ue;
    return s;
}

// Two overlapping Gaussian classes over all four features.
std::vector<LabeledSample> gaussian_classes(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<LabeledSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = out[i];
        s.label = i % 3 == 0;
        s.ue_id = static_cast<int>(i);
        const double shift = s.label ? 1.0 : 0.0;
        s.features.values = {-70.0 + 5.0 * (g(rng) + shift), 4.0 + 2.0 * (g(rng) - shift), 3.0 * g(rng),
                             -80.0 + 7.0 * g(rng)};
    }
    return out;
}

const FeatureSubset kAll(kAllFeatures.begin(), kAllFeatures.end());

}  // namespace

TEST_CASE("sigmoid") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
    for (double z : {-30.0, -2.5, -0.1, 0.7, 12.0}) {
        CHECK(sigmoid(z) + sigmoid(-z) == doctest::Approx(1.0).epsilon(1e-15));
        const double p = sigmoid(z);
        CHECK(std::log(p / (1.0 - p)) == doctest::Approx(z).epsilon(1e-9));
    }
    CHECK(sigmoid(-1000.0) == 0.0);
    CHECK(sigmoid(1000.0) == 1.0);
}

TEST_CASE("logistic prediction is the sigmoid of the standardised margin") {
    LogisticModel m;
    m.feature_subset = {Feature::Rssi, Feature::RsrpStd};
    m.alpha = -0.5;
    m.betas = {0.25, -1.5};
    m.standardizer.mean = {-70.0, 5.0, 0.0, 0.0};
    m.standardizer.stddev = {10.0, 2.0, 1.0, 1.0};
    FeatureVector x;
    x.values = {-60.0, 2.0, 99.0, 99.0};
    // z = -0.5 + 0.25*1 - 1.5*(-1.5) = 2.0
    CHECK(predict_logistic(m, x) == doctest::Approx(sigmoid(2.0)).epsilon(1e-15));
    x.values[0] = std::nan("");
    CHECK_THROWS_AS(predict_logistic(m, x), Error);
}

TEST_CASE("separable two-point set drives the slope up and the loss down") {
    const std::vector<LabeledSample> train{sample(-1.0, 0.0, 0), sample(1.0, 0.0, 1)};
    TrainConfig cfg;
    cfg.l2_lambda = 0.0;
    cfg.max_iters = 200;
    const auto m = train_logistic(train, {Feature::Rssi}, cfg);
    CHECK(m.betas[0] > 3.0);
    CHECK(std::abs(m.alpha) < 1e-9);
    CHECK(m.info.final_loss < 0.05);
    CHECK(predict_logistic(m, train[1].features) > 0.95);
}

TEST_CASE("balanced classes with an uninformative feature give p = 0.5") {
    std::vector<LabeledSample> train;
    for (int i = 0; i < 10; ++i) {
        train.push_back(sample(i, 0.0, 0));
        train.push_back(sample(i, 0.0, 1));
    }
    const auto m = train_logistic(train, {Feature::Rssi}, TrainConfig{});
    CHECK(m.info.converged);
    CHECK(std::abs(m.alpha) < 1e-6);
    CHECK(std::abs(m.betas[0]) < 1e-6);
    CHECK(predict_logistic(m, train[3].features) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("intercept matches the log-odds of the prior") {
    std::vector<LabeledSample> train;
    for (int i = 0; i < 40; ++i) train.push_back(sample(i % 2 ? 1.0 : -1.0, 0.0, i % 8 < 2));
    // The feature is independent of the label; p = 1/4 in both halves.
    const auto m = train_logistic(train, {Feature::Rssi}, TrainConfig{});
    CHECK(m.alpha == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-5));
}

TEST_CASE("objective gradient matches central differences") {
    const auto data = apply_standardizer(fit_standardizer(gaussian_classes(500, 5), kAll), gaussian_classes(500, 5));
    const LogisticObjective obj(data, kAll, 0.3);
    std::vector<double> theta{0.2, -0.4, 0.9, 0.05, -1.1}, grad(5);
    obj.loss_and_gradient(theta, grad);
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const double h = 1e-6;
        auto tp = theta, tm = theta;
        tp[k] += h;
        tm[k] -= h;
        const double fd = (obj.loss(tp) - obj.loss(tm)) / (2 * h);
        CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("objective value against a direct sum") {
    const std::vector<LabeledSample> data{sample(1.0, 2.0, 1), sample(-1.0, 0.5, 0), sample(0.0, -1.0, 1)};
    const FeatureSubset sub{Feature::Rssi, Feature::RsrpStd};
    const LogisticObjective obj(data, sub, 0.5);
    const std::vector<double> theta{0.1, 0.7, -0.3};
    double direct = 0.0;
    for (const auto& s : data) {
        const double z = theta[0] + theta[1] * s.features.rssi() + theta[2] * s.features.rsrp_std();
        const double p = 1.0 / (1.0 + std::exp(-z));
        direct -= s.label ? std::log(p) : std::log(1.0 - p);
    }
    direct = direct / 3.0 + 0.25 * (0.49 + 0.09);
    CHECK(obj.loss(theta) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("training loss never increases and the result is deterministic") {
    const auto train = gaussian_classes(3000, 11);
    TrainConfig cfg;
    const auto m = train_logistic(train, kAll, cfg);
    CHECK(m.info.converged);
    REQUIRE(m.info.loss_history.size() >= 2);
    for (std::size_t i = 1; i < m.info.loss_history.size(); ++i)
        CHECK(m.info.loss_history[i] <= m.info.loss_history[i - 1]);
    CHECK(m.info.final_grad_norm < cfg.grad_tolerance);
    cfg.threads = 4;
    const auto m4 = train_logistic(train, kAll, cfg);
    CHECK(m4.alpha == m.alpha);
    CHECK(m4.betas == m.betas);
}

TEST_CASE("training rejects single-class data") {
    const std::vector<LabeledSample> train{sample(1.0, 2.0, 1), sample(2.0, 3.0, 1)};
    CHECK_THROWS_AS(train_logistic(train, {Feature::Rssi}, TrainConfig{}), Error);
}

TEST_CASE("gini impurity") {
    CHECK(gini_impurity(2, 2) == 0.5);
    CHECK(gini_impurity(4, 0) == 0.0);
    CHECK(gini_impurity(0, 4) == 0.0);
    CHECK(gini_impurity(3, 1) == 0.375);
    CHECK_THROWS_AS(gini_impurity(0, 0), Error);
}

TEST_CASE("best split on a perfectly separable feature") {
    const std::vector<LabeledSample> s{sample(1, 0, 0), sample(2, 0, 0), sample(3, 0, 1), sample(4, 0, 1)};
    const auto split = best_split(s, {Feature::Rssi});
    REQUIRE(split);
    CHECK(split->feature == Feature::Rssi);
    CHECK(split->threshold == 2.5);
    CHECK(split->weighted_impurity == 0.0);
    // Leaf size limit that no threshold can meet.
    CHECK_FALSE(best_split(s, {Feature::Rssi}, 3));
}

TEST_CASE("best split weighted impurity against a direct computation") {
    // Labels 0 0 1 0 1 1 sorted by rssi; the cut after the second sample is best.
    const std::vector<LabeledSample> s{sample(1, 0, 0), sample(2, 0, 0), sample(3, 0, 1),
                                       sample(4, 0, 0), sample(5, 0, 1), sample(6, 0, 1)};
    const auto split = best_split(s, {Feature::Rssi});
    REQUIRE(split);
    double best = 1e9, best_t = 0;
    for (int cut = 1; cut < 6; ++cut) {
        int pl = 0, pr = 0;
        for (int i = 0; i < 6; ++i) (i < cut ? pl : pr) += s[i].label;
        const double w = (cut * gini_impurity(pl, cut - pl) + (6 - cut) * gini_impurity(pr, 6 - cut - pr)) / 6.0;
        if (w < best - 1e-15) {
            best = w;
            best_t = cut + 0.5;
        }
    }
    CHECK(split->threshold == best_t);
    CHECK(split->weighted_impurity == doctest::Approx(best).epsilon(1e-15));
}

TEST_CASE("identical feature values admit no split") {
    const std::vector<LabeledSample> s{sample(1, 0, 0), sample(1, 0, 1), sample(1, 0, 0)};
    CHECK_FALSE(best_split(s, {Feature::Rssi}));
}

TEST_CASE("ties prefer the lower feature index") {
    // Both features separate the classes perfectly.
    const std::vector<LabeledSample> s{sample(1, 10, 0), sample(2, 20, 1)};
    const auto split = best_split(s, {Feature::RsrpStd, Feature::Rssi});
    REQUIRE(split);
    CHECK(split->feature == Feature::Rssi);
}

TEST_CASE("XOR needs depth two") {
    std::vector<LabeledSample> s;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int rep = 0; rep < 5; ++rep) s.push_back(sample(a, b, a ^ b));
    TrainConfig cfg;
    cfg.max_depth = 2;
    cfg.min_leaf = 1;
    const auto t = train_tree(s, {Feature::Rssi, Feature::RsrpStd}, cfg);
    int correct = 0;
    for (const auto& x : s) correct += (predict_tree(t, x.features) > 0.5) == (x.label == 1);
    CHECK(correct == static_cast<int>(s.size()));
}

TEST_CASE("depth zero returns the class prior") {
    const auto train = gaussian_classes(300, 2);
    TrainConfig cfg;
    cfg.max_depth = 0;
    cfg.min_leaf = 1;
    const auto t = train_tree(train, kAll, cfg);
    REQUIRE(t.nodes.size() == 1);
    CHECK(predict_tree(t, train[7].features) == doctest::Approx(100.0 / 300.0));
    CHECK(feature_importance(t) == std::array<double, kFeatureCount>{});
}

TEST_CASE("stump prediction and tie-breaking at the threshold") {
    TreeModel t;
    t.feature_subset = {Feature::RsrpStd};
    t.nodes.resize(3);
    t.nodes[0].feature = static_cast<int>(Feature::RsrpStd);
    t.nodes[0].threshold = 3.0;
    t.nodes[0].left = 1;
    t.nodes[0].right = 2;
    t.nodes[1].leaf_probability = 0.9;
    t.nodes[2].leaf_probability = 0.2;
    FeatureVector x;
    x.values = {0, 3.0, 0, 0};
    CHECK(predict_tree(t, x) == 0.9);
    x.values[1] = std::nextafter(3.0, 4.0);
    CHECK(predict_tree(t, x) == 0.2);
    x.values[1] = -50.0;
    CHECK(predict_tree(t, x) == 0.9);
}

TEST_CASE("tree invariants on noisy data") {
    const auto train = gaussian_classes(4000, 7);
    TrainConfig cfg;
    cfg.max_depth = 6;
    cfg.min_leaf = 20;
    const auto t = train_tree(train, kAll, cfg);
    const auto imp = feature_importance(t);
    CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    double leaf_fraction = 0.0;
    std::int64_t leaf_samples = 0;
    for (const auto& n : t.nodes) {
        CHECK(n.impurity_decrease >= 0.0);
        if (!n.is_leaf()) continue;
        leaf_fraction += n.node_sample_fraction;
        leaf_samples += n.samples;
        CHECK(n.samples >= cfg.min_leaf);
    }
    CHECK(leaf_fraction == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(leaf_samples == 4000);
    // Leaf probability equals the training positive fraction of the samples routed there.
    std::map<double, std::pair<int, int>> routed;
    for (const auto& s : train) {
        auto& r = routed[predict_tree(t, s.features)];
        r.first += s.label;
        r.second += 1;
    }
    for (const auto& [p, counts] : routed) CHECK(p == doctest::Approx(double(counts.first) / counts.second));
}

TEST_CASE("tree predictions are invariant under monotone feature transforms") {
    auto train = gaussian_classes(1500, 3);
    TrainConfig cfg;
    cfg.max_depth = 5;
    cfg.min_leaf = 10;
    const auto t1 = train_tree(train, kAll, cfg);
    auto transformed = train;
    for (auto& s : transformed) {
        s.features[Feature::Rssi] = std::exp(s.features.rssi() / 10.0);
        s.features[Feature::RsrpStd] = 3.0 * s.features.rsrp_std() - 7.0;
    }
    const auto t2 = train_tree(transformed, kAll, cfg);
    for (std::size_t i = 0; i < train.size(); ++i)
        CHECK(predict_tree(t1, train[i].features) == predict_tree(t2, transformed[i].features));
}

TEST_CASE("model files round-trip bit-exactly") {
    const auto train = gaussian_classes(2000, 19);
    TrainConfig cfg;
    cfg.min_leaf = 15;
    LogisticModel lr = train_logistic(train, kAll, cfg);
    lr.info.train_ues = {1, 5, 9};
    const Model models[] = {lr, train_tree(train, {Feature::Rssi, Feature::RsrpStd}, cfg)};
    const auto probe = gaussian_classes(1000, 99);
    const auto dir = std::filesystem::temp_directory_path();
    for (const Model& m : models) {
        const auto path = (dir / ("rdd_model_" + model_type(m) + ".json")).string();
        save_model(m, path);
        const Model back = load_model(path);
        CHECK(model_type(back) == model_type(m));
        CHECK(model_features(back) == model_features(m));
        CHECK(model_info(back).train_ues == model_info(m).train_ues);
        for (const auto& s : probe) CHECK(predict(back, s.features) == predict(m, s.features));
        std::filesystem::remove(path);
    }
}

TEST_CASE("corrupt model files are rejected") {
    const auto train = gaussian_classes(500, 1);
    const Model m = train_tree(train, kAll, TrainConfig{});
    const std::string text = model_to_json(m);
    CHECK_THROWS_AS(model_from_json(text.substr(0, text.size() / 2)), Error);
    std::string wrong_version = text;
    const auto pos = wrong_version.find("\"version\": 1");
    REQUIRE(pos != std::string::npos);
    wrong_version.replace(pos, 12, "\"version\": 7");
    try {
        model_from_json(wrong_version);
        FAIL("expected a version error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("version 7") != std::string::npos);
    }
    const auto path = (std::filesystem::temp_directory_path() / "rdd_truncated.json").string();
    std::ofstream(path) << text.substr(0, 40);
    CHECK_THROWS_AS(load_model(path), IoError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), IoError);
}
