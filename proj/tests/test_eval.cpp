#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "rdd/eval.hpp"

using namespace rdd;

namespace {

std::vector<ScoredUe> scored(std::vector<double> pos, std::vector<double> neg) {
    std::vector<ScoredUe> out;
    int id = 0;
    for (double s : pos) out.push_back({id++, 1, s, 60.0});
    for (double s : neg) out.push_back({id++, 0, s, 1.5});
    return out;
}

// Probability that a random positive outscores a random negative, ties counting half.
double pairwise_auc(const std::vector<ScoredUe>& s) {
    double wins = 0.0;
    std::int64_t pairs = 0;
    for (const auto& a : s)
        for (const auto& b : s)
            if (a.label == 1 && b.label == 0) {
                ++pairs;
                wins += a.score > b.score ? 1.0 : a.score == b.score ? 0.5 : 0.0;
            }
    return wins / pairs;
}

std::vector<ScoredUe> random_scored(std::size_t n, std::uint64_t seed, int levels) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> q(0, levels);
    std::bernoulli_distribution lab(0.3);
    std::vector<ScoredUe> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].ue_id = static_cast<int>(i);
        out[i].label = lab(rng);
        out[i].score = (q(rng) + out[i].label * 0.3 * levels) / (1.3 * levels);
    }
    out[0].label = 1;
    out[1].label = 0;
    return out;
}

}  // namespace

TEST_CASE("AUC hand examples") {
    CHECK(roc_auc(scored({0.9, 0.8}, {0.1, 0.2})) == 1.0);
    CHECK(roc_auc(scored({0.1}, {0.9})) == 0.0);
    CHECK(roc_auc(scored({0.5, 0.5}, {0.5, 0.5, 0.5})) == 0.5);
    CHECK(roc_auc(scored({0.9, 0.4}, {0.5, 0.1})) == 0.75);
    CHECK(roc_auc_trapezoid(scored({0.9, 0.4}, {0.5, 0.1})) == 0.75);
    CHECK(roc_auc_trapezoid(scored({0.5, 0.5}, {0.5, 0.5, 0.5})) == 0.5);
}

TEST_CASE("AUC needs both classes") {
    CHECK_THROWS_AS(roc_auc(scored({0.3, 0.4}, {})), Error);
    CHECK_THROWS_AS(roc_auc_trapezoid(scored({}, {0.3})), Error);
}

TEST_CASE("rank and trapezoid AUC equal the pairwise oracle with ties") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto s = random_scored(300, seed, seed % 2 ? 5 : 1000);
        const double oracle = pairwise_auc(s);
        CHECK(roc_auc(s) == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(roc_auc_trapezoid(s) == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(std::abs(roc_auc(s) - roc_auc_trapezoid(s)) <= 1e-12);
    }
}

TEST_CASE("AUC is invariant under strictly increasing transforms") {
    auto s = random_scored(500, 77, 50);
    const double a = roc_auc(s);
    for (auto& x : s) x.score = std::exp(3.0 * x.score) - 2.0;
    CHECK(roc_auc(s) == a);
}

TEST_CASE("TPR at zero FPR hand example") {
    const auto r = tpr_at_zero_fpr(scored({0.9, 0.8, 0.6}, {0.7, 0.2}));
    CHECK(r.threshold == 0.7);
    CHECK(r.tpr == doctest::Approx(2.0 / 3.0));
    CHECK(r.false_positives == 0);
    // A positive tied with the top negative does not count.
    CHECK(tpr_at_zero_fpr(scored({0.7, 0.8}, {0.7})).tpr == 0.5);
    CHECK_THROWS_AS(tpr_at_zero_fpr(scored({0.9}, {})), Error);
    CHECK_THROWS_AS(tpr_at_zero_fpr(scored({}, {0.9})), Error);
}

TEST_CASE("TPR at zero FPR against a threshold sweep oracle") {
    const auto s = random_scored(400, 5, 100);
    double best = 0.0;
    for (const auto& cand : s) {
        int fp = 0, tp = 0, pos = 0;
        for (const auto& x : s) {
            pos += x.label;
            if (x.score > cand.score) (x.label ? tp : fp)++;
        }
        if (fp == 0) best = std::max(best, double(tp) / pos);
    }
    CHECK(tpr_at_zero_fpr(s).tpr == doctest::Approx(best).epsilon(1e-15));
}

TEST_CASE("per-altitude detection") {
    std::vector<ScoredUe> s{{0, 1, 0.9, 15.0}, {1, 1, 0.2, 15.0}, {2, 1, 0.8, 60.0},
                            {3, 0, 0.95, 1.5}, {4, 1, 0.6, 300.0}};
    const std::vector<double> heights{15.0, 30.0, 60.0, 300.0};
    const auto r = per_altitude_detection(s, 0.5, heights);
    CHECK(r.size() == 3);
    CHECK(r.at(15.0) == 0.5);
    CHECK(r.at(60.0) == 1.0);
    CHECK(r.at(300.0) == 1.0);
    CHECK(r.count(30.0) == 0);
}

TEST_CASE("grouping orders each UE in time") {
    std::vector<LabeledSample> samples(4);
    samples[0] = {{}, 1, 7, 0.08, 60.0};
    samples[1] = {{}, 0, 2, 0.00, 1.5};
    samples[2] = {{}, 1, 7, 0.00, 60.0};
    samples[3] = {{}, 1, 7, 0.04, 60.0};
    const std::vector<double> p{0.3, 0.1, 0.9, 0.6};
    const auto g = group_probabilities(samples, p);
    REQUIRE(g.size() == 2);
    CHECK(g[0].ue_id == 2);
    CHECK(g[1].p == std::vector<double>{0.9, 0.6, 0.3});
    CHECK(g[1].true_height_m == 60.0);
    CHECK(scores_after(g, 2)[1].score == doctest::Approx(0.75));
    CHECK(scores_after(g, 100)[1].score == doctest::Approx(0.6));
    CHECK_THROWS_AS(scores_after(g, 0), Error);
    CHECK_THROWS_AS(group_probabilities(samples, std::vector<double>{0.1}), Error);
}

TEST_CASE("detection versus time") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<UeProbabilities> ues;
    for (int k = 0; k < 40; ++k) {
        UeProbabilities x;
        x.ue_id = k;
        x.label = k % 2;
        for (int r = 0; r < 100; ++r) {
            x.t_s.push_back(0.04 * r);
            x.p.push_back(std::clamp(u(rng) * 0.8 + (x.label ? 0.2 : 0.0), 0.0, 1.0));
        }
        ues.push_back(x);
    }
    const std::vector<double> instants{0.04, 0.4, 2.0, 4.0, 10.0};
    const auto c1 = detection_vs_time(ues, instants, 0.04, 1);
    const auto c3 = detection_vs_time(ues, instants, 0.04, 3);
    REQUIRE(c1.size() == instants.size());
    for (std::size_t i = 0; i < c1.size(); ++i) {
        CHECK(c1[i].auc == c3[i].auc);
        CHECK(c1[i].t_s == instants[i]);
    }
    // One period: each UE is scored on its first report alone.
    std::vector<ScoredUe> single;
    for (const auto& x : ues) single.push_back({x.ue_id, x.label, x.p[0], 0.0});
    CHECK(c1[0].auc == roc_auc(single));
    CHECK(c1[0].tpr_fpr0 == tpr_at_zero_fpr(single).tpr);
    // 0.4 s is exactly ten reports despite rounding in the division.
    CHECK(c1[1].auc == roc_auc(scores_after(ues, 10)));
    // Beyond the trace every report is used.
    CHECK(c1[4].auc == c1[3].auc);
    CHECK(default_eval_instants().size() == 60);
    CHECK(default_eval_instants().back() == 60.0);
}

TEST_CASE("report writers") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto curve_path = (dir / "rdd_curve.csv").string();
    const std::vector<CurvePoint> curve{{1.0, 0.9, 0.5}, {2.0, 0.95, 0.6}};
    write_curve_csv(curve_path, curve);
    std::ifstream in(curve_path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t_s,auc,tpr_fpr0");
    int rows = 0;
    for (std::string line; std::getline(in, line);) rows += !line.empty();
    CHECK(rows == 2);
    const auto alt_path = (dir / "rdd_alt.csv").string();
    write_altitude_csv(alt_path, {{15.0, 0.25}});
    std::ifstream alt(alt_path);
    std::getline(alt, header);
    CHECK(header == "height_m,detection_rate");
    std::filesystem::remove(curve_path);
    std::filesystem::remove(alt_path);
    CHECK_THROWS_AS(write_curve_csv("/nonexistent/dir/c.csv", curve), IoError);
}
