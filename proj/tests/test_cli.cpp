#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "../tools/commands.hpp"
#include "json.hpp"
#include "rdd/config.hpp"

using namespace rdd;
using namespace rdd::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("rdd_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// 190 UEs for 4 s keeps the whole chain to a few seconds.
RunOptions small_run(const fs::path& dir) {
    const auto cfg = dir / "short.ini";
    std::ofstream(cfg) << "[simulation]\nduration = 4\n";
    RunOptions opts;
    opts.config_path = cfg.string();
    opts.scale = 0.01;
    opts.out = (dir / "run").string();
    opts.threads = 2;
    return opts;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("sha256 of a known string") {
    const auto path = (fs::temp_directory_path() / "rdd_abc.txt").string();
    std::ofstream(path, std::ios::binary) << "abc";
    CHECK(sha256_file(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fs::remove(path);
    CHECK_THROWS_AS(sha256_file("/nonexistent/file"), IoError);
}

TEST_CASE("shipped default config equals the built-in reference") {
    const auto loaded = load_config(std::string(RDD_SOURCE_DIR) + "/configs/default.ini");
    CHECK(format_config(loaded) == format_config(ScenarioConfig{}));
}

TEST_CASE("scale and seed resolution") {
    RunOptions opts;
    CHECK(resolve_config(opts).population.total_ues == 1900);
    opts.scale = 1.0;
    CHECK(resolve_config(opts).population.total_ues == 19000);
    opts.seed = 7;
    const auto c = resolve_config(opts);
    CHECK(c.sim.seed == 7);
    CHECK(c.deployment.seed == 7);
    opts.config_path = "/nonexistent/rdd.ini";
    CHECK_THROWS_AS(resolve_config(opts), Error);
}

TEST_CASE("full command chain on a short run") {
    const auto dir = scratch("chain");
    RunOptions opts = small_run(dir);
    const RunPaths paths{opts.out};

    const auto sim = cmd_simulate(opts);
    CHECK(sim.summary.ues_by_class[0] + sim.summary.ues_by_class[1] + sim.summary.ues_by_class[2] == 190);
    CHECK(sim.summary.report_count == 190 * 100);
    const std::string first_hash = sha256_file(paths.trace());
    cmd_simulate(opts);
    CHECK(sha256_file(paths.trace()) == first_hash);

    CHECK(cmd_extract(opts) == 190 * 100);
    const auto split = cmd_split(opts);
    CHECK(split.train_ues.size() + split.test_ues.size() == 190);
    const auto split_json = nlohmann::json::parse(slurp(paths.split()));
    CHECK(split_json["train_ues"].get<std::vector<int>>() == split.train_ues);

    CHECK_THROWS_AS(cmd_train(opts, {"svm", "all", ""}), ConfigError);
    CHECK_THROWS_AS(cmd_train(opts, {"lr", "rssi,snr", ""}), ConfigError);
    const auto lr = cmd_train(opts, {"lr", "rssi,rsrp_std", ""});
    const auto dt = cmd_train(opts, {"dt", "all", ""});
    CHECK(lr == paths.models() + "/lr_rssi+rsrp_std.json");
    CHECK(dt == paths.models() + "/dt_all.json");
    CHECK(fs::exists(paths.models() + "/dt_all.log.json"));

    const auto reports = cmd_evaluate(opts, {});
    REQUIRE(reports.size() == 2);
    for (const auto& r : reports) {
        CHECK(r.ues == static_cast<std::int64_t>(split.test_ues.size()));
        CHECK(r.zero_fpr.false_positives == 0);
        CHECK(r.curve.size() == 4);
        CHECK(r.auc == r.auc_trapezoid);
    }
    for (const char* f : {"dt_all.json", "dt_all_curve.csv", "dt_all_altitude.csv", "lr_rssi+rsrp_std.json"})
        CHECK(fs::exists(paths.eval() + "/" + f));

    // Scoring the training split trips the leakage guard.
    CHECK_THROWS_AS(cmd_evaluate(opts, {{dt}, paths.train(), false}), Error);
    CHECK(cmd_evaluate(opts, {{dt}, paths.train(), true}).size() == 1);

    const auto replay = cmd_replay(opts, {});
    CHECK(replay.ues == 190);
    CHECK(replay.decision_agreement == 190);
    CHECK(replay.max_mean_difference <= 1e-12);
    CHECK(replay.duplicate_injection_unchanged);
    CHECK(replay.early_consistent == replay.early_decisions);
    for (const char* f : {"messages.jsonl", "decisions.csv", "replay.json"}) CHECK(fs::exists(paths.replay() + "/" + f));

    // Manifests record the hash of every output.
    for (const char* cmd : {"simulate", "extract", "split", "train", "evaluate", "replay"}) {
        const auto m = nlohmann::json::parse(slurp(paths.manifest(cmd)));
        CHECK(m["command"] == cmd);
        CHECK(m["tool_version"] == kToolVersion);
        for (const auto& o : m["outputs"]) CHECK(o["sha256"] == sha256_file(o["path"].get<std::string>()));
    }
    fs::remove_all(dir);
}

TEST_CASE("commands report missing inputs") {
    const auto dir = scratch("missing");
    RunOptions opts = small_run(dir);
    CHECK_THROWS_AS(cmd_extract(opts), IoError);
    CHECK_THROWS_AS(cmd_split(opts), IoError);
    CHECK_THROWS_AS(cmd_train(opts, {}), IoError);
    CHECK_THROWS_AS(cmd_evaluate(opts, {}), ConfigError);
    CHECK_THROWS_AS(cmd_replay(opts, {}), IoError);
    fs::remove_all(dir);
}
