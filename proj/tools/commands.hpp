#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rdd/eval.hpp"
#include "rdd/netaggr.hpp"
#include "rdd/simulator.hpp"

namespace rdd::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunOptions {
    std::string config_path;  // empty: reference scenario
    std::optional<std::uint64_t> seed;
    double scale = 0.1;
    std::string out = "run";
    unsigned threads = 0;
};

// Reference config (or --config) with --seed and --scale applied.
ScenarioConfig resolve_config(const RunOptions& opts);

// Artifact paths inside a run directory.
struct RunPaths {
    std::string dir;
    std::string config() const { return dir + "/config.ini"; }
    std::string trace() const { return dir + "/trace.csv"; }
    std::string summary() const { return dir + "/summary.jsonl"; }
    std::string dataset() const { return dir + "/dataset.csv"; }
    std::string train() const { return dir + "/train.csv"; }
    std::string test() const { return dir + "/test.csv"; }
    std::string split() const { return dir + "/split.json"; }
    std::string models() const { return dir + "/models"; }
    std::string eval() const { return dir + "/eval"; }
    std::string replay() const { return dir + "/replay"; }
    std::string manifest(const std::string& command) const { return dir + "/manifest_" + command + ".json"; }
};

struct SimulateResult {
    std::string trace_path;
    SimulationSummary summary;
};
SimulateResult cmd_simulate(const RunOptions& opts);

// trace.csv -> dataset.csv
std::int64_t cmd_extract(const RunOptions& opts);

// dataset.csv -> train.csv, test.csv, split.json
DatasetSplit cmd_split(const RunOptions& opts, double train_fraction = 0.5);

struct TrainOptions {
    std::string model_type = "dt";  // lr | dt
    std::string features = "all";
    std::string output;  // default models/<type>_<subset>.json
};
std::string cmd_train(const RunOptions& opts, const TrainOptions& train);

struct EvaluateOptions {
    std::vector<std::string> models;  // empty: every model under models/
    std::string dataset;              // default test.csv
    bool allow_leakage = false;
};
std::vector<EvalReport> cmd_evaluate(const RunOptions& opts, const EvaluateOptions& eval);

struct ReplayCliOptions {
    std::string model;  // default models/dt_all.json
    AggregationMode mode = AggregationMode::Distributed;
    TerminationPolicy policy;
    bool terminate = true;
    double duplicate_probability = 0.0;
    double loss_probability = 0.0;
    double decision_threshold = 0.5;
};

struct ReplaySummary {
    ReplayResult result;           // requested mode and policy
    std::int64_t ues = 0;
    std::int64_t decision_agreement = 0;  // lossless central vs distributed
    double max_mean_difference = 0.0;
    std::int64_t early_decisions = 0;
    std::int64_t early_consistent = 0;  // early decision equals classify() at that moment
    bool duplicate_injection_unchanged = true;
};
ReplaySummary cmd_replay(const RunOptions& opts, const ReplayCliOptions& replay);

// simulate, extract, split, train {lr, dt} x {rssi+rsrp_std, all}, evaluate, replay.
void cmd_pipeline(const RunOptions& opts);

// Scored reports in trace order for a model.
std::vector<ScoredReport> score_trace(const std::string& trace_path, const Model& model);

std::string sha256_file(const std::string& path);

}  // namespace rdd::cli
