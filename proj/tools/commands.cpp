#include "commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rdd/config.hpp"
#include "rdd/parallel.hpp"
#include "rdd/trace.hpp"

namespace rdd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Manifest {
public:
    Manifest(std::string command, const RunOptions& opts)
        : command_(std::move(command)), opts_(opts), start_(std::chrono::steady_clock::now()) {}

    void input(const std::string& path) { inputs_.push_back(path); }
    void output(const std::string& path) { outputs_.push_back(path); }
    void seed(std::uint64_t s) { seed_ = s; }

    void write(const RunPaths& paths) const {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        auto list = [](const std::vector<std::string>& v) {
            json arr = json::array();
            for (const auto& p : v) arr.push_back({{"path", p}, {"sha256", sha256_file(p)}});
            return arr;
        };
        json j{{"command", command_},
               {"config_path", opts_.config_path},
               {"seed", seed_},
               {"scale", opts_.scale},
               {"threads", opts_.threads},
               {"inputs", list(inputs_)},
               {"outputs", list(outputs_)},
               {"tool_version", kToolVersion},
               {"wall_clock_s", elapsed}};
        const auto path = paths.manifest(command_);
        std::ofstream out(path);
        if (!out) throw IoError(path, "cannot open for writing");
        out << j.dump(1) << '\n';
    }

private:
    std::string command_;
    RunOptions opts_;
    std::chrono::steady_clock::time_point start_;
    std::uint64_t seed_ = 0;
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir, "cannot create directory: " + ec.message());
}

void require_file(const std::string& path, const std::string& hint) {
    if (!fs::exists(path)) throw IoError(path, "missing (" + hint + ")");
}

std::string subset_tag(const FeatureSubset& subset) {
    if (subset.size() == kFeatureCount) return "all";
    std::string s = format_feature_subset(subset);
    std::replace(s.begin(), s.end(), ',', '+');
    return s;
}

// Scenario used by the later stages: the run's saved config when present.
ScenarioConfig run_config(const RunOptions& opts) {
    const RunPaths paths{opts.out};
    if (fs::exists(paths.config())) return load_config(paths.config());
    return resolve_config(opts);
}

std::uint64_t run_seed(const RunOptions& opts) { return opts.seed.value_or(SimParams{}.seed); }

std::vector<double> predict_all(const Model& model, std::span<const LabeledSample> samples, unsigned threads) {
    std::vector<double> p(samples.size());
    parallel_for(samples.size(), threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) p[i] = predict(model, samples[i].features);
    });
    return p;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError(path, "cannot open for writing");
    out << text;
    if (!out) throw IoError(path, "write failed");
}

}  // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 20);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

ScenarioConfig resolve_config(const RunOptions& opts) {
    ScenarioConfig config = opts.config_path.empty() ? ScenarioConfig{} : load_config(opts.config_path);
    if (opts.seed) {
        config.deployment.seed = *opts.seed;
        config.sim.seed = *opts.seed;
    }
    apply_population_scale(config, opts.scale);
    config.validate();
    return config;
}

SimulateResult cmd_simulate(const RunOptions& opts) {
    const ScenarioConfig config = resolve_config(opts);
    const RunPaths paths{opts.out};
    ensure_dir(paths.dir);
    Manifest manifest("simulate", opts);
    manifest.seed(config.sim.seed);
    if (!opts.config_path.empty()) manifest.input(opts.config_path);

    write_text(paths.config(), format_config(config));
    TraceWriter writer(paths.trace(), config.sim.max_reported_cells);
    SimulateResult result;
    result.trace_path = paths.trace();
    result.summary = run_simulation(config, [&](std::span<const MeasurementReport> r) { writer.write(r); }, opts.threads);
    writer.close();
    write_summary_jsonl(paths.summary(), result.summary, paths.trace());

    manifest.output(paths.config());
    manifest.output(paths.trace());
    manifest.output(paths.summary());
    manifest.write(paths);
    return result;
}

std::int64_t cmd_extract(const RunOptions& opts) {
    const RunPaths paths{opts.out};
    require_file(paths.trace(), "run simulate first");
    Manifest manifest("extract", opts);
    std::vector<LabeledSample> samples;
    read_trace(paths.trace(), [&](const MeasurementReport& r) { samples.push_back(make_sample(r)); });
    write_dataset(paths.dataset(), samples);
    manifest.input(paths.trace());
    manifest.output(paths.dataset());
    manifest.write(paths);
    return static_cast<std::int64_t>(samples.size());
}

DatasetSplit cmd_split(const RunOptions& opts, double train_fraction) {
    const RunPaths paths{opts.out};
    require_file(paths.dataset(), "run extract first");
    Manifest manifest("split", opts);
    const std::uint64_t seed = run_seed(opts);
    manifest.seed(seed);
    const auto samples = read_dataset(paths.dataset());
    DatasetSplit split = split_by_ue(samples, train_fraction, seed);
    write_dataset(paths.train(), split.train);
    write_dataset(paths.test(), split.test);
    const json j{{"train_fraction", train_fraction},
                 {"seed", seed},
                 {"train_ues", split.train_ues},
                 {"test_ues", split.test_ues}};
    write_text(paths.split(), j.dump(1) + "\n");
    manifest.input(paths.dataset());
    manifest.output(paths.train());
    manifest.output(paths.test());
    manifest.output(paths.split());
    manifest.write(paths);
    return split;
}

std::string cmd_train(const RunOptions& opts, const TrainOptions& train) {
    if (train.model_type != "lr" && train.model_type != "dt")
        throw ConfigError("--model-type: expected 'lr' or 'dt', got '" + train.model_type + "'");
    const FeatureSubset subset = parse_feature_subset(train.features);
    const RunPaths paths{opts.out};
    require_file(paths.train(), "run split first");
    Manifest manifest("train", opts);

    const auto samples = read_dataset(paths.train());
    const auto drones = std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.label == 1; });
    if (drones == 0 || drones == static_cast<std::ptrdiff_t>(samples.size()))
        throw Error(paths.train() + ": training data contains a single class");

    TrainConfig config;
    config.seed = run_seed(opts);
    config.threads = opts.threads;
    config.min_leaf = std::max(1, static_cast<int>(std::lround(50.0 * opts.scale)));
    manifest.seed(config.seed);

    std::set<int> ue_set;
    for (const auto& s : samples) ue_set.insert(s.ue_id);
    const auto start = std::chrono::steady_clock::now();
    Model model;
    if (train.model_type == "lr") model = train_logistic(samples, subset, config);
    else model = train_tree(samples, subset, config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::visit([&](auto& m) { m.info.train_ues.assign(ue_set.begin(), ue_set.end()); }, model);

    ensure_dir(paths.models());
    const std::string name = train.model_type + "_" + subset_tag(subset);
    const std::string out = train.output.empty() ? paths.models() + "/" + name + ".json" : train.output;
    save_model(model, out);

    const auto& info = model_info(model);
    json log{{"model", out},
             {"model_type", train.model_type},
             {"feature_subset", format_feature_subset(subset)},
             {"samples", info.samples},
             {"train_ues", static_cast<std::int64_t>(ue_set.size())},
             {"converged", info.converged},
             {"iterations", info.iterations},
             {"final_loss", info.final_loss},
             {"final_grad_norm", info.final_grad_norm},
             {"loss_history", info.loss_history},
             {"min_leaf", config.min_leaf},
             {"max_depth", config.max_depth},
             {"train_seconds", seconds}};
    const std::string log_path = out.substr(0, out.size() - (out.ends_with(".json") ? 5 : 0)) + ".log.json";
    write_text(log_path, log.dump(1) + "\n");

    manifest.input(paths.train());
    manifest.output(out);
    manifest.output(log_path);
    manifest.write(paths);
    return out;
}

std::vector<EvalReport> cmd_evaluate(const RunOptions& opts, const EvaluateOptions& eval) {
    const RunPaths paths{opts.out};
    std::vector<std::string> models = eval.models;
    if (models.empty() && fs::is_directory(paths.models())) {
        for (const auto& entry : fs::directory_iterator(paths.models())) {
            const auto p = entry.path().string();
            if (p.ends_with(".json") && !p.ends_with(".log.json")) models.push_back(p);
        }
        std::sort(models.begin(), models.end());
    }
    if (models.empty()) throw ConfigError("evaluate: no models given and none found under " + paths.models());

    const std::string dataset = eval.dataset.empty() ? paths.test() : eval.dataset;
    require_file(dataset, "run split first");
    const ScenarioConfig config = run_config(opts);
    Manifest manifest("evaluate", opts);
    manifest.input(dataset);

    const auto samples = read_dataset(dataset);
    std::set<int> eval_ues;
    for (const auto& s : samples) eval_ues.insert(s.ue_id);

    ensure_dir(paths.eval());
    std::vector<double> instants;
    for (double t : default_eval_instants())
        if (t <= config.sim.duration_s + 1e-9) instants.push_back(t);

    std::vector<EvalReport> reports;
    for (const auto& model_path : models) {
        const Model model = load_model(model_path);
        manifest.input(model_path);
        const auto& info = model_info(model);
        std::int64_t overlap = 0;
        for (int ue : info.train_ues) overlap += eval_ues.count(ue);
        if (overlap > 0 && !eval.allow_leakage)
            throw Error("leakage guard: " + std::to_string(overlap) + " UEs of " + dataset +
                        " were used to train " + model_path + " (pass --allow-leakage to override)");

        const auto p = predict_all(model, samples, opts.threads);
        const auto ues = group_probabilities(samples, p);
        const auto final_scores = scores_after(ues, std::numeric_limits<std::int64_t>::max());

        EvalReport report;
        report.model_type = model_type(model);
        report.feature_subset = format_feature_subset(model_features(model));
        report.eval_time_s = config.sim.duration_s;
        report.ues = static_cast<std::int64_t>(final_scores.size());
        report.drones = std::count_if(final_scores.begin(), final_scores.end(), [](const auto& s) { return s.label == 1; });
        report.auc = roc_auc(final_scores);
        report.auc_trapezoid = roc_auc_trapezoid(final_scores);
        if (std::abs(report.auc - report.auc_trapezoid) > 1e-12)
            throw Error("evaluate: rank and trapezoid AUC disagree");
        report.zero_fpr = tpr_at_zero_fpr(final_scores);
        report.per_altitude = per_altitude_detection(final_scores, report.zero_fpr.threshold,
                                                     config.population.drone_heights_m);
        report.curve = detection_vs_time(ues, instants, config.sim.report_period_s, opts.threads);
        if (const auto* tree = std::get_if<TreeModel>(&model)) {
            report.importance = feature_importance(*tree);
            report.has_importance = true;
        }

        const std::string stem = paths.eval() + "/" + report.model_type + "_" + subset_tag(model_features(model));
        write_eval_json(stem + ".json", report);
        write_curve_csv(stem + "_curve.csv", report.curve);
        write_altitude_csv(stem + "_altitude.csv", report.per_altitude);
        manifest.output(stem + ".json");
        manifest.output(stem + "_curve.csv");
        manifest.output(stem + "_altitude.csv");
        reports.push_back(std::move(report));
    }
    manifest.write(paths);
    return reports;
}

std::vector<ScoredReport> score_trace(const std::string& trace_path, const Model& model) {
    std::vector<ScoredReport> out;
    read_trace(trace_path, [&](const MeasurementReport& r) {
        out.push_back({r.ue_id, r.t_s, r.serving_cell, predict(model, extract_features(r).features)});
    });
    return out;
}

ReplaySummary cmd_replay(const RunOptions& opts, const ReplayCliOptions& replay) {
    const RunPaths paths{opts.out};
    require_file(paths.trace(), "run simulate first");
    const std::string model_path = replay.model.empty() ? paths.models() + "/dt_all.json" : replay.model;
    require_file(model_path, "run train first or pass --model");
    Manifest manifest("replay", opts);
    manifest.seed(run_seed(opts));
    manifest.input(paths.trace());
    manifest.input(model_path);

    const Model model = load_model(model_path);
    const auto reports = score_trace(paths.trace(), model);

    ReplayOptions base;
    base.decision_threshold = replay.decision_threshold;
    base.bus.seed = run_seed(opts);

    ReplaySummary summary;
    // Lossless, non-terminating reference runs for the equivalence check.
    ReplayOptions central = base;
    central.mode = AggregationMode::Central;
    ReplayOptions distributed = base;
    distributed.mode = AggregationMode::Distributed;
    const auto ref_central = replay_aggregation(reports, central);
    const auto ref_distributed = replay_aggregation(reports, distributed);
    summary.ues = static_cast<std::int64_t>(ref_central.ues.size());
    if (ref_central.ues.size() != ref_distributed.ues.size()) throw Error("replay: UE sets differ between modes");
    for (std::size_t i = 0; i < ref_central.ues.size(); ++i) {
        const auto& c = ref_central.ues[i];
        const auto& d = ref_distributed.ues[i];
        summary.decision_agreement += c.ue_id == d.ue_id && c.decision == d.decision;
        summary.max_mean_difference = std::max(summary.max_mean_difference,
                                               std::abs(c.state.mean_probability - d.state.mean_probability));
    }

    ReplayOptions dup = central;
    dup.bus.duplicate_probability = 0.5;
    const auto with_dups = replay_aggregation(reports, dup);
    for (std::size_t i = 0; i < with_dups.ues.size(); ++i)
        if (with_dups.ues[i].decision != ref_central.ues[i].decision ||
            with_dups.ues[i].state.mean_probability != ref_central.ues[i].state.mean_probability)
            summary.duplicate_injection_unchanged = false;

    ensure_dir(paths.replay());
    const std::string log_path = paths.replay() + "/messages.jsonl";
    std::ofstream log(log_path);
    if (!log) throw IoError(log_path, "cannot open for writing");
    ReplayOptions requested = base;
    requested.mode = replay.mode;
    if (replay.terminate && replay.mode == AggregationMode::Distributed) requested.termination = replay.policy;
    requested.bus.loss_probability = replay.loss_probability;
    requested.bus.duplicate_probability = replay.duplicate_probability;
    requested.message_log = &log;
    summary.result = replay_aggregation(reports, requested);
    log.close();
    if (!log) throw IoError(log_path, "write failed");

    std::string csv = "ue_id,decision,mean_probability,reports,early,decided_at_s,decided_by_cell\n";
    for (const auto& u : summary.result.ues) {
        if (u.early) {
            ++summary.early_decisions;
            summary.early_consistent += classify(u.state, replay.decision_threshold) == u.decision;
        }
        std::ostringstream row;
        row << u.ue_id << ',' << to_string(u.decision) << ',' << std::setprecision(17) << u.state.mean_probability << ','
            << u.state.count << ',' << (u.early ? 1 : 0) << ',' << u.decided_at_s << ',' << u.decided_by_cell << '\n';
        csv += row.str();
    }
    const std::string decisions_path = paths.replay() + "/decisions.csv";
    write_text(decisions_path, csv);

    const json j{{"mode", std::string(to_string(replay.mode))},
                 {"model", model_path},
                 {"termination", requested.termination ? json{{"low", replay.policy.low},
                                                              {"high", replay.policy.high},
                                                              {"min_reports", replay.policy.min_reports}}
                                                       : json(nullptr)},
                 {"ues", summary.ues},
                 {"equivalence_decision_agreement", summary.decision_agreement},
                 {"equivalence_max_mean_difference", summary.max_mean_difference},
                 {"duplicate_injection_unchanged", summary.duplicate_injection_unchanged},
                 {"early_decisions", summary.early_decisions},
                 {"early_consistent", summary.early_consistent},
                 {"messages_sent", summary.result.messages_sent},
                 {"messages_delivered", summary.result.messages_delivered},
                 {"messages_dropped", summary.result.messages_dropped},
                 {"messages_duplicated", summary.result.messages_duplicated}};
    const std::string summary_path = paths.replay() + "/replay.json";
    write_text(summary_path, j.dump(1) + "\n");

    manifest.output(log_path);
    manifest.output(decisions_path);
    manifest.output(summary_path);
    manifest.write(paths);
    return summary;
}

void cmd_pipeline(const RunOptions& opts) {
    cmd_simulate(opts);
    cmd_extract(opts);
    cmd_split(opts);
    for (const char* type : {"lr", "dt"})
        for (const char* features : {"rssi,rsrp_std", "all"}) cmd_train(opts, {type, features, ""});
    cmd_evaluate(opts, {});
    cmd_replay(opts, {});
}

}  // namespace rdd::cli
