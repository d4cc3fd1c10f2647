#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace rdd;
    CLI::App app{"Rogue drone detection workbench"};
    app.require_subcommand(1);
    app.fallthrough();

    cli::RunOptions opts;
    std::uint64_t seed = 0;
    app.add_option("--config", opts.config_path, "Scenario INI file (default: reference scenario)");
    auto* seed_opt = app.add_option("--seed", seed, "Overrides the deployment and simulation seeds");
    app.add_option("--scale", opts.scale, "Population scale relative to the config (default 0.1)");
    app.add_option("--out", opts.out, "Run directory")->capture_default_str();
    app.add_option("--threads", opts.threads, "Worker cap (0: all cores)");

    cli::TrainOptions train;
    cli::EvaluateOptions eval;
    cli::ReplayCliOptions replay;
    std::string mode = "distributed";

    auto* simulate = app.add_subcommand("simulate", "Run the network simulation and write trace.csv");
    auto* extract = app.add_subcommand("extract", "Turn trace.csv into dataset.csv");
    auto* split = app.add_subcommand("split", "Split dataset.csv into train/test by UE");
    auto* train_cmd = app.add_subcommand("train", "Train one model on train.csv");
    train_cmd->add_option("--model-type", train.model_type, "lr or dt")->capture_default_str();
    train_cmd->add_option("--features", train.features, "'all' or a comma list")->capture_default_str();
    train_cmd->add_option("--model", train.output, "Output path (default models/<type>_<subset>.json)");
    auto* evaluate = app.add_subcommand("evaluate", "Score models on test.csv");
    evaluate->add_option("--model", eval.models, "Model file (repeatable; default: all under models/)");
    evaluate->add_option("--dataset", eval.dataset, "Dataset CSV (default test.csv)");
    evaluate->add_flag("--allow-leakage", eval.allow_leakage, "Allow UEs seen in training");
    auto* replay_cmd = app.add_subcommand("replay", "Replay the trace through the aggregation architectures");
    replay_cmd->add_option("--model", replay.model, "Model file (default models/dt_all.json)");
    replay_cmd->add_option("--mode", mode, "central or distributed")->capture_default_str();
    replay_cmd->add_option("--band-low", replay.policy.low)->capture_default_str();
    replay_cmd->add_option("--band-high", replay.policy.high)->capture_default_str();
    replay_cmd->add_option("--min-reports", replay.policy.min_reports)->capture_default_str();
    replay_cmd->add_flag("!--no-termination", replay.terminate, "Disable early termination");
    replay_cmd->add_option("--duplicate-probability", replay.duplicate_probability)->capture_default_str();
    replay_cmd->add_option("--loss-probability", replay.loss_probability)->capture_default_str();
    auto* pipeline = app.add_subcommand("pipeline", "simulate, extract, split, train, evaluate, replay");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (*seed_opt) opts.seed = seed;

    try {
        if (*simulate) {
            const auto r = cli::cmd_simulate(opts);
            std::cout << r.trace_path << ": " << r.summary.report_count << " reports, " << r.summary.handover_count
                      << " handovers\n";
        } else if (*extract) {
            std::cout << cli::cmd_extract(opts) << " samples\n";
        } else if (*split) {
            const auto s = cli::cmd_split(opts);
            std::cout << s.train_ues.size() << " train UEs, " << s.test_ues.size() << " test UEs\n";
        } else if (*train_cmd) {
            std::cout << cli::cmd_train(opts, train) << '\n';
        } else if (*evaluate) {
            for (const auto& r : cli::cmd_evaluate(opts, eval))
                std::cout << r.model_type << " [" << r.feature_subset << "] auc=" << r.auc
                          << " tpr@fpr0=" << r.zero_fpr.tpr << '\n';
        } else if (*replay_cmd) {
            replay.mode = parse_aggregation_mode(mode);
            const auto s = cli::cmd_replay(opts, replay);
            std::cout << "agreement " << s.decision_agreement << "/" << s.ues << ", early decisions "
                      << s.early_decisions << ", messages " << s.result.messages_sent << '\n';
        } else if (*pipeline) {
            cli::cmd_pipeline(opts);
            std::cout << "pipeline complete: " << opts.out << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
