#include "rdd/netaggr.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <unordered_map>

#include "json.hpp"

namespace rdd {

using nlohmann::json;

void ProbabilityReportMsg::validate() const {
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const auto& tp = probabilities[i];
        if (!(tp.p >= 0.0 && tp.p <= 1.0)) throw Error("probability report: p outside [0, 1]");
        if (i > 0 && !(tp.t_s > probabilities[i - 1].t_s))
            throw Error("probability report: timestamps not strictly increasing (ue " + std::to_string(ue_id) +
                        ", cell " + std::to_string(cell_id) + ")");
    }
}

void HandoverContextMsg::validate() const {
    if (carried.ue_id != ue_id) throw Error("handover context: carried state belongs to another UE");
    if (carried.count < 0) throw Error("handover context: negative report count");
    if (carried.count > 0 && !(carried.mean_probability >= 0.0 && carried.mean_probability <= 1.0))
        throw Error("handover context: mean outside [0, 1]");
}

void TerminationPolicy::validate() const {
    if (!(low < high)) throw ConfigError("termination band: low must be below high");
    if (min_reports < 1) throw ConfigError("termination min_reports: must be >= 1");
}

DetectorState centralized_collect(std::span<const ProbabilityReportMsg> messages) {
    DetectorState state;
    if (messages.empty()) return state;
    state.ue_id = messages.front().ue_id;

    std::map<std::pair<int, std::int64_t>, const ProbabilityReportMsg*> unique;
    for (const auto& m : messages) {
        if (m.ue_id != state.ue_id) throw Error("centralized_collect: messages for more than one UE");
        m.validate();
        auto [it, inserted] = unique.try_emplace({m.cell_id, m.seq}, &m);
        if (!inserted && !(*it->second == m))
            throw Error("centralized_collect: conflicting messages share cell " + std::to_string(m.cell_id) +
                        " seq " + std::to_string(m.seq));
    }

    std::vector<TimedProbability> all;
    for (const auto& [key, m] : unique) all.insert(all.end(), m->probabilities.begin(), m->probabilities.end());
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.t_s < b.t_s; });
    for (std::size_t i = 1; i < all.size(); ++i)
        if (all[i].t_s == all[i - 1].t_s)
            throw Error("centralized_collect: overlapping timestamp " + std::to_string(all[i].t_s) + " for UE " +
                        std::to_string(state.ue_id));
    for (const auto& tp : all) state = update_running_mean(state, tp.p, tp.t_s);
    return state;
}

DetectorState distributed_handover_transfer(const HandoverContextMsg& context, CellNode& target) {
    context.validate();
    if (context.target_cell != target.cell_id)
        throw Error("handover context for cell " + std::to_string(context.target_cell) + " delivered to cell " +
                    std::to_string(target.cell_id));
    if (target.live.count(context.ue_id))
        throw Error("state fork: cell " + std::to_string(target.cell_id) + " already holds state for UE " +
                    std::to_string(context.ue_id));
    LiveState live;
    live.state = context.carried;
    live.decided = context.decided;
    live.decided_by_cell = context.decided ? context.source_cell : -1;
    target.live.emplace(context.ue_id, live);
    target.last_context_seq[context.ue_id] = context.seq;
    return live.state;
}

std::optional<Decision> check_termination(const DetectorState& state, const TerminationPolicy& policy) {
    if (state.count < policy.min_reports) return std::nullopt;
    if (state.mean_probability > policy.high) return Decision::Drone;
    if (state.mean_probability < policy.low) return Decision::Ground;
    return std::nullopt;
}

std::string_view to_string(AggregationMode m) noexcept {
    return m == AggregationMode::Central ? "central" : "distributed";
}

AggregationMode parse_aggregation_mode(std::string_view s) {
    if (s == "central") return AggregationMode::Central;
    if (s == "distributed") return AggregationMode::Distributed;
    throw ConfigError("--mode: expected 'central' or 'distributed', got '" + std::string(s) + "'");
}

std::string message_to_json(const ProbabilityReportMsg& msg) {
    json pairs = json::array();
    for (const auto& tp : msg.probabilities) pairs.push_back({tp.t_s, tp.p});
    return json{{"type", "probability_report"}, {"ue_id", msg.ue_id}, {"cell_id", msg.cell_id},
                {"seq", msg.seq}, {"probabilities", pairs}}
        .dump();
}

std::string message_to_json(const HandoverContextMsg& msg) {
    json j{{"type", "handover_context"},
           {"ue_id", msg.ue_id},
           {"source_cell", msg.source_cell},
           {"target_cell", msg.target_cell},
           {"seq", msg.seq},
           {"count", msg.carried.count},
           {"mean_probability", msg.carried.mean_probability},
           {"last_update_s", msg.carried.last_update_s}};
    j["decided"] = msg.decided ? json(std::string(to_string(*msg.decided))) : json(nullptr);
    return j.dump();
}

MessageLog read_message_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open message log");
    MessageLog log;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "probability_report") {
                ProbabilityReportMsg m;
                m.ue_id = j.at("ue_id").get<int>();
                m.cell_id = j.at("cell_id").get<int>();
                m.seq = j.at("seq").get<std::int64_t>();
                for (const auto& pair : j.at("probabilities"))
                    m.probabilities.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
                log.reports.push_back(std::move(m));
            } else if (type == "handover_context") {
                HandoverContextMsg m;
                m.ue_id = j.at("ue_id").get<int>();
                m.source_cell = j.at("source_cell").get<int>();
                m.target_cell = j.at("target_cell").get<int>();
                m.seq = j.at("seq").get<std::int64_t>();
                m.carried.ue_id = m.ue_id;
                m.carried.count = j.at("count").get<std::int64_t>();
                m.carried.mean_probability = j.at("mean_probability").get<double>();
                m.carried.last_update_s = j.at("last_update_s").get<double>();
                if (!j.at("decided").is_null()) m.decided = parse_decision(j.at("decided").get<std::string>());
                log.contexts.push_back(m);
            } else {
                throw Error("unknown message type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw IoError(path, "line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw IoError(path, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return log;
}

std::map<int, DetectorState> replay_central_log(const MessageLog& log) {
    std::map<int, std::vector<ProbabilityReportMsg>> by_ue;
    for (const auto& m : log.reports) by_ue[m.ue_id].push_back(m);
    std::map<int, DetectorState> out;
    for (const auto& [ue, msgs] : by_ue) out[ue] = centralized_collect(msgs);
    return out;
}

namespace {

// Delivers 0, 1 or 2 copies of each message according to the loss and duplication rates.
class MessageBus {
public:
    MessageBus(const BusOptions& options, std::ostream* log, ReplayResult& stats)
        : options_(options), rng_(make_rng(options.seed, Stream::MessageBus)), log_(log), stats_(stats) {
        if (!(options.loss_probability >= 0.0 && options.loss_probability <= 1.0))
            throw ConfigError("bus loss_probability: must be in [0, 1]");
        if (!(options.duplicate_probability >= 0.0 && options.duplicate_probability <= 1.0))
            throw ConfigError("bus duplicate_probability: must be in [0, 1]");
    }

    template <class Msg>
    int send(const Msg& msg) {
        ++stats_.messages_sent;
        if (log_) *log_ << message_to_json(msg) << '\n';
        if (options_.loss_probability > 0.0 && uniform_(rng_) < options_.loss_probability) {
            ++stats_.messages_dropped;
            return 0;
        }
        int copies = 1;
        if (options_.duplicate_probability > 0.0 && uniform_(rng_) < options_.duplicate_probability) {
            ++copies;
            ++stats_.messages_duplicated;
        }
        stats_.messages_delivered += copies;
        return copies;
    }

private:
    BusOptions options_;
    Rng rng_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::ostream* log_;
    ReplayResult& stats_;
};

struct OpenBatch {
    int cell = -1;
    std::vector<TimedProbability> probabilities;
    std::int64_t next_seq = 0;
};

ReplayResult replay_central(std::span<const ScoredReport> reports, const ReplayOptions& options) {
    ReplayResult result;
    MessageBus bus(options.bus, options.message_log, result);
    std::map<int, OpenBatch> open;
    std::map<int, std::vector<ProbabilityReportMsg>> inbox;

    auto flush = [&](int ue, OpenBatch& batch) {
        if (batch.probabilities.empty()) return;
        ProbabilityReportMsg msg{ue, batch.cell, std::move(batch.probabilities), batch.next_seq++};
        batch.probabilities.clear();
        const int copies = bus.send(msg);
        for (int c = 0; c < copies; ++c) inbox[ue].push_back(msg);
    };

    for (const auto& r : reports) {
        auto& batch = open[r.ue_id];
        if (batch.cell != r.serving_cell) {
            flush(r.ue_id, batch);
            batch.cell = r.serving_cell;
        }
        batch.probabilities.push_back({r.t_s, r.p});
    }
    for (auto& [ue, batch] : open) flush(ue, batch);

    for (const auto& [ue, batch] : open) {
        UeOutcome out;
        out.ue_id = ue;
        const auto it = inbox.find(ue);
        out.state = it == inbox.end() ? DetectorState{ue} : centralized_collect(it->second);
        out.state.ue_id = ue;
        out.decision = out.state.count > 0 ? classify(out.state, options.decision_threshold) : Decision::Ground;
        out.decided_at_s = out.state.last_update_s;
        result.ues.push_back(out);
    }
    return result;
}

ReplayResult replay_distributed(std::span<const ScoredReport> reports, const ReplayOptions& options) {
    ReplayResult result;
    MessageBus bus(options.bus, options.message_log, result);
    if (options.termination) options.termination->validate();
    std::unordered_map<int, CellNode> cells;
    std::map<int, int> owner;
    std::map<int, std::int64_t> context_seq;

    auto node = [&](int cell) -> CellNode& {
        auto [it, inserted] = cells.try_emplace(cell);
        if (inserted) it->second.cell_id = cell;
        return it->second;
    };

    for (const auto& r : reports) {
        auto own = owner.find(r.ue_id);
        CellNode& target = node(r.serving_cell);
        if (own == owner.end()) {
            LiveState fresh;
            fresh.state.ue_id = r.ue_id;
            target.live.emplace(r.ue_id, fresh);
            owner[r.ue_id] = r.serving_cell;
        } else if (own->second != r.serving_cell) {
            CellNode& source = node(own->second);
            const auto src = source.live.find(r.ue_id);
            HandoverContextMsg ctx;
            ctx.ue_id = r.ue_id;
            ctx.source_cell = source.cell_id;
            ctx.target_cell = target.cell_id;
            ctx.carried = src->second.state;
            ctx.decided = src->second.decided;
            ctx.seq = ++context_seq[r.ue_id];
            const double decided_at = src->second.decided_at_s;
            const int decided_by = src->second.decided_by_cell;
            source.live.erase(src);
            const int copies = bus.send(ctx);
            for (int c = 0; c < copies; ++c) {
                const auto seen = target.last_context_seq.find(r.ue_id);
                if (seen != target.last_context_seq.end() && seen->second >= ctx.seq) continue;
                distributed_handover_transfer(ctx, target);
                auto& live = target.live.at(r.ue_id);
                live.decided_at_s = decided_at;
                live.decided_by_cell = decided_by;
            }
            if (copies == 0) {
                // Context lost: the target starts over without the history.
                LiveState fresh;
                fresh.state.ue_id = r.ue_id;
                target.live.emplace(r.ue_id, fresh);
            }
            own->second = r.serving_cell;
        }

        LiveState& live = target.live.at(r.ue_id);
        if (live.decided) continue;
        live.state = update_running_mean(live.state, r.p, r.t_s);
        if (options.termination) {
            if (const auto d = check_termination(live.state, *options.termination)) {
                live.decided = d;
                live.decided_at_s = r.t_s;
                live.decided_by_cell = target.cell_id;
            }
        }
    }

    for (const auto& [ue, cell] : owner) {
        const LiveState& live = cells.at(cell).live.at(ue);
        UeOutcome out;
        out.ue_id = ue;
        out.state = live.state;
        if (live.decided) {
            out.decision = *live.decided;
            out.early = true;
            out.decided_at_s = live.decided_at_s;
            out.decided_by_cell = live.decided_by_cell;
        } else {
            // The serving cell at the end of the trace makes the decision.
            out.decision = classify(live.state, options.decision_threshold);
            out.decided_at_s = live.state.last_update_s;
            out.decided_by_cell = cell;
        }
        result.ues.push_back(out);
    }
    return result;
}

}  // namespace

ReplayResult replay_aggregation(std::span<const ScoredReport> reports, const ReplayOptions& options) {
    if (options.mode == AggregationMode::Central) return replay_central(reports, options);
    return replay_distributed(reports, options);
}

}  // namespace rdd
