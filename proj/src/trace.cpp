#include "rdd/trace.hpp"

#include "json.hpp"

#include "rdd/csv.hpp"

namespace rdd {

std::string trace_header(int reported_cells) {
    std::string h = "t_s,ue_id,true_class,true_height_m,serving_cell,rssi_dbm";
    for (int k = 1; k <= reported_cells; ++k) {
        h += ",rsrp" + std::to_string(k) + "_cell";
        h += ",rsrp" + std::to_string(k) + "_dbm";
    }
    h += ",serving_rsrp_dbm";
    return h;
}

TraceWriter::TraceWriter(const std::string& path, int reported_cells)
    : path_(path), reported_cells_(reported_cells), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError(path, "cannot open trace file for writing");
    out_ << trace_header(reported_cells_) << '\n';
    buffer_.reserve(1 << 20);
}

TraceWriter::~TraceWriter() {
    if (out_.is_open()) {
        out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
        out_.close();
    }
}

void TraceWriter::write(std::span<const MeasurementReport> reports) {
    for (const auto& r : reports) {
        csv::append_fixed(buffer_, r.t_s, 3);
        buffer_ += ',';
        csv::append_int(buffer_, r.ue_id);
        buffer_ += ',';
        buffer_ += to_string(r.true_class);
        buffer_ += ',';
        csv::append_fixed(buffer_, r.true_height_m, 1);
        buffer_ += ',';
        csv::append_int(buffer_, r.serving_cell);
        buffer_ += ',';
        csv::append_fixed(buffer_, r.rssi_dbm, 4);
        for (int k = 0; k < reported_cells_; ++k) {
            buffer_ += ',';
            if (k < static_cast<int>(r.cell_rsrps.size())) {
                csv::append_int(buffer_, r.cell_rsrps[k].cell_id);
                buffer_ += ',';
                csv::append_fixed(buffer_, r.cell_rsrps[k].rsrp_dbm, 4);
            } else {
                buffer_ += ',';
            }
        }
        buffer_ += ',';
        csv::append_fixed(buffer_, r.serving_rsrp_dbm, 4);
        buffer_ += '\n';
        ++rows_;
    }
    if (buffer_.size() > (1u << 20)) {
        out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
        buffer_.clear();
        if (!out_) throw IoError(path_, "write failed");
    }
}

void TraceWriter::close() {
    if (!out_.is_open()) return;
    out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    buffer_.clear();
    out_.close();
    if (out_.fail()) throw IoError(path_, "write failed");
}

void read_trace(const std::string& path, const std::function<void(const MeasurementReport&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open trace file");
    std::string line;
    if (!std::getline(in, line)) throw IoError(path, "empty trace file");
    std::vector<std::string_view> fields;
    csv::split(line, fields);
    // 6 leading columns, N pairs, 1 trailing column.
    if (fields.size() < 9 || (fields.size() - 7) % 2 != 0 || fields[0] != "t_s")
        throw IoError(path, "unrecognised trace header");
    const std::size_t pairs = (fields.size() - 7) / 2;

    MeasurementReport r;
    std::int64_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        csv::split(line, fields);
        if (fields.size() != 7 + 2 * pairs)
            throw IoError(path, "line " + std::to_string(lineno) + ": wrong column count");
        try {
            r.t_s = csv::parse<double>(fields[0], "t_s");
            r.ue_id = csv::parse<int>(fields[1], "ue_id");
            r.true_class = parse_ue_class(fields[2]);
            r.true_height_m = csv::parse<double>(fields[3], "true_height_m");
            r.serving_cell = csv::parse<int>(fields[4], "serving_cell");
            r.rssi_dbm = csv::parse<double>(fields[5], "rssi_dbm");
            r.cell_rsrps.clear();
            bool serving_listed = false;
            for (std::size_t k = 0; k < pairs; ++k) {
                const auto cell = fields[6 + 2 * k];
                if (cell.empty()) continue;
                CellRsrp cr{csv::parse<int>(cell, "rsrp cell"),
                            csv::parse<double>(fields[7 + 2 * k], "rsrp dbm")};
                serving_listed = serving_listed || cr.cell_id == r.serving_cell;
                r.cell_rsrps.push_back(cr);
            }
            r.serving_rsrp_dbm = csv::parse<double>(fields[6 + 2 * pairs], "serving_rsrp_dbm");
            if (!serving_listed) r.cell_rsrps.push_back({r.serving_cell, r.serving_rsrp_dbm});
        } catch (const IoError&) {
            throw;
        } catch (const Error& e) {
            throw IoError(path, "line " + std::to_string(lineno) + ": " + e.what());
        }
        fn(r);
    }
}

void write_summary_jsonl(const std::string& path, const SimulationSummary& s,
                         const std::string& trace_path) {
    nlohmann::json j;
    j["record"] = "simulation_summary";
    j["trace"] = trace_path;
    j["reports"] = s.report_count;
    j["ticks"] = s.tick_count;
    j["cells"] = s.cell_count;
    j["handovers"] = s.handover_count;
    j["deployment_seed"] = s.deployment_seed;
    j["simulation_seed"] = s.sim_seed;
    for (int c = 0; c < kUeClassCount; ++c) {
        const auto name = std::string(to_string(static_cast<UeClass>(c)));
        j["ues"][name] = s.ues_by_class[c];
        j["handovers_by_class"][name] = s.handovers_by_class[c];
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError(path, "cannot open summary file");
    out << j.dump() << '\n';
    if (!out) throw IoError(path, "write failed");
}

}  // namespace rdd
