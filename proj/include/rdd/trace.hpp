#pragma once

#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rdd/simulator.hpp"

namespace rdd {

// Trace CSV: one row per measurement report.
//
//   t_s,ue_id,true_class,true_height_m,serving_cell,rssi_dbm,
//   rsrp1_cell,rsrp1_dbm,...,rsrpN_cell,rsrpN_dbm,serving_rsrp_dbm
//
// N is max_reported_cells (8 by default). Missing entries are empty fields. The
// trailing serving_rsrp_dbm column keeps the serving measurement available when the
// serving cell is not among the N strongest. Powers are written with 4 decimals.
class TraceWriter {
public:
    TraceWriter(const std::string& path, int reported_cells);
    ~TraceWriter();
    TraceWriter(const TraceWriter&) = delete;
    TraceWriter& operator=(const TraceWriter&) = delete;

    void write(std::span<const MeasurementReport> reports);
    // Flushes and surfaces any deferred I/O error.
    void close();
    std::int64_t rows() const noexcept { return rows_; }

private:
    std::string path_;
    int reported_cells_;
    std::ofstream out_;
    std::string buffer_;
    std::int64_t rows_ = 0;
};

// Streams a trace file, calling fn for each row in file order.
void read_trace(const std::string& path, const std::function<void(const MeasurementReport&)>& fn);

std::string trace_header(int reported_cells);

// One JSON object per line with run metadata.
void write_summary_jsonl(const std::string& path, const SimulationSummary& summary,
                         const std::string& trace_path);

}  // namespace rdd
