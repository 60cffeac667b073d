#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gridflow/activities.hpp"

namespace gridflow {

/// Write flows.csv, link_usage.csv, and summary.txt into out_dir (created if
/// absent). Two runs of the same scenario and seed produce byte-identical
/// files.
void write_outputs(const Simulation& sim, const std::string& out_dir);

/// Aggregates carried from one sweep run into sweep_summary.csv.
struct SweepRow {
    double capacity_gbps = 0.0;
    TransferStats dst_stats; // all DST-class transfers
    TransferStats raw_stats; // replication transfers only
    std::vector<AnalysisReport> analyses;
};

/// One run per capacity (B/s on the transatlantic link), each into
/// out_dir/<G>Gbps/, plus out_dir/sweep_summary.csv. jobs > 1 executes runs
/// concurrently; every output is identical to a serial sweep.
std::vector<SweepRow> run_sweep(const ScenarioConfig& base,
                                const std::vector<double>& capacities_bps,
                                const std::string& out_dir, unsigned jobs = 1);

/// One row per capacity: mean transfer times plus each analysis center's
/// window-gathering duration (blank until a run of it completes in horizon).
void write_sweep_summary(std::ostream& out, const ScenarioConfig& base,
                         const std::vector<SweepRow>& rows);

} // namespace gridflow
