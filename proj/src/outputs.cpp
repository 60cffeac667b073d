#include "gridflow/outputs.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>

#include "gridflow/errors.hpp"
#include "gridflow/units.hpp"

namespace gridflow {
namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) raise(Errc::io_failure, "cannot create directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::io_failure, "cannot open '" + path + "' for writing");
    return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) raise(Errc::io_failure, "short write to '" + path + "'");
}

std::string fmt(double v) { return units::format_double(v); }

std::optional<double> transatlantic_gbps(const TopologySpec& topology) {
    for (const LinkSpec& link : topology.links) {
        const bool match = (link.a == "T0" && link.b == "T1-US1") ||
                           (link.a == "T1-US1" && link.b == "T0");
        if (match) return link.capacity_bps / units::bytes_per_second_per_gbps;
    }
    return std::nullopt;
}

void write_stats_row(std::ostream& out, const std::string& label, const TransferStats& stats) {
    out << "  " << label << ": count=" << stats.count << " mean_s=" << fmt(stats.mean_s)
        << " median_s=" << fmt(stats.median_s) << " p95_s=" << fmt(stats.p95_s)
        << " bytes=" << fmt(stats.total_bytes) << '\n';
}

void write_summary(const Simulation& sim, const std::string& path) {
    std::ofstream out = open_out(path);
    const ScenarioConfig& cfg = sim.scenario();
    const Network& net = sim.network();
    const MetricsRecorder& metrics = sim.metrics();

    char digest[32];
    std::snprintf(digest, sizeof digest, "%016llx",
                  static_cast<unsigned long long>(scenario_digest(cfg)));
    out << "scenario_digest: " << digest << '\n';
    out << "seed: " << cfg.seed << '\n';
    out << "duration_s: " << fmt(cfg.duration) << '\n';
    out << "agent_enabled: " << (cfg.agent_enabled ? "on" : "off") << '\n';
    if (auto gbps = transatlantic_gbps(cfg.topology))
        out << "transatlantic_gbps: " << fmt(*gbps) << '\n';
    out << "events_dispatched: " << sim.events_dispatched() << '\n';
    out << "raw_files_recorded: " << sim.raw_files_recorded() << '\n';
    out << "dst_files_created: " << sim.dst_files_created() << '\n';
    out << "files_reprocessed: " << sim.files_reprocessed() << '\n';

    double completed_bytes = 0.0;
    for (const FlowRecord& rec : metrics.flows()) completed_bytes += rec.bytes;
    out << "flows_completed: " << metrics.flows().size() << '\n';
    out << "bytes_completed: " << fmt(completed_bytes) << '\n';

    out << "\ntransfer_times_s (completed transfers, started->completed):\n";
    for (FileClass cls : {FileClass::raw, FileClass::dst}) {
        for (std::size_t id = 0; id < net.node_count(); ++id) {
            if (net.transit(static_cast<NodeId>(id))) continue;
            const std::string& name = net.node_name(static_cast<NodeId>(id));
            const TransferStats stats = metrics.transfer_stats(cls, name);
            if (stats.count == 0) continue;
            write_stats_row(out, std::string(file_class_name(cls)) + " to " + name, stats);
        }
        const TransferStats all = metrics.transfer_stats(cls);
        if (all.count != 0)
            write_stats_row(out, std::string(file_class_name(cls)) + " to all", all);
    }

    out << "\nwindow_gathering_runs:\n";
    if (sim.analyses().empty()) out << "  none\n";
    for (const AnalysisReport& report : sim.analyses()) {
        out << "  " << report.center << ": started_at=" << fmt(report.started_at)
            << " window_files=" << report.candidates << " fetches=" << report.fetches;
        if (report.completed)
            out << " completed_at=" << fmt(report.completed_at)
                << " duration_s=" << fmt(report.completed_at - report.started_at) << '\n';
        else
            out << " incomplete fetched=" << report.fetched << '\n';
    }

    out << "\nlink_totals_bytes (per direction, whole run):\n";
    for (std::uint32_t d = 0; d < net.link_count() * 2; ++d)
        out << "  " << net.directed_link_label(d) << ": " << fmt(metrics.total_bytes(d)) << '\n';

    out << "\nqueued_backlog (transfers waiting behind outbound limits, per crossed direction):\n";
    for (std::uint32_t d = 0; d < net.link_count() * 2; ++d) {
        const auto& samples = metrics.backlog(d);
        std::uint32_t peak = 0;
        SimTime peak_at = 0.0;
        for (const BacklogSample& s : samples) {
            if (s.queued > peak) {
                peak = s.queued;
                peak_at = s.t;
            }
        }
        out << "  " << net.directed_link_label(d) << ": peak=" << peak;
        if (peak > 0) out << " at_t=" << fmt(peak_at);
        if (!samples.empty()) out << " final=" << samples.back().queued;
        out << '\n';
    }

    finish_out(out, path);
}

} // namespace

void write_outputs(const Simulation& sim, const std::string& out_dir) {
    ensure_dir(out_dir);
    {
        const std::string path = out_dir + "/flows.csv";
        std::ofstream out = open_out(path);
        sim.metrics().write_flows_csv(out);
        finish_out(out, path);
    }
    {
        const std::string path = out_dir + "/link_usage.csv";
        std::ofstream out = open_out(path);
        sim.metrics().write_link_usage_csv(out, sim.scenario().duration);
        finish_out(out, path);
    }
    write_summary(sim, out_dir + "/summary.txt");
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& base,
                                const std::vector<double>& capacities_bps,
                                const std::string& out_dir, unsigned jobs) {
    if (capacities_bps.empty())
        raise(Errc::range_violation, "sweep needs at least one capacity");
    ensure_dir(out_dir);

    std::vector<SweepRow> rows(capacities_bps.size());
    auto run_one = [&base, &capacities_bps, &out_dir, &rows](std::size_t i) {
        ScenarioConfig cfg = base;
        set_transatlantic_capacity(cfg, capacities_bps[i]);
        cfg.sweep_capacities.clear();
        const auto sim = run_scenario(cfg);

        const double gbps = capacities_bps[i] / units::bytes_per_second_per_gbps;
        write_outputs(*sim, out_dir + "/" + fmt(gbps) + "Gbps");

        SweepRow row;
        row.capacity_gbps = gbps;
        row.dst_stats = sim->metrics().transfer_stats(FileClass::dst);
        row.raw_stats = sim->metrics().transfer_stats(FileClass::raw, std::nullopt,
                                                      ActivityId::raw_replication);
        row.analyses = sim->analyses();
        rows[i] = std::move(row);
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) run_one(i);
    } else {
        std::size_t next = 0;
        while (next < rows.size()) {
            std::vector<std::future<void>> batch;
            for (unsigned j = 0; j < jobs && next < rows.size(); ++j, ++next)
                batch.push_back(std::async(std::launch::async, run_one, next));
            for (auto& f : batch) f.get();
        }
    }

    const std::string path = out_dir + "/sweep_summary.csv";
    std::ofstream out = open_out(path);
    write_sweep_summary(out, base, rows);
    finish_out(out, path);
    return rows;
}

void write_sweep_summary(std::ostream& out, const ScenarioConfig& base,
                         const std::vector<SweepRow>& rows) {
    out << "capacity_gbps,mean_dst_transfer_s,mean_raw_transfer_s";
    for (const AnalysisSpec& spec : base.analysis_centers)
        out << ",analysis_" << spec.center << "_s";
    out << '\n';
    for (const SweepRow& row : rows) {
        out << fmt(row.capacity_gbps) << ',' << fmt(row.dst_stats.mean_s) << ','
            << fmt(row.raw_stats.mean_s);
        for (const AnalysisSpec& spec : base.analysis_centers) {
            out << ',';
            // First completed run of this center within the horizon.
            for (const AnalysisReport& report : row.analyses) {
                if (report.center == spec.center && report.completed) {
                    out << fmt(report.completed_at - report.started_at);
                    break;
                }
            }
        }
        out << '\n';
    }
}

} // namespace gridflow
