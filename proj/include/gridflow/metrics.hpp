#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridflow/network.hpp"

namespace gridflow {

/// One finished transfer, kept in completion order.
struct FlowRecord {
    FlowId flow_id = 0;
    std::uint64_t file_id = 0;
    FileClass file_class = FileClass::raw;
    ActivityId activity = ActivityId::raw_replication;
    std::string src;
    std::string dst;
    double bytes = 0.0;
    SimTime opened_at = 0.0;
    SimTime started_at = 0.0;
    SimTime completed_at = 0.0;

    double transfer_seconds() const { return completed_at - started_at; }
    double wait_seconds() const { return started_at - opened_at; }
};

/// Duration statistics over a filtered set of finished transfers.
/// median averages the two middle values for even counts; p95 is nearest-rank.
struct TransferStats {
    std::size_t count = 0;
    double total_bytes = 0.0;
    double mean_s = 0.0;
    double median_s = 0.0;
    double p95_s = 0.0;
};

struct BacklogSample {
    SimTime t = 0.0;
    std::uint32_t queued = 0;
};

/// Collects the run's observable output: per-transfer records, exact per-bin
/// byte counts for every directed link, and periodic queued-transfer samples.
/// Byte counts are exact because flow rates are piecewise constant: each
/// constant-rate interval is split across fixed-width time bins analytically.
class MetricsRecorder : public NetworkObserver {
public:
    MetricsRecorder(const Network& network, double bin_seconds);

    void on_interval(SimTime t0, SimTime t1, const std::vector<double>& directed_rate) override;
    void on_flow_closed(const Flow& flow, SimTime completed_at) override;

    /// Snapshot queued_crossing for every directed link at time t.
    void sample_backlogs(SimTime t);

    const std::vector<FlowRecord>& flows() const { return flows_; }
    double bin_seconds() const { return bin_; }
    /// Number of bins with any recorded traffic (trailing zero bins excluded).
    std::size_t populated_bins() const;
    double bin_bytes(std::uint32_t directed_index, std::size_t bin) const;
    double total_bytes(std::uint32_t directed_index) const;

    const std::vector<BacklogSample>& backlog(std::uint32_t directed_index) const {
        return backlog_[directed_index];
    }
    /// Most recent sample taken at or before t; nullopt if none yet.
    std::optional<std::uint32_t> backlog_at(std::uint32_t directed_index, SimTime t) const;

    TransferStats transfer_stats(std::optional<FileClass> file_class = std::nullopt,
                                 std::optional<std::string> dst = std::nullopt,
                                 std::optional<ActivityId> activity = std::nullopt) const;

    void write_flows_csv(std::ostream& out) const;
    void write_link_usage_csv(std::ostream& out, SimTime duration) const;

private:
    const Network& network_;
    double bin_;
    std::vector<FlowRecord> flows_;
    std::set<FlowId> recorded_ids_;
    std::vector<std::vector<double>> bin_bytes_; // [directed][bin]
    std::vector<std::vector<BacklogSample>> backlog_;
};

} // namespace gridflow
