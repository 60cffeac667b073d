#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridflow/agent.hpp"
#include "gridflow/metrics.hpp"
#include "gridflow/network.hpp"
#include "gridflow/rng.hpp"
#include "gridflow/scenario.hpp"

namespace gridflow {

/// A RAW or DST file: size, creation time, origin, and which nodes hold a
/// complete copy. DST files keep a link to the RAW file they came from.
struct DataFile {
    std::uint64_t id = 0;
    FileClass file_class = FileClass::raw;
    double bytes = 0.0;
    SimTime created_at = 0.0;
    NodeId origin = 0;
    std::optional<std::uint64_t> parent;
    std::vector<NodeId> holders; // insertion order; origin first
};

/// Append-only file catalogue; ids are dense and creation-ordered, so a scan
/// over all() visits files in created_at order.
class FileRegistry {
public:
    std::uint64_t create(FileClass file_class, double bytes, SimTime at, NodeId origin,
                         std::optional<std::uint64_t> parent = std::nullopt);
    void add_holder(std::uint64_t file_id, NodeId node);
    bool holds(std::uint64_t file_id, NodeId node) const;
    const DataFile& get(std::uint64_t file_id) const;
    const std::vector<DataFile>& all() const { return files_; }

private:
    std::vector<DataFile> files_;
};

/// One window-gathering run: how many window files existed, how many had to be
/// fetched, and when the last fetch landed.
struct AnalysisReport {
    std::string center;
    SimTime started_at = 0.0;
    SimTime completed_at = 0.0; // meaningful only when completed
    std::size_t candidates = 0; // files inside the lookback window
    std::size_t fetches = 0;    // candidates not already held locally
    std::size_t fetched = 0;    // fetches finished so far
    bool completed = false;
};

/// One full simulation run: builds the network from the scenario, drives the
/// four activity generators through the event queue, and collects metrics.
///
/// Activities:
///  1. RAW recording at T0 back-to-back at raw_rate, each file replicated to
///     the T1 centers in round-robin order.
///  2. Production: every recorded RAW yields a DST (after processing_delay)
///     distributed from T0 to every T1 over the distribution tree.
///  3. Reprocessing: from reproduction_start, each T1 re-reads its own RAW
///     share in arrival order at reproduction_rate; each re-read emits a new
///     DST distributed to all other centers (T0 included).
///  4. Window gathering: each analysis center starts at its configured local
///     hour (first occurrence late enough to have a full lookback window) and
///     fetches every window RAW file it does not hold, sources chosen
///     dynamically, at most analysis_max_parallel in flight.
class Simulation {
public:
    explicit Simulation(ScenarioConfig config);

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Runs the clock to scenario().duration.
    void run();

    const ScenarioConfig& scenario() const { return cfg_; }
    const Network& network() const { return net_; }
    const MetricsRecorder& metrics() const { return metrics_; }
    const FileRegistry& files() const { return files_; }
    const std::vector<AnalysisReport>& analyses() const { return analyses_; }
    const TransferPlan* plan_for(std::uint64_t file_id) const;

    std::uint64_t raw_files_recorded() const { return raw_files_recorded_; }
    std::uint64_t dst_files_created() const { return dst_files_created_; }
    std::uint64_t files_reprocessed() const { return files_reprocessed_; }
    std::size_t events_dispatched() const { return events_dispatched_; }

    EventQueue& queue() { return queue_; }

private:
    struct AnalysisRun {
        NodeId center = 0;
        std::vector<std::uint64_t> pending; // fetch candidates, creation order
        std::size_t next = 0;
        std::size_t in_flight = 0;
    };

    void record_next_raw();
    void on_raw_arrived(std::uint64_t file_id, NodeId center);
    void produce_dst(std::uint64_t raw_id);
    void create_production_dst(std::uint64_t raw_id);
    double dst_size_for(const DataFile& raw, Rng& rng);
    void distribute(std::uint64_t file_id, NodeId root, const std::vector<NodeId>& destinations,
                    ActivityId activity);
    void launch_plan_edges(std::uint64_t file_id, NodeId at_node, ActivityId activity);
    void start_reproduction();
    void enqueue_for_reproduction(NodeId center, std::uint64_t file_id);
    void start_next_reprocess(NodeId center);
    void on_reprocess_done(NodeId center, std::uint64_t raw_id);
    void on_analysis_start(std::size_t spec_index);
    void issue_analysis_fetches(std::size_t run_index);
    void schedule_metric_sample(SimTime at);

    ScenarioConfig cfg_;
    EventQueue queue_;
    Network net_;
    MetricsRecorder metrics_;
    FileRegistry files_;
    Rng raw_size_rng_;
    Rng dst_size_rng_;
    Rng reprocess_size_rng_;

    NodeId t0_ = 0;
    std::vector<NodeId> t1s_; // round-robin order = declaration order
    std::vector<NodeId> agent_ids_;
    std::map<std::uint64_t, TransferPlan> plans_;

    std::uint64_t raw_index_ = 0;
    std::vector<std::deque<std::uint64_t>> reprocess_queue_; // per node id
    std::vector<double> reprocess_accum_;                    // fraction thinning
    std::vector<char> reprocess_busy_;
    bool reproduction_active_ = false;

    std::vector<AnalysisRun> analysis_runs_;
    std::vector<AnalysisReport> analyses_;

    std::uint64_t raw_files_recorded_ = 0;
    std::uint64_t dst_files_created_ = 0;
    std::uint64_t files_reprocessed_ = 0;
    std::size_t events_dispatched_ = 0;
    SimTime last_backlog_sample_ = -1.0;
};

/// Finalize the scenario, run it to its horizon, and hand back the simulation.
std::unique_ptr<Simulation> run_scenario(const ScenarioConfig& config);

} // namespace gridflow
