#include "gridflow/activities.hpp"

#include <limits>
#include <utility>

#include "gridflow/errors.hpp"

namespace gridflow {
namespace {

ScenarioConfig finalized(ScenarioConfig config) {
    finalize_scenario(config);
    return config;
}

} // namespace

std::uint64_t FileRegistry::create(FileClass file_class, double bytes, SimTime at,
                                   NodeId origin, std::optional<std::uint64_t> parent) {
    DataFile file;
    file.id = files_.size();
    file.file_class = file_class;
    file.bytes = bytes;
    file.created_at = at;
    file.origin = origin;
    file.parent = parent;
    file.holders.push_back(origin);
    files_.push_back(std::move(file));
    return files_.back().id;
}

void FileRegistry::add_holder(std::uint64_t file_id, NodeId node) {
    DataFile& file = files_.at(file_id);
    for (NodeId holder : file.holders)
        if (holder == node) return;
    file.holders.push_back(node);
}

bool FileRegistry::holds(std::uint64_t file_id, NodeId node) const {
    const DataFile& file = files_.at(file_id);
    for (NodeId holder : file.holders)
        if (holder == node) return true;
    return false;
}

const DataFile& FileRegistry::get(std::uint64_t file_id) const { return files_.at(file_id); }

Simulation::Simulation(ScenarioConfig config)
    : cfg_(finalized(std::move(config))),
      net_(cfg_.topology, queue_, cfg_.window_bytes, cfg_.max_concurrent_outbound),
      metrics_(net_, cfg_.metric_bin),
      raw_size_rng_(substream_seed(cfg_.seed, 0)),
      dst_size_rng_(substream_seed(cfg_.seed, 1)),
      reprocess_size_rng_(substream_seed(cfg_.seed, 2)) {
    net_.set_observer(&metrics_);
    t0_ = net_.node_id("T0");
    for (const NodeSpec& node : cfg_.topology.nodes) {
        if (node.transit || node.name == "T0") continue;
        t1s_.push_back(net_.node_id(node.name));
    }
    for (const std::string& name : cfg_.agent_nodes) agent_ids_.push_back(net_.node_id(name));
    reprocess_queue_.resize(net_.node_count());
    reprocess_accum_.assign(net_.node_count(), 0.0);
    reprocess_busy_.assign(net_.node_count(), 0);
}

void Simulation::run() {
    const ActivityToggles& on = cfg_.activities;
    const bool any_files = on.raw_replication || on.production || on.reproduction || on.analysis;
    if (any_files)
        queue_.schedule(0.0, {EventKind::FileRecorded, 0, 0, 0},
                        [this](const Event&) { record_next_raw(); });
    if (on.reproduction && cfg_.reproduction_start <= cfg_.duration)
        queue_.schedule(cfg_.reproduction_start, {EventKind::ReproductionStart, 0, 0, 0},
                        [this](const Event&) { start_reproduction(); });
    if (on.analysis) {
        for (std::size_t i = 0; i < cfg_.analysis_centers.size(); ++i) {
            const AnalysisSpec& spec = cfg_.analysis_centers[i];
            const double lookback_s = spec.lookback_hours * 3600.0;
            // First daily occurrence late enough that the whole lookback window
            // lies inside the run.
            double start = local_start_time(cfg_.topology, spec.center, spec.local_hour);
            while (start < lookback_s) start += 86400.0;
            if (start > cfg_.duration) continue;
            queue_.schedule(start, {EventKind::AnalysisStart, i, 0, 0},
                            [this, i](const Event&) { on_analysis_start(i); });
        }
    }
    schedule_metric_sample(0.0);

    events_dispatched_ = queue_.run_until(cfg_.duration);
    net_.advance_to(cfg_.duration);
    if (last_backlog_sample_ < cfg_.duration) {
        metrics_.sample_backlogs(cfg_.duration);
        last_backlog_sample_ = cfg_.duration;
    }
}

void Simulation::schedule_metric_sample(SimTime at) {
    if (at > cfg_.duration) return;
    queue_.schedule(at, {EventKind::MetricSample, 0, 0, 0}, [this](const Event&) {
        metrics_.sample_backlogs(queue_.now());
        last_backlog_sample_ = queue_.now();
        schedule_metric_sample(queue_.now() + cfg_.metric_bin);
    });
}

void Simulation::record_next_raw() {
    const SimTime now = queue_.now();
    const double size = sample_file_size(raw_size_rng_, cfg_.raw_mean_size, cfg_.raw_sd_fraction);
    const std::uint64_t file_id = files_.create(FileClass::raw, size, now, t0_);
    ++raw_files_recorded_;
    const NodeId dest = t1s_[static_cast<std::size_t>(raw_index_ % t1s_.size())];
    ++raw_index_;
    if (cfg_.activities.raw_replication)
        net_.open_flow(t0_, dest, size, {file_id, FileClass::raw, ActivityId::raw_replication},
                       [this](const Flow& flow) { on_raw_arrived(flow.tags.file_id, flow.dst); });
    if (cfg_.activities.production) produce_dst(file_id);
    // Back-to-back recording: the next file starts the moment this one is done,
    // which sustains exactly raw_rate on average.
    const SimTime next = now + size / cfg_.raw_rate;
    if (next <= cfg_.raw_record_until)
        queue_.schedule(next, {EventKind::FileRecorded, raw_index_, 0, 0},
                        [this](const Event&) { record_next_raw(); });
}

void Simulation::on_raw_arrived(std::uint64_t file_id, NodeId center) {
    files_.add_holder(file_id, center);
    if (cfg_.activities.reproduction) enqueue_for_reproduction(center, file_id);
}

void Simulation::produce_dst(std::uint64_t raw_id) {
    if (cfg_.processing_delay <= 0.0) {
        create_production_dst(raw_id);
        return;
    }
    queue_.schedule(queue_.now() + cfg_.processing_delay, {EventKind::ActivityTick, raw_id, 0, 0},
                    [this, raw_id](const Event&) { create_production_dst(raw_id); });
}

void Simulation::create_production_dst(std::uint64_t raw_id) {
    const double size = dst_size_for(files_.get(raw_id), dst_size_rng_);
    const std::uint64_t file_id =
        files_.create(FileClass::dst, size, queue_.now(), t0_, raw_id);
    ++dst_files_created_;
    distribute(file_id, t0_, t1s_, ActivityId::production);
}

double Simulation::dst_size_for(const DataFile& raw, Rng& rng) {
    if (cfg_.dst_size_mode == "derived") return raw.bytes / cfg_.dst_ratio;
    return sample_file_size(rng, cfg_.raw_mean_size / cfg_.dst_ratio, cfg_.raw_sd_fraction);
}

void Simulation::distribute(std::uint64_t file_id, NodeId root,
                            const std::vector<NodeId>& destinations, ActivityId activity) {
    static const std::vector<NodeId> no_agents;
    TransferPlan plan =
        distribution_tree(net_, root, destinations, cfg_.agent_enabled ? agent_ids_ : no_agents);
    plans_.emplace(file_id, std::move(plan));
    launch_plan_edges(file_id, root, activity);
}

void Simulation::launch_plan_edges(std::uint64_t file_id, NodeId at_node, ActivityId activity) {
    const TransferPlan& plan = plans_.at(file_id);
    for (const PlanEdge& edge : on_file_received(plan, at_node))
        net_.open_flow(edge.sender, edge.receiver, files_.get(file_id).bytes,
                       {file_id, FileClass::dst, activity}, [this](const Flow& flow) {
                           files_.add_holder(flow.tags.file_id, flow.dst);
                           launch_plan_edges(flow.tags.file_id, flow.dst, flow.tags.activity);
                       });
}

const TransferPlan* Simulation::plan_for(std::uint64_t file_id) const {
    auto it = plans_.find(file_id);
    return it == plans_.end() ? nullptr : &it->second;
}

void Simulation::start_reproduction() {
    reproduction_active_ = true;
    for (NodeId center : t1s_) start_next_reprocess(center);
}

void Simulation::enqueue_for_reproduction(NodeId center, std::uint64_t file_id) {
    // Fraction thinning by error accumulation: over any long arrival sequence
    // the reprocessed share converges to reproduction_fraction exactly.
    reprocess_accum_[center] += cfg_.reproduction_fraction;
    if (reprocess_accum_[center] < 1.0 - 1e-9) return;
    reprocess_accum_[center] -= 1.0;
    reprocess_queue_[center].push_back(file_id);
    if (reproduction_active_) start_next_reprocess(center);
}

void Simulation::start_next_reprocess(NodeId center) {
    if (!reproduction_active_ || reprocess_busy_[center]) return;
    auto& pending = reprocess_queue_[center];
    if (pending.empty()) return;
    const std::uint64_t file_id = pending.front();
    pending.pop_front();
    reprocess_busy_[center] = 1;
    const double seconds = files_.get(file_id).bytes / cfg_.reproduction_rate;
    queue_.schedule(queue_.now() + seconds, {EventKind::ActivityTick, file_id, center, 1},
                    [this, center, file_id](const Event&) { on_reprocess_done(center, file_id); });
}

void Simulation::on_reprocess_done(NodeId center, std::uint64_t raw_id) {
    ++files_reprocessed_;
    const double size = dst_size_for(files_.get(raw_id), reprocess_size_rng_);
    const std::uint64_t file_id = files_.create(FileClass::dst, size, queue_.now(), center, raw_id);
    ++dst_files_created_;
    std::vector<NodeId> destinations;
    if (center != t0_) destinations.push_back(t0_);
    for (NodeId t1 : t1s_)
        if (t1 != center) destinations.push_back(t1);
    distribute(file_id, center, destinations, ActivityId::reproduction);
    reprocess_busy_[center] = 0;
    start_next_reprocess(center);
}

void Simulation::on_analysis_start(std::size_t spec_index) {
    const AnalysisSpec& spec = cfg_.analysis_centers[spec_index];
    const NodeId center = net_.node_id(spec.center);
    const SimTime start = queue_.now();
    const double window_lo = start - spec.lookback_hours * 3600.0;

    AnalysisRun run;
    run.center = center;
    AnalysisReport report;
    report.center = spec.center;
    report.started_at = start;
    for (const DataFile& file : files_.all()) {
        if (file.file_class != FileClass::raw) continue;
        if (file.created_at < window_lo || file.created_at >= start) continue;
        ++report.candidates;
        if (!files_.holds(file.id, center)) run.pending.push_back(file.id);
    }
    report.fetches = run.pending.size();
    if (run.pending.empty()) {
        report.completed = true;
        report.completed_at = start;
    }
    const std::size_t run_index = analysis_runs_.size();
    analysis_runs_.push_back(std::move(run));
    analyses_.push_back(std::move(report));
    issue_analysis_fetches(run_index);

    // Same local hour, next day.
    queue_.schedule(start + 86400.0, {EventKind::AnalysisStart, spec_index, 0, 0},
                    [this, spec_index](const Event&) { on_analysis_start(spec_index); });
}

void Simulation::issue_analysis_fetches(std::size_t run_index) {
    AnalysisRun& run = analysis_runs_[run_index];
    const std::uint32_t limit = cfg_.analysis_max_parallel == 0
                                    ? std::numeric_limits<std::uint32_t>::max()
                                    : cfg_.analysis_max_parallel;
    while (run.in_flight < limit && run.next < run.pending.size()) {
        const std::uint64_t file_id = run.pending[run.next];
        ++run.next;
        const DataFile& file = files_.get(file_id);
        std::vector<NodeId> holders;
        for (NodeId holder : file.holders)
            if (cfg_.analysis_include_t0 || holder != t0_) holders.push_back(holder);
        const NodeId source = select_source(net_, holders, run.center, file.bytes);
        ++run.in_flight;
        net_.open_flow(source, run.center, file.bytes,
                       {file_id, file.file_class, ActivityId::analysis},
                       [this, run_index](const Flow& flow) {
                           files_.add_holder(flow.tags.file_id, flow.dst);
                           AnalysisRun& r = analysis_runs_[run_index];
                           AnalysisReport& rep = analyses_[run_index];
                           --r.in_flight;
                           ++rep.fetched;
                           issue_analysis_fetches(run_index);
                           if (r.in_flight == 0 && r.next == r.pending.size()) {
                               rep.completed = true;
                               rep.completed_at = queue_.now();
                           }
                       });
    }
}

std::unique_ptr<Simulation> run_scenario(const ScenarioConfig& config) {
    auto sim = std::make_unique<Simulation>(config);
    sim->run();
    return sim;
}

} // namespace gridflow
