#include "gridflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gridflow/errors.hpp"
#include "gridflow/units.hpp"

namespace gridflow {

MetricsRecorder::MetricsRecorder(const Network& network, double bin_seconds)
    : network_(network), bin_(bin_seconds) {
    if (!(bin_seconds > 0.0))
        raise(Errc::range_violation, "metric bin width must be positive");
    const std::size_t directed = network.link_count() * 2;
    bin_bytes_.resize(directed);
    backlog_.resize(directed);
}

void MetricsRecorder::on_interval(SimTime t0, SimTime t1,
                                  const std::vector<double>& directed_rate) {
    if (!(t1 > t0)) return;
    for (std::size_t d = 0; d < directed_rate.size(); ++d) {
        const double rate = directed_rate[d];
        if (rate <= 0.0) continue;
        auto& bins = bin_bytes_[d];
        std::size_t k = static_cast<std::size_t>(std::floor(t0 / bin_));
        for (;;) {
            const double bin_lo = static_cast<double>(k) * bin_;
            const double bin_hi = bin_lo + bin_;
            const double lo = std::max(t0, bin_lo);
            const double hi = std::min(t1, bin_hi);
            if (hi > lo) {
                if (bins.size() <= k) bins.resize(k + 1, 0.0);
                bins[k] += rate * (hi - lo);
            }
            if (bin_hi >= t1) break;
            ++k;
        }
    }
}

void MetricsRecorder::on_flow_closed(const Flow& flow, SimTime completed_at) {
    if (!recorded_ids_.insert(flow.id).second)
        raise(Errc::duplicate_record,
              "transfer " + std::to_string(flow.id) + " already recorded");
    FlowRecord rec;
    rec.flow_id = flow.id;
    rec.file_id = flow.tags.file_id;
    rec.file_class = flow.tags.file_class;
    rec.activity = flow.tags.activity;
    rec.src = network_.node_name(flow.src);
    rec.dst = network_.node_name(flow.dst);
    rec.bytes = flow.total_bytes;
    rec.opened_at = flow.opened_at;
    rec.started_at = flow.started_at;
    rec.completed_at = completed_at;
    flows_.push_back(std::move(rec));
}

void MetricsRecorder::sample_backlogs(SimTime t) {
    for (std::size_t d = 0; d < backlog_.size(); ++d)
        backlog_[d].push_back({t, network_.queued_crossing(static_cast<std::uint32_t>(d))});
}

std::size_t MetricsRecorder::populated_bins() const {
    std::size_t n = 0;
    for (const auto& bins : bin_bytes_) n = std::max(n, bins.size());
    return n;
}

double MetricsRecorder::bin_bytes(std::uint32_t directed_index, std::size_t bin) const {
    const auto& bins = bin_bytes_[directed_index];
    return bin < bins.size() ? bins[bin] : 0.0;
}

double MetricsRecorder::total_bytes(std::uint32_t directed_index) const {
    double sum = 0.0;
    for (double b : bin_bytes_[directed_index]) sum += b;
    return sum;
}

std::optional<std::uint32_t> MetricsRecorder::backlog_at(std::uint32_t directed_index,
                                                         SimTime t) const {
    const auto& samples = backlog_[directed_index];
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](SimTime v, const BacklogSample& s) { return v < s.t; });
    if (it == samples.begin()) return std::nullopt;
    return std::prev(it)->queued;
}

TransferStats MetricsRecorder::transfer_stats(std::optional<FileClass> file_class,
                                              std::optional<std::string> dst,
                                              std::optional<ActivityId> activity) const {
    std::vector<double> durations;
    TransferStats stats;
    for (const FlowRecord& rec : flows_) {
        if (file_class && rec.file_class != *file_class) continue;
        if (dst && rec.dst != *dst) continue;
        if (activity && rec.activity != *activity) continue;
        durations.push_back(rec.transfer_seconds());
        stats.total_bytes += rec.bytes;
    }
    stats.count = durations.size();
    if (durations.empty()) return stats;

    double sum = 0.0;
    for (double v : durations) sum += v;
    stats.mean_s = sum / static_cast<double>(durations.size());

    std::sort(durations.begin(), durations.end());
    const std::size_t n = durations.size();
    stats.median_s = (n % 2 == 1) ? durations[n / 2]
                                  : 0.5 * (durations[n / 2 - 1] + durations[n / 2]);
    const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
    stats.p95_s = durations[std::max<std::size_t>(rank, 1) - 1];
    return stats;
}

void MetricsRecorder::write_flows_csv(std::ostream& out) const {
    out << "flow_id,file_id,class,activity,src,dst,bytes,opened_at,started_at,completed_at\n";
    for (const FlowRecord& rec : flows_) {
        out << rec.flow_id << ',' << rec.file_id << ',' << file_class_name(rec.file_class)
            << ',' << activity_name(rec.activity) << ',' << rec.src << ',' << rec.dst << ','
            << units::format_double(rec.bytes) << ',' << units::format_double(rec.opened_at)
            << ',' << units::format_double(rec.started_at) << ','
            << units::format_double(rec.completed_at) << '\n';
    }
}

void MetricsRecorder::write_link_usage_csv(std::ostream& out, SimTime duration) const {
    out << "bin_start,link,direction,bytes,utilization\n";
    const std::size_t nbins =
        static_cast<std::size_t>(std::ceil(duration / bin_ - 1e-9));
    const std::size_t directed = network_.link_count() * 2;
    for (std::size_t k = 0; k < nbins; ++k) {
        const double bin_lo = static_cast<double>(k) * bin_;
        const double covered = std::min(bin_, duration - bin_lo);
        for (std::size_t d = 0; d < directed; ++d) {
            const double bytes = bin_bytes(static_cast<std::uint32_t>(d), k);
            const double cap = network_.link_capacity(static_cast<LinkId>(d / 2));
            const double util = covered > 0.0 ? bytes / (cap * covered) : 0.0;
            out << units::format_double(bin_lo) << ','
                << network_.link_label(static_cast<LinkId>(d / 2)) << ','
                << network_.directed_link_label(static_cast<std::uint32_t>(d)) << ','
                << units::format_double(bytes) << ',' << units::format_double(util) << '\n';
        }
    }
}

} // namespace gridflow
