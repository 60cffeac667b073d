#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridflow/event_queue.hpp"
#include "gridflow/scenario.hpp"

namespace gridflow {

using NodeId = std::uint32_t;
using LinkId = std::uint32_t;
using FlowId = std::uint64_t;

enum class FileClass : std::uint8_t { raw, dst };
enum class ActivityId : std::uint8_t { raw_replication, production, reproduction, analysis };

const char* file_class_name(FileClass cls) noexcept;
const char* activity_name(ActivityId activity) noexcept;

/// One hop of a route: which link, and whether it is crossed a->b (0) or b->a (1).
struct Hop {
    LinkId link;
    std::uint8_t dir;
    std::uint32_t directed() const noexcept { return link * 2u + dir; }
};

struct Path {
    std::vector<Hop> hops;
    bool crosses(std::uint32_t directed_index) const noexcept {
        for (const Hop& hop : hops)
            if (hop.directed() == directed_index) return true;
        return false;
    }
};

struct FlowTags {
    std::uint64_t file_id = 0;
    FileClass file_class = FileClass::raw;
    ActivityId activity = ActivityId::raw_replication;
};

enum class FlowState : std::uint8_t { queued, live, closed };

struct Flow {
    FlowId id = 0;
    NodeId src = 0;
    NodeId dst = 0;
    double total_bytes = 0.0;
    double bytes_done = 0.0;
    double rate = 0.0;    // current bytes/s, piecewise constant between recomputes
    double rtt_ms = 0.0;  // sum of link contributions along the path
    double cap = 0.0;     // window / rtt ceiling
    SimTime opened_at = 0.0;
    SimTime started_at = 0.0; // left the outbound queue
    FlowState state = FlowState::queued;
    FlowTags tags;
    const Path* path = nullptr;
};

/// Listens to the network's piecewise-constant rate timeline and completions.
class NetworkObserver {
public:
    virtual ~NetworkObserver() = default;
    /// Rates were constant over [t0, t1); directed_rate is indexed by link*2+dir.
    virtual void on_interval(SimTime t0, SimTime t1, const std::vector<double>& directed_rate) = 0;
    virtual void on_flow_closed(const Flow& flow, SimTime completed_at) = 0;
};

/// Flow-level network simulation on a tree topology.
///
/// Links are full duplex with independent per-direction capacity. Every live
/// flow gets the max-min fair rate subject to its window/RTT cap; rates only
/// change when the flow set changes, so byte progress integrates exactly.
/// Each node starts at most max_concurrent_outbound transfers; the rest wait
/// in FIFO order. The network schedules its own FlowCompleted events.
class Network {
public:
    using CompletionFn = std::function<void(const Flow&)>;

    Network(const TopologySpec& topology, EventQueue& queue, double window_bytes,
            std::uint32_t max_concurrent_outbound);

    NodeId node_id(const std::string& name) const;
    const std::string& node_name(NodeId id) const { return nodes_[id].name; }
    bool transit(NodeId id) const { return nodes_[id].transit; }
    int utc_offset_hours(NodeId id) const { return nodes_[id].utc_offset_hours; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t link_count() const { return links_.size(); }

    /// Unique tree route between two non-transit endpoints.
    const Path& route(NodeId src, NodeId dst) const;
    double path_rtt_ms(NodeId src, NodeId dst) const;

    /// Directly linked neighbors, in link declaration order.
    std::vector<NodeId> adjacent(NodeId node) const;

    /// Directed capacity index for the link between two adjacent nodes, oriented
    /// from `from` to `to`; nullopt when they are not directly linked.
    std::optional<std::uint32_t> directed_link_between(NodeId from, NodeId to) const;
    std::string directed_link_label(std::uint32_t directed_index) const;
    std::string link_label(LinkId link) const {
        return nodes_[links_[link].a].name + "-" + nodes_[links_[link].b].name;
    }
    double link_capacity(LinkId link) const { return links_[link].capacity_bps; }

    FlowId open_flow(NodeId src, NodeId dst, double bytes, FlowTags tags,
                     CompletionFn on_complete = {});

    double allocated_bps(std::uint32_t directed_index) const { return dlink_rate_[directed_index]; }
    double residual_bps(std::uint32_t directed_index) const {
        return links_[directed_index / 2].capacity_bps - dlink_rate_[directed_index];
    }
    std::uint32_t active_outbound(NodeId node) const { return active_outbound_[node]; }
    std::uint32_t queued_outbound(NodeId node) const {
        return static_cast<std::uint32_t>(out_queue_[node].size());
    }
    /// Queued transfers anywhere whose route crosses the given directed link.
    std::uint32_t queued_crossing(std::uint32_t directed_index) const;
    std::size_t live_flow_count() const { return live_count_; }
    const Flow* find_flow(FlowId id) const;

    /// Brings byte progress up to the current clock; runner calls this at the
    /// horizon so metrics cover the full run.
    void advance_to(SimTime t);

    void set_observer(NetworkObserver* observer) { observer_ = observer; }

    double window_bytes() const { return window_bytes_; }

private:
    struct NodeRec {
        std::string name;
        int utc_offset_hours;
        bool transit;
    };
    struct LinkRec {
        NodeId a;
        NodeId b;
        double capacity_bps;
        double rtt_ms;
    };

    void build_routes();
    void start_flow(Flow& flow);
    void release_queued(NodeId node);
    void recompute_rates();
    void schedule_next_completion();
    void on_completion_event(FlowId id);

    std::vector<NodeRec> nodes_;
    std::vector<LinkRec> links_;
    std::vector<std::vector<Path>> routes_;      // [src][dst]
    std::vector<std::vector<double>> rtt_table_; // [src][dst], ms

    EventQueue& queue_;
    double window_bytes_;
    std::uint32_t max_outbound_; // 0 = unlimited

    std::map<FlowId, Flow> flows_; // queued + live, keyed by id: deterministic order
    std::map<FlowId, CompletionFn> completion_fns_;
    std::vector<std::deque<FlowId>> out_queue_;
    std::vector<std::uint32_t> active_outbound_;
    std::vector<double> dlink_rate_;
    std::size_t live_count_ = 0;
    FlowId next_flow_id_ = 1;
    SimTime last_advance_ = 0.0;
    EventHandle completion_event_;
    NetworkObserver* observer_ = nullptr;
};

} // namespace gridflow
