#include "gridflow/network.hpp"

#include <algorithm>
#include <limits>

#include "gridflow/maxmin.hpp"

namespace gridflow {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

const char* file_class_name(FileClass cls) noexcept {
    return cls == FileClass::raw ? "RAW" : "DST";
}

const char* activity_name(ActivityId activity) noexcept {
    switch (activity) {
    case ActivityId::raw_replication: return "raw_replication";
    case ActivityId::production: return "production";
    case ActivityId::reproduction: return "reproduction";
    case ActivityId::analysis: return "analysis";
    }
    return "unknown";
}

Network::Network(const TopologySpec& topology, EventQueue& queue, double window_bytes,
                 std::uint32_t max_concurrent_outbound)
    : queue_(queue), window_bytes_(window_bytes), max_outbound_(max_concurrent_outbound) {
    if (topology.nodes.empty()) raise(Errc::disconnected_topology, "topology has no nodes");
    for (const NodeSpec& n : topology.nodes)
        nodes_.push_back(NodeRec{n.name, n.utc_offset_hours, n.transit});
    for (const LinkSpec& l : topology.links) {
        const NodeId a = node_id(l.a);
        const NodeId b = node_id(l.b);
        if (a == b) raise(Errc::cyclic_topology, "link '" + l.label() + "' is a self-loop");
        links_.push_back(LinkRec{a, b, l.capacity_bps, l.rtt_ms});
    }
    build_routes();
    out_queue_.resize(nodes_.size());
    active_outbound_.assign(nodes_.size(), 0);
    dlink_rate_.assign(links_.size() * 2, 0.0);
    last_advance_ = queue_.now();
}

NodeId Network::node_id(const std::string& name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].name == name) return static_cast<NodeId>(i);
    raise(Errc::unknown_node, "no node named '" + name + "'");
}

void Network::build_routes() {
    const std::size_t n = nodes_.size();

    // Adjacency in link declaration order keeps route hop order reproducible.
    std::vector<std::vector<Hop>> adjacency(n); // hop oriented away from the node
    std::vector<std::vector<NodeId>> neighbor(n);
    for (LinkId l = 0; l < links_.size(); ++l) {
        adjacency[links_[l].a].push_back(Hop{l, 0});
        neighbor[links_[l].a].push_back(links_[l].b);
        adjacency[links_[l].b].push_back(Hop{l, 1});
        neighbor[links_[l].b].push_back(links_[l].a);
    }

    // Tree test: connected with exactly n-1 links. Connectivity failure names
    // an unreached node; a connected surplus of links means a cycle (parallel
    // links included).
    {
        std::vector<char> seen(n, 0);
        std::vector<NodeId> frontier{0};
        seen[0] = 1;
        std::size_t reached = 1;
        while (!frontier.empty()) {
            std::vector<NodeId> next;
            for (NodeId u : frontier) {
                for (NodeId v : neighbor[u]) {
                    if (seen[v]) continue;
                    seen[v] = 1;
                    ++reached;
                    next.push_back(v);
                }
            }
            frontier = std::move(next);
        }
        if (reached != n) {
            for (NodeId v = 0; v < n; ++v)
                if (!seen[v])
                    raise(Errc::disconnected_topology,
                          "node '" + nodes_[v].name + "' is unreachable");
        }
        if (links_.size() != n - 1)
            raise(Errc::cyclic_topology, std::to_string(links_.size()) + " links over " +
                                             std::to_string(n) + " nodes cannot be a tree");
    }

    routes_.assign(n, std::vector<Path>(n));
    rtt_table_.assign(n, std::vector<double>(n, 0.0));
    for (NodeId src = 0; src < n; ++src) {
        std::vector<Hop> prev_hop(n);
        std::vector<NodeId> prev_node(n, src);
        std::vector<char> seen(n, 0);
        seen[src] = 1;
        std::vector<NodeId> frontier{src};
        while (!frontier.empty()) {
            std::vector<NodeId> next;
            for (NodeId u : frontier) {
                for (std::size_t i = 0; i < neighbor[u].size(); ++i) {
                    const NodeId v = neighbor[u][i];
                    if (seen[v]) continue;
                    seen[v] = 1;
                    prev_hop[v] = adjacency[u][i];
                    prev_node[v] = u;
                    next.push_back(v);
                }
            }
            frontier = std::move(next);
        }
        for (NodeId dst = 0; dst < n; ++dst) {
            if (dst == src) continue;
            std::vector<Hop> hops;
            double rtt = 0.0;
            NodeId walk = dst;
            while (walk != src) {
                hops.push_back(prev_hop[walk]);
                rtt += links_[prev_hop[walk].link].rtt_ms;
                walk = prev_node[walk];
            }
            std::reverse(hops.begin(), hops.end());
            routes_[src][dst].hops = std::move(hops);
            rtt_table_[src][dst] = rtt;
        }
    }
}

const Path& Network::route(NodeId src, NodeId dst) const {
    if (src >= nodes_.size() || dst >= nodes_.size())
        raise(Errc::unknown_node, "route endpoint out of range");
    if (src == dst) raise(Errc::unknown_node, "route endpoints are the same node");
    if (nodes_[src].transit)
        raise(Errc::unknown_node, "'" + nodes_[src].name + "' is transit-only, not an endpoint");
    if (nodes_[dst].transit)
        raise(Errc::unknown_node, "'" + nodes_[dst].name + "' is transit-only, not an endpoint");
    return routes_[src][dst];
}

double Network::path_rtt_ms(NodeId src, NodeId dst) const {
    route(src, dst); // endpoint validation
    return rtt_table_[src][dst];
}

std::vector<NodeId> Network::adjacent(NodeId node) const {
    std::vector<NodeId> result;
    for (const LinkRec& link : links_) {
        if (link.a == node) result.push_back(link.b);
        else if (link.b == node) result.push_back(link.a);
    }
    return result;
}

std::optional<std::uint32_t> Network::directed_link_between(NodeId from, NodeId to) const {
    for (LinkId l = 0; l < links_.size(); ++l) {
        if (links_[l].a == from && links_[l].b == to) return l * 2u;
        if (links_[l].b == from && links_[l].a == to) return l * 2u + 1u;
    }
    return std::nullopt;
}

std::string Network::directed_link_label(std::uint32_t directed_index) const {
    const LinkRec& link = links_[directed_index / 2];
    if (directed_index % 2 == 0) return nodes_[link.a].name + "->" + nodes_[link.b].name;
    return nodes_[link.b].name + "->" + nodes_[link.a].name;
}

std::uint32_t Network::queued_crossing(std::uint32_t directed_index) const {
    std::uint32_t count = 0;
    for (const auto& queue : out_queue_) {
        for (FlowId id : queue) {
            const auto it = flows_.find(id);
            if (it != flows_.end() && it->second.path->crosses(directed_index)) ++count;
        }
    }
    return count;
}

const Flow* Network::find_flow(FlowId id) const {
    const auto it = flows_.find(id);
    return it == flows_.end() ? nullptr : &it->second;
}

FlowId Network::open_flow(NodeId src, NodeId dst, double bytes, FlowTags tags,
                          CompletionFn on_complete) {
    if (!(bytes > 0.0))
        raise(Errc::zero_size_transfer, "transfer of " + std::to_string(bytes) + " bytes");
    const Path& path = route(src, dst); // validates endpoints

    advance_to(queue_.now());

    Flow flow;
    flow.id = next_flow_id_++;
    flow.src = src;
    flow.dst = dst;
    flow.total_bytes = bytes;
    flow.rtt_ms = rtt_table_[src][dst];
    flow.cap = flow.rtt_ms > 0.0 ? window_bytes_ / (flow.rtt_ms / 1000.0) : inf;
    flow.opened_at = queue_.now();
    flow.started_at = queue_.now();
    flow.state = FlowState::queued;
    flow.tags = tags;
    flow.path = &path;

    const FlowId id = flow.id;
    auto [it, inserted] = flows_.emplace(id, std::move(flow));
    (void)inserted;
    if (on_complete) completion_fns_.emplace(id, std::move(on_complete));

    const bool slot_free = max_outbound_ == 0 || active_outbound_[src] < max_outbound_;
    if (slot_free && out_queue_[src].empty()) {
        start_flow(it->second);
        recompute_rates();
        schedule_next_completion();
    } else {
        out_queue_[src].push_back(id);
    }
    return id;
}

void Network::start_flow(Flow& flow) {
    flow.state = FlowState::live;
    flow.started_at = queue_.now();
    ++active_outbound_[flow.src];
    ++live_count_;
}

void Network::release_queued(NodeId node) {
    while (!out_queue_[node].empty() &&
           (max_outbound_ == 0 || active_outbound_[node] < max_outbound_)) {
        const FlowId id = out_queue_[node].front();
        out_queue_[node].pop_front();
        auto it = flows_.find(id);
        if (it == flows_.end()) continue;
        start_flow(it->second);
    }
}

void Network::advance_to(SimTime t) {
    if (t < last_advance_) return;
    if (t > last_advance_) {
        if (observer_ != nullptr && live_count_ > 0)
            observer_->on_interval(last_advance_, t, dlink_rate_);
        const double dt = t - last_advance_;
        for (auto& [id, flow] : flows_) {
            if (flow.state != FlowState::live || flow.rate <= 0.0) continue;
            flow.bytes_done = std::min(flow.total_bytes, flow.bytes_done + flow.rate * dt);
        }
    }
    last_advance_ = t;
}

void Network::recompute_rates() {
    std::vector<double> capacity(links_.size() * 2);
    for (LinkId l = 0; l < links_.size(); ++l)
        capacity[l * 2] = capacity[l * 2 + 1] = links_[l].capacity_bps;

    std::vector<AllocFlow> alloc;
    std::vector<Flow*> live;
    for (auto& [id, flow] : flows_) {
        if (flow.state != FlowState::live) continue;
        AllocFlow af;
        af.cap = flow.cap;
        af.links.reserve(flow.path->hops.size());
        for (const Hop& hop : flow.path->hops) af.links.push_back(hop.directed());
        alloc.push_back(std::move(af));
        live.push_back(&flow);
    }

    const std::vector<double> rates = maxmin_fair_rates(capacity, alloc);
    std::fill(dlink_rate_.begin(), dlink_rate_.end(), 0.0);
    for (std::size_t i = 0; i < live.size(); ++i) {
        live[i]->rate = rates[i];
        for (const Hop& hop : live[i]->path->hops) dlink_rate_[hop.directed()] += rates[i];
    }
}

void Network::schedule_next_completion() {
    if (completion_event_.valid()) {
        queue_.cancel(completion_event_);
        completion_event_ = EventHandle{};
    }
    if (live_count_ == 0) return;

    const Flow* best = nullptr;
    double best_dt = inf;
    for (const auto& [id, flow] : flows_) {
        if (flow.state != FlowState::live) continue;
        if (flow.rate <= 0.0) continue;
        const double dt = std::max(0.0, (flow.total_bytes - flow.bytes_done) / flow.rate);
        if (dt < best_dt) {
            best_dt = dt;
            best = &flow;
        }
    }
    if (best == nullptr)
        raise(Errc::stalled_network, "live transfers exist but none makes progress");

    const FlowId id = best->id;
    completion_event_ = queue_.schedule(
        queue_.now() + best_dt, Event{EventKind::FlowCompleted, id, 0, 0},
        [this](const Event& ev) { on_completion_event(ev.a); });
}

void Network::on_completion_event(FlowId id) {
    completion_event_ = EventHandle{};
    auto it = flows_.find(id);
    if (it == flows_.end() || it->second.state != FlowState::live) return;

    advance_to(queue_.now());

    Flow flow = std::move(it->second);
    flow.bytes_done = flow.total_bytes; // the event time solved exactly this
    flow.state = FlowState::closed;
    flows_.erase(it);
    --active_outbound_[flow.src];
    --live_count_;

    if (observer_ != nullptr) observer_->on_flow_closed(flow, queue_.now());

    release_queued(flow.src);
    recompute_rates();
    schedule_next_completion();

    CompletionFn continuation;
    if (auto fn = completion_fns_.find(id); fn != completion_fns_.end()) {
        continuation = std::move(fn->second);
        completion_fns_.erase(fn);
    }
    if (continuation) continuation(flow);
}

} // namespace gridflow
