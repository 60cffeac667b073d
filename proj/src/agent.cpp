#include "gridflow/agent.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "gridflow/errors.hpp"

namespace gridflow {
namespace {

struct TreeWalk {
    const Network& network;
    std::vector<char> is_destination;
    std::vector<char> is_agent;
    std::vector<char> subtree_has_dest; // filled by mark()
    std::vector<char> visited;
    std::vector<PlanEdge> edges;

    explicit TreeWalk(const Network& net)
        : network(net),
          is_destination(net.node_count(), 0),
          is_agent(net.node_count(), 0),
          subtree_has_dest(net.node_count(), 0),
          visited(net.node_count(), 0) {}

    // Depth-first pass rooted at `u` marking which subtrees contain at least
    // one destination. The topology is a tree, so tracking the parent is
    // enough to orient edges.
    bool mark(NodeId u, NodeId parent) {
        bool found = is_destination[u] != 0;
        for (NodeId v : network.adjacent(u)) {
            if (v == parent) continue;
            if (mark(v, u)) found = true;
        }
        subtree_has_dest[u] = found ? 1 : 0;
        return found;
    }

    // Emit edges for every destination below `u`, sourcing each from the
    // nearest upstream relay. A destination that is also an agent becomes the
    // relay for everything deeper in its branch.
    void plan(NodeId relay, NodeId u, NodeId parent) {
        for (NodeId v : network.adjacent(u)) {
            if (v == parent) continue;
            if (!subtree_has_dest[v]) continue;
            if (is_destination[v]) {
                edges.push_back({relay, v});
                plan(is_agent[v] ? v : relay, v, u);
            } else {
                plan(relay, v, u);
            }
        }
    }
};

} // namespace

TransferPlan distribution_tree(const Network& network, NodeId root,
                               const std::vector<NodeId>& destinations,
                               const std::vector<NodeId>& agent_nodes) {
    if (root >= network.node_count())
        raise(Errc::unknown_node, "distribution root id " + std::to_string(root) + " out of range");

    TransferPlan plan;
    plan.root = root;

    if (agent_nodes.empty()) {
        plan.mode = PlanMode::direct;
        for (NodeId dst : destinations) {
            if (dst >= network.node_count())
                raise(Errc::unknown_node,
                      "destination id " + std::to_string(dst) + " out of range");
            if (dst == root) continue;
            plan.edges.push_back({root, dst});
        }
        return plan;
    }

    plan.mode = PlanMode::relayed;
    TreeWalk walk(network);
    for (NodeId dst : destinations) {
        if (dst >= network.node_count())
            raise(Errc::unknown_node,
                  "destination id " + std::to_string(dst) + " out of range");
        if (dst != root) walk.is_destination[dst] = 1;
    }
    for (NodeId a : agent_nodes) {
        if (a >= network.node_count())
            raise(Errc::unknown_node, "agent node id " + std::to_string(a) + " out of range");
        walk.is_agent[a] = 1;
    }

    constexpr NodeId no_parent = std::numeric_limits<NodeId>::max();
    walk.mark(root, no_parent);
    walk.plan(root, root, no_parent);

    // Every requested destination must be reachable through the tree walk.
    std::vector<char> planned(network.node_count(), 0);
    for (const PlanEdge& e : walk.edges) planned[e.receiver] = 1;
    for (NodeId dst : destinations) {
        if (dst != root && !planned[dst])
            raise(Errc::unreachable_destination,
                  "no route from " + network.node_name(root) + " to " + network.node_name(dst));
    }

    plan.edges = std::move(walk.edges);
    return plan;
}

std::vector<PlanEdge> on_file_received(const TransferPlan& plan, NodeId node) {
    std::vector<PlanEdge> out;
    for (const PlanEdge& e : plan.edges)
        if (e.sender == node) out.push_back(e);
    return out;
}

double estimate_transfer_rate(const Network& network, NodeId src, NodeId dst) {
    const Path& path = network.route(src, dst);
    double est = std::numeric_limits<double>::infinity();
    for (const Hop& hop : path.hops)
        est = std::min(est, network.residual_bps(hop.directed()));
    const double rtt_ms = network.path_rtt_ms(src, dst);
    if (rtt_ms > 0.0)
        est = std::min(est, network.window_bytes() / (rtt_ms / 1000.0));
    return std::max(est, 1.0);
}

NodeId select_source(const Network& network, const std::vector<NodeId>& holders,
                     NodeId requester, double file_bytes) {
    bool found = false;
    NodeId best = 0;
    double best_score = 0.0;
    double best_rtt = 0.0;

    for (NodeId holder : holders) {
        if (holder == requester) continue;
        if (holder >= network.node_count())
            raise(Errc::unknown_node, "holder id " + std::to_string(holder) + " out of range");
        const double est = estimate_transfer_rate(network, holder, requester);
        const double load = 1.0 + static_cast<double>(network.active_outbound(holder));
        const double score = file_bytes * load / est;
        const double rtt = network.path_rtt_ms(holder, requester);
        const bool better =
            !found || score < best_score ||
            (score == best_score &&
             (rtt < best_rtt ||
              (rtt == best_rtt && network.node_name(holder) < network.node_name(best))));
        if (better) {
            found = true;
            best = holder;
            best_score = score;
            best_rtt = rtt;
        }
    }

    if (!found)
        raise(Errc::no_holder,
              "no source holds the file for " + network.node_name(requester));
    return best;
}

} // namespace gridflow
