#pragma once

#include <vector>

#include "gridflow/network.hpp"

namespace gridflow {

enum class PlanMode : std::uint8_t { direct, relayed };

struct PlanEdge {
    NodeId sender;
    NodeId receiver;
    bool operator==(const PlanEdge&) const = default;
};

/// Static multicast plan for distributing one file from root to a set of
/// centers. In relayed mode, branching happens at the root and at agent nodes
/// that are themselves destinations; every other receiver is a leaf. Each edge
/// becomes one store-and-forward transfer: a relay only sends a file onward
/// after holding all of it.
struct TransferPlan {
    NodeId root = 0;
    PlanMode mode = PlanMode::direct;
    std::vector<PlanEdge> edges;
};

/// Empty agent set yields a direct plan: root sends one copy per destination.
/// Otherwise edges follow the physical tree from relay to the next destination
/// in each branch, so a link between two relay nodes carries the file once.
TransferPlan distribution_tree(const Network& network, NodeId root,
                               const std::vector<NodeId>& destinations,
                               const std::vector<NodeId>& agent_nodes);

/// Transfers the given node must launch once it holds the file in full.
std::vector<PlanEdge> on_file_received(const TransferPlan& plan, NodeId node);

/// What a new src->dst transfer could sustain right now: the smallest residual
/// capacity along the route, capped by window/RTT, floored at 1 B/s.
double estimate_transfer_rate(const Network& network, NodeId src, NodeId dst);

/// Cheapest holder for a fetch by estimated completion time
/// size / (est_rate / (1 + active_outbound)); ties prefer lower RTT, then name.
NodeId select_source(const Network& network, const std::vector<NodeId>& holders,
                     NodeId requester, double file_bytes);

} // namespace gridflow
