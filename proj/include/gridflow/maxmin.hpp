#pragma once

#include <cstdint>
#include <vector>

namespace gridflow {

/// One flow in a rate-allocation instance: the directed links it occupies
/// and its own rate ceiling (window / RTT; infinity when uncapped).
struct AllocFlow {
    double cap = 0.0;
    std::vector<std::uint32_t> links;
};

/// Max-min fair rates under per-directed-link capacities and per-flow caps.
///
/// Progressive filling, event-driven: every unfrozen flow rises at the same
/// level; a flow freezes when it reaches its cap or when a link it crosses
/// saturates. Equivalent to brute-force water-filling, but freezes whole
/// groups per step instead of stepping the level numerically.
std::vector<double> maxmin_fair_rates(const std::vector<double>& link_capacity,
                                      const std::vector<AllocFlow>& flows);

} // namespace gridflow
