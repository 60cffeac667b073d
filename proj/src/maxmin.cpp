#include "gridflow/maxmin.hpp"

#include <algorithm>
#include <limits>

namespace gridflow {

std::vector<double> maxmin_fair_rates(const std::vector<double>& link_capacity,
                                      const std::vector<AllocFlow>& flows) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n_links = link_capacity.size();
    const std::size_t n_flows = flows.size();

    std::vector<double> rate(n_flows, 0.0);
    std::vector<char> frozen(n_flows, 0);
    std::vector<double> frozen_used(n_links, 0.0); // rate already pinned on each link
    std::vector<std::uint32_t> unfrozen_count(n_links, 0);

    std::size_t remaining = 0;
    for (std::size_t f = 0; f < n_flows; ++f) {
        if (flows[f].cap <= 0.0) {
            frozen[f] = 1; // degenerate cap: the flow cannot move
            continue;
        }
        if (flows[f].links.empty() && flows[f].cap == inf) {
            rate[f] = inf; // nothing constrains it
            frozen[f] = 1;
            continue;
        }
        ++remaining;
        for (std::uint32_t l : flows[f].links) ++unfrozen_count[l];
    }

    double level = 0.0;
    while (remaining > 0) {
        // Next freeze level: earliest link saturation or flow cap.
        double next = inf;
        for (std::size_t l = 0; l < n_links; ++l) {
            if (unfrozen_count[l] == 0) continue;
            const double sat = (link_capacity[l] - frozen_used[l]) / unfrozen_count[l];
            next = std::min(next, sat);
        }
        for (std::size_t f = 0; f < n_flows; ++f)
            if (!frozen[f]) next = std::min(next, flows[f].cap);

        level = std::max(level, next);
        const double slack = 1e-12 * std::max(1.0, level);

        // Freeze capped flows first, then flows on saturated links; both kinds
        // sit at (or within epsilon of) the current level.
        for (std::size_t f = 0; f < n_flows; ++f) {
            if (frozen[f]) continue;
            if (flows[f].cap <= level + slack) {
                rate[f] = flows[f].cap;
                frozen[f] = 1;
                --remaining;
                for (std::uint32_t l : flows[f].links) {
                    frozen_used[l] += rate[f];
                    --unfrozen_count[l];
                }
            }
        }
        std::vector<char> saturated(n_links, 0);
        for (std::size_t l = 0; l < n_links; ++l) {
            if (unfrozen_count[l] == 0) continue;
            const double sat = (link_capacity[l] - frozen_used[l]) / unfrozen_count[l];
            if (sat <= level + slack) saturated[l] = 1;
        }
        for (std::size_t f = 0; f < n_flows; ++f) {
            if (frozen[f]) continue;
            bool stuck = false;
            for (std::uint32_t l : flows[f].links)
                if (saturated[l]) { stuck = true; break; }
            if (!stuck) continue;
            rate[f] = level;
            frozen[f] = 1;
            --remaining;
            for (std::uint32_t l : flows[f].links) {
                frozen_used[l] += level;
                --unfrozen_count[l];
            }
        }
    }
    return rate;
}

} // namespace gridflow
