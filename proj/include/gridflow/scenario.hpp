#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridflow/rng.hpp"

namespace gridflow {

struct NodeSpec {
    std::string name;
    int utc_offset_hours = 0;
    bool transit = false; // transit-only nodes route traffic but never hold files
    bool operator==(const NodeSpec&) const = default;
};

struct LinkSpec {
    std::string a;
    std::string b;
    double capacity_bps = 0.0; // bytes per second, full duplex per direction
    double rtt_ms = 0.0;       // this link's contribution to any path crossing it
    bool operator==(const LinkSpec&) const = default;
    std::string label() const { return a + "-" + b; }
};

struct TopologySpec {
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    bool operator==(const TopologySpec&) const = default;
};

struct AnalysisSpec {
    std::string center;
    int local_hour = 9;
    double lookback_hours = 12.0;
    bool operator==(const AnalysisSpec&) const = default;
};

struct ActivityToggles {
    bool raw_replication = true;
    bool production = true;
    bool reproduction = true;
    bool analysis = true;
    bool operator==(const ActivityToggles&) const = default;
};

/// Full description of one simulation run. Parsed from the scenario document;
/// every field has a default, so an empty document is a valid scenario.
struct ScenarioConfig {
    TopologySpec topology;

    double raw_rate = 2e8;          // B/s of detector data recorded at T0
    double raw_mean_size = 2e9;     // mean RAW file size, bytes
    double raw_sd_fraction = 0.1;   // stddev as a fraction of the mean
    double dst_ratio = 10.0;        // RAW size / DST size
    std::string dst_size_mode = "sampled"; // "sampled" or "derived"

    double window_bytes = 8e6;      // per-flow rate cap = window_bytes / rtt
    std::uint32_t max_concurrent_outbound = 8; // 0 means unlimited
    bool agent_enabled = true;
    std::vector<std::string> agent_nodes{"T0", "T1-US1"};

    double reproduction_start = 43200.0;
    double reproduction_rate = 0.0;     // 0 resolves to raw_rate / #T1 centers
    double reproduction_fraction = 1.0; // share of each center's holdings to reprocess

    std::vector<AnalysisSpec> analysis_centers{{"T1-JP", 9, 12.0}};
    bool analysis_include_t0 = true;
    std::uint32_t analysis_max_parallel = 64;

    double processing_delay = 0.0;  // RAW recorded -> DST created
    double duration = 86400.0;
    double raw_record_until = -1.0; // <0 resolves to duration
    std::uint64_t seed = 1;
    double metric_bin = 300.0;
    ActivityToggles activities;

    std::vector<double> sweep_capacities; // B/s values for the transatlantic link

    bool operator==(const ScenarioConfig&) const = default;
};

/// The seven-center topology: T0 and three EU centers behind one router,
/// a transatlantic line to T1-US1, and T1-US2 / T1-JP hanging off T1-US1.
TopologySpec default_topology();
ScenarioConfig default_scenario();

/// Strict parse: unknown keys, malformed values, and out-of-range values are
/// rejected with the offending key and line number. Missing keys take defaults.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig parse_scenario_file(const std::string& path);

/// Canonical document; parse_scenario(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& config);

/// FNV-1a over the canonical serialization; stable run identity for summaries.
std::uint64_t scenario_digest(const ScenarioConfig& config);

/// Validates ranges and resolves derived defaults (reproduction_rate,
/// raw_record_until). parse_scenario applies this; direct builders should too.
void finalize_scenario(ScenarioConfig& config);

/// First SimTime >= 0 at which the center's wall clock reads local_hour:00.
/// Simulation epoch is UTC midnight, so t = ((local_hour - utc_offset) mod 24) h.
double local_start_time(const TopologySpec& topology, const std::string& center, int local_hour);

/// Point the T0 / T1-US1 link at a new per-direction capacity (B/s).
/// Raises UnknownNode when the topology has no such link.
void set_transatlantic_capacity(ScenarioConfig& config, double capacity_bps);

/// Normal(mean, sd_fraction * mean) truncated to +-4 sd, floored at one byte.
/// sd_fraction 0 returns the mean exactly without consuming randomness.
double sample_file_size(Rng& rng, double mean, double sd_fraction);

} // namespace gridflow
