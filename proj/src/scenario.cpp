#include "gridflow/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gridflow/errors.hpp"
#include "gridflow/units.hpp"

namespace gridflow {

namespace {

// ---------------------------------------------------------------------------
// Document tree: indentation-nested "key: value" lines, '#' comments,
// comma-separated scalar lists. Strict by construction: every key must be
// claimed by the schema walk below or parsing fails with UnknownKey.
// ---------------------------------------------------------------------------

struct PNode {
    std::string key;
    std::string scalar;
    int line = 0;
    std::vector<PNode> kids;
    bool used = false;
};

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void syntax_error(int line, const std::string& what) {
    raise(Errc::syntax_error, "line " + std::to_string(line) + ": " + what);
}

PNode parse_tree(std::string_view text) {
    PNode root;
    root.line = 0;
    std::vector<std::pair<int, PNode*>> stack{{-1, &root}};

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);

        int indent = 0;
        while (!line.empty() && line.front() == ' ') {
            line.remove_prefix(1);
            ++indent;
        }
        if (!line.empty() && line.front() == '\t')
            syntax_error(line_no, "tab indentation is not supported, use spaces");
        const std::string_view content = trim_view(line);
        if (content.empty()) continue;

        const std::size_t colon = content.find(':');
        if (colon == std::string_view::npos)
            syntax_error(line_no, "expected 'key: value' or 'key:'");
        const std::string key{trim_view(content.substr(0, colon))};
        const std::string scalar{trim_view(content.substr(colon + 1))};
        if (key.empty()) syntax_error(line_no, "empty key");

        while (stack.back().first >= indent) stack.pop_back();
        PNode* parent = stack.back().second;
        if (!parent->scalar.empty())
            syntax_error(line_no, "'" + parent->key + "' has a value and cannot also have nested keys");
        for (const PNode& sibling : parent->kids)
            if (sibling.key == key)
                syntax_error(line_no, "duplicate key '" + key + "'");

        parent->kids.push_back(PNode{key, scalar, line_no, {}, false});
        stack.emplace_back(indent, &parent->kids.back());
    }
    return root;
}

PNode* take(PNode& parent, const char* key) {
    for (PNode& kid : parent.kids) {
        if (kid.key == key) {
            kid.used = true;
            return &kid;
        }
    }
    return nullptr;
}

const std::string& need_scalar(const PNode& node) {
    if (!node.kids.empty())
        syntax_error(node.line, "'" + node.key + "' must be a single value, not a block");
    if (node.scalar.empty())
        syntax_error(node.line, "'" + node.key + "' is missing a value");
    return node.scalar;
}

void need_block(const PNode& node) {
    if (!node.scalar.empty())
        syntax_error(node.line, "'" + node.key + "' must be a block, not a single value");
}

void verify_all_used(const PNode& node) {
    for (const PNode& kid : node.kids) {
        if (!kid.used)
            raise(Errc::unknown_key,
                  "unrecognized key '" + kid.key + "' at line " + std::to_string(kid.line));
        verify_all_used(kid);
    }
}

std::vector<std::string> split_list(const PNode& node) {
    const std::string& text = need_scalar(node);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        const std::string item{trim_view(std::string_view(text).substr(start, comma - start))};
        if (item.empty()) syntax_error(node.line, "'" + node.key + "': empty list entry");
        out.push_back(item);
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void range_error(const std::string& key, const std::string& what) {
    raise(Errc::range_violation, "key '" + key + "': " + what);
}

double positive(double v, const std::string& key, const char* what) {
    if (!(v > 0.0)) range_error(key, std::string(what) + " must be positive");
    return v;
}

// ---------------------------------------------------------------------------
// Schema extraction
// ---------------------------------------------------------------------------

TopologySpec parse_topology(PNode& node) {
    need_block(node);
    TopologySpec topo;
    if (PNode* nodes = take(node, "nodes")) {
        need_block(*nodes);
        for (PNode& n : nodes->kids) {
            n.used = true;
            NodeSpec spec;
            spec.name = n.key;
            if (PNode* off = take(n, "utc_offset")) {
                const long long v = units::parse_integer(need_scalar(*off), "utc_offset");
                if (v < -12 || v > 14) range_error("utc_offset", "must lie in [-12, 14]");
                spec.utc_offset_hours = static_cast<int>(v);
            }
            if (PNode* transit = take(n, "transit"))
                spec.transit = units::parse_bool(need_scalar(*transit), "transit");
            topo.nodes.push_back(std::move(spec));
        }
    }
    if (PNode* links = take(node, "links")) {
        need_block(*links);
        for (PNode& l : links->kids) {
            l.used = true;
            LinkSpec spec;
            PNode* a = take(l, "a");
            PNode* b = take(l, "b");
            if (a == nullptr || b == nullptr)
                syntax_error(l.line, "link '" + l.key + "' needs both 'a' and 'b' endpoints");
            spec.a = need_scalar(*a);
            spec.b = need_scalar(*b);
            if (PNode* cap = take(l, "capacity"))
                spec.capacity_bps = units::parse_capacity(need_scalar(*cap), "capacity");
            else
                spec.capacity_bps = 10.0 * units::bytes_per_second_per_gbps;
            if (PNode* rtt = take(l, "rtt"))
                spec.rtt_ms = units::parse_millis(need_scalar(*rtt), "rtt");
            topo.links.push_back(std::move(spec));
        }
    }
    return topo;
}

} // namespace

TopologySpec default_topology() {
    TopologySpec topo;
    topo.nodes = {
        {"T0", 1, false},     {"ROUTER", 0, true},  {"T1-EU1", 1, false},
        {"T1-EU2", 1, false}, {"T1-EU3", 1, false}, {"T1-US1", -6, false},
        {"T1-US2", -6, false}, {"T1-JP", 9, false},
    };
    const double g10 = 10.0 * units::bytes_per_second_per_gbps;
    const double g25 = 2.5 * units::bytes_per_second_per_gbps;
    topo.links = {
        {"T0", "ROUTER", g10, 0.0},    {"ROUTER", "T1-EU1", g10, 20.0},
        {"ROUTER", "T1-EU2", g10, 25.0}, {"ROUTER", "T1-EU3", g10, 30.0},
        {"T0", "T1-US1", g25, 120.0},  {"T1-US1", "T1-US2", g10, 60.0},
        {"T1-US1", "T1-JP", g10, 240.0},
    };
    return topo;
}

ScenarioConfig default_scenario() {
    ScenarioConfig config;
    finalize_scenario(config);
    return config;
}

void finalize_scenario(ScenarioConfig& config) {
    if (config.topology.nodes.empty()) config.topology = default_topology();

    const TopologySpec& topo = config.topology;
    auto find_node = [&](const std::string& name) -> const NodeSpec* {
        for (const NodeSpec& n : topo.nodes)
            if (n.name == name) return &n;
        return nullptr;
    };

    for (const NodeSpec& n : topo.nodes) {
        if (n.name.empty()) range_error("topology.nodes", "node with empty name");
        if (std::count_if(topo.nodes.begin(), topo.nodes.end(),
                          [&](const NodeSpec& m) { return m.name == n.name; }) != 1)
            range_error("topology.nodes", "duplicate node '" + n.name + "'");
    }
    for (const LinkSpec& l : topo.links) {
        if (find_node(l.a) == nullptr)
            raise(Errc::unknown_node, "link endpoint '" + l.a + "' is not a declared node");
        if (find_node(l.b) == nullptr)
            raise(Errc::unknown_node, "link endpoint '" + l.b + "' is not a declared node");
        positive(l.capacity_bps, "topology.links." + l.label() + ".capacity", "link capacity");
        if (l.rtt_ms < 0.0)
            range_error("topology.links." + l.label() + ".rtt", "rtt cannot be negative");
    }

    const NodeSpec* origin = find_node("T0");
    if (origin == nullptr || origin->transit)
        raise(Errc::unknown_node, "scenario requires a non-transit recording origin named 'T0'");

    int t1_count = 0;
    for (const NodeSpec& n : topo.nodes)
        if (!n.transit && n.name != "T0") ++t1_count;
    if (t1_count == 0) range_error("topology.nodes", "no replica centers besides T0");

    positive(config.raw_rate, "raw_rate", "recording rate");
    if (config.raw_mean_size < 1.0) range_error("raw_mean_size", "must be at least one byte");
    if (config.raw_sd_fraction < 0.0 || config.raw_sd_fraction >= 1.0)
        range_error("raw_sd_fraction", "must lie in [0, 1)");
    if (!(config.dst_ratio > 1.0)) range_error("dst_ratio", "must exceed 1");
    if (config.dst_size_mode != "sampled" && config.dst_size_mode != "derived")
        range_error("dst_size_mode", "must be 'sampled' or 'derived'");
    positive(config.window_bytes, "window_bytes", "window");
    if (config.reproduction_start < 0.0) range_error("reproduction_start", "cannot be negative");
    if (config.reproduction_rate == 0.0)
        config.reproduction_rate = config.raw_rate / static_cast<double>(t1_count);
    positive(config.reproduction_rate, "reproduction_rate", "reprocessing rate");
    if (!(config.reproduction_fraction > 0.0) || config.reproduction_fraction > 1.0)
        range_error("reproduction_fraction", "must lie in (0, 1]");
    if (config.analysis_max_parallel == 0)
        range_error("analysis_max_parallel", "must be at least 1");
    if (config.processing_delay < 0.0) range_error("processing_delay", "cannot be negative");
    positive(config.duration, "duration", "duration");
    if (config.raw_record_until < 0.0) config.raw_record_until = config.duration;
    positive(config.metric_bin, "metric_bin", "metric bin width");

    for (const std::string& name : config.agent_nodes) {
        const NodeSpec* n = find_node(name);
        if (n == nullptr) raise(Errc::unknown_node, "agent_nodes entry '" + name + "' is not a node");
        if (n->transit) range_error("agent_nodes", "'" + name + "' is transit-only and cannot relay");
    }
    for (const AnalysisSpec& spec : config.analysis_centers) {
        const NodeSpec* n = find_node(spec.center);
        if (n == nullptr)
            raise(Errc::unknown_node, "analysis center '" + spec.center + "' is not a node");
        if (n->transit) range_error("analysis_centers", "'" + spec.center + "' is transit-only");
        if (spec.local_hour < 0 || spec.local_hour > 23)
            range_error("analysis_centers", "local_hour must lie in [0, 23]");
        positive(spec.lookback_hours, "analysis_centers", "lookback_hours");
    }
    for (double cap : config.sweep_capacities) positive(cap, "sweep", "sweep capacity");
}

ScenarioConfig parse_scenario(std::string_view text) {
    PNode root = parse_tree(text);
    ScenarioConfig config;
    config.topology.nodes.clear();

    if (PNode* n = take(root, "seed")) {
        const long long v = units::parse_integer(need_scalar(*n), "seed");
        if (v < 0) range_error("seed", "cannot be negative");
        config.seed = static_cast<std::uint64_t>(v);
    }
    if (PNode* n = take(root, "duration"))
        config.duration = units::parse_seconds(need_scalar(*n), "duration");
    if (PNode* n = take(root, "raw_rate"))
        config.raw_rate = units::parse_rate(need_scalar(*n), "raw_rate");
    if (PNode* n = take(root, "raw_mean_size"))
        config.raw_mean_size = units::parse_bytes(need_scalar(*n), "raw_mean_size");
    if (PNode* n = take(root, "raw_sd_fraction"))
        config.raw_sd_fraction = units::parse_real(need_scalar(*n), "raw_sd_fraction");
    if (PNode* n = take(root, "dst_ratio"))
        config.dst_ratio = units::parse_real(need_scalar(*n), "dst_ratio");
    if (PNode* n = take(root, "dst_size_mode")) config.dst_size_mode = need_scalar(*n);
    if (PNode* n = take(root, "window_bytes"))
        config.window_bytes = units::parse_bytes(need_scalar(*n), "window_bytes");
    if (PNode* n = take(root, "max_concurrent_outbound")) {
        const std::string& text_value = need_scalar(*n);
        if (text_value == "unlimited") {
            config.max_concurrent_outbound = 0;
        } else {
            const long long v = units::parse_integer(text_value, "max_concurrent_outbound");
            if (v < 1) range_error("max_concurrent_outbound", "must be >= 1 or 'unlimited'");
            config.max_concurrent_outbound = static_cast<std::uint32_t>(v);
        }
    }
    if (PNode* n = take(root, "agent_enabled"))
        config.agent_enabled = units::parse_bool(need_scalar(*n), "agent_enabled");
    if (PNode* n = take(root, "agent_nodes")) config.agent_nodes = split_list(*n);
    if (PNode* n = take(root, "reproduction_start"))
        config.reproduction_start = units::parse_seconds(need_scalar(*n), "reproduction_start");
    if (PNode* n = take(root, "reproduction_rate"))
        config.reproduction_rate = units::parse_rate(need_scalar(*n), "reproduction_rate");
    if (PNode* n = take(root, "reproduction_fraction"))
        config.reproduction_fraction = units::parse_real(need_scalar(*n), "reproduction_fraction");
    if (PNode* n = take(root, "analysis_centers")) {
        need_block(*n);
        config.analysis_centers.clear();
        for (PNode& center : n->kids) {
            center.used = true;
            AnalysisSpec spec;
            spec.center = center.key;
            if (PNode* h = take(center, "local_hour"))
                spec.local_hour = static_cast<int>(units::parse_integer(need_scalar(*h), "local_hour"));
            if (PNode* lb = take(center, "lookback_hours"))
                spec.lookback_hours = units::parse_real(need_scalar(*lb), "lookback_hours");
            config.analysis_centers.push_back(std::move(spec));
        }
    }
    if (PNode* n = take(root, "analysis_include_t0"))
        config.analysis_include_t0 = units::parse_bool(need_scalar(*n), "analysis_include_t0");
    if (PNode* n = take(root, "analysis_max_parallel")) {
        const long long v = units::parse_integer(need_scalar(*n), "analysis_max_parallel");
        if (v < 1) range_error("analysis_max_parallel", "must be >= 1");
        config.analysis_max_parallel = static_cast<std::uint32_t>(v);
    }
    if (PNode* n = take(root, "processing_delay"))
        config.processing_delay = units::parse_seconds(need_scalar(*n), "processing_delay");
    if (PNode* n = take(root, "raw_record_until"))
        config.raw_record_until = units::parse_seconds(need_scalar(*n), "raw_record_until");
    if (PNode* n = take(root, "metric_bin"))
        config.metric_bin = units::parse_seconds(need_scalar(*n), "metric_bin");
    if (PNode* n = take(root, "activities")) {
        need_block(*n);
        if (PNode* t = take(*n, "raw_replication"))
            config.activities.raw_replication = units::parse_bool(need_scalar(*t), "raw_replication");
        if (PNode* t = take(*n, "production"))
            config.activities.production = units::parse_bool(need_scalar(*t), "production");
        if (PNode* t = take(*n, "reproduction"))
            config.activities.reproduction = units::parse_bool(need_scalar(*t), "reproduction");
        if (PNode* t = take(*n, "analysis"))
            config.activities.analysis = units::parse_bool(need_scalar(*t), "analysis");
    }
    if (PNode* n = take(root, "sweep")) {
        config.sweep_capacities.clear();
        for (const std::string& item : split_list(*n))
            config.sweep_capacities.push_back(units::parse_capacity(item, "sweep"));
    }
    if (PNode* n = take(root, "topology")) config.topology = parse_topology(*n);

    verify_all_used(root);
    finalize_scenario(config);
    return config;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io_failure, "cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) raise(Errc::io_failure, "cannot read scenario file '" + path + "'");
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioConfig& config) {
    std::ostringstream out;
    const auto num = [](double v) { return units::format_double(v); };

    out << "seed: " << config.seed << "\n";
    out << "duration: " << num(config.duration) << "\n";
    out << "raw_rate: " << num(config.raw_rate) << "\n";
    out << "raw_mean_size: " << num(config.raw_mean_size) << "\n";
    out << "raw_sd_fraction: " << num(config.raw_sd_fraction) << "\n";
    out << "dst_ratio: " << num(config.dst_ratio) << "\n";
    out << "dst_size_mode: " << config.dst_size_mode << "\n";
    out << "window_bytes: " << num(config.window_bytes) << "\n";
    if (config.max_concurrent_outbound == 0)
        out << "max_concurrent_outbound: unlimited\n";
    else
        out << "max_concurrent_outbound: " << config.max_concurrent_outbound << "\n";
    out << "agent_enabled: " << (config.agent_enabled ? "true" : "false") << "\n";
    if (!config.agent_nodes.empty()) {
        out << "agent_nodes: ";
        for (std::size_t i = 0; i < config.agent_nodes.size(); ++i)
            out << (i ? ", " : "") << config.agent_nodes[i];
        out << "\n";
    }
    out << "reproduction_start: " << num(config.reproduction_start) << "\n";
    out << "reproduction_rate: " << num(config.reproduction_rate) << "\n";
    out << "reproduction_fraction: " << num(config.reproduction_fraction) << "\n";
    if (!config.analysis_centers.empty()) {
        out << "analysis_centers:\n";
        for (const AnalysisSpec& spec : config.analysis_centers) {
            out << "  " << spec.center << ":\n";
            out << "    local_hour: " << spec.local_hour << "\n";
            out << "    lookback_hours: " << num(spec.lookback_hours) << "\n";
        }
    }
    out << "analysis_include_t0: " << (config.analysis_include_t0 ? "true" : "false") << "\n";
    out << "analysis_max_parallel: " << config.analysis_max_parallel << "\n";
    out << "processing_delay: " << num(config.processing_delay) << "\n";
    out << "raw_record_until: " << num(config.raw_record_until) << "\n";
    out << "metric_bin: " << num(config.metric_bin) << "\n";
    out << "activities:\n";
    out << "  raw_replication: " << (config.activities.raw_replication ? "true" : "false") << "\n";
    out << "  production: " << (config.activities.production ? "true" : "false") << "\n";
    out << "  reproduction: " << (config.activities.reproduction ? "true" : "false") << "\n";
    out << "  analysis: " << (config.activities.analysis ? "true" : "false") << "\n";
    if (!config.sweep_capacities.empty()) {
        out << "sweep: ";
        for (std::size_t i = 0; i < config.sweep_capacities.size(); ++i)
            out << (i ? ", " : "") << num(config.sweep_capacities[i]);
        out << "\n";
    }
    out << "topology:\n";
    out << "  nodes:\n";
    for (const NodeSpec& n : config.topology.nodes) {
        out << "    " << n.name << ":\n";
        out << "      utc_offset: " << n.utc_offset_hours << "\n";
        if (n.transit) out << "      transit: true\n";
    }
    out << "  links:\n";
    for (const LinkSpec& l : config.topology.links) {
        out << "    " << l.label() << ":\n";
        out << "      a: " << l.a << "\n";
        out << "      b: " << l.b << "\n";
        out << "      capacity: " << num(l.capacity_bps) << "\n";
        out << "      rtt: " << num(l.rtt_ms) << "\n";
    }
    return out.str();
}

std::uint64_t scenario_digest(const ScenarioConfig& config) {
    const std::string text = serialize_scenario(config);
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    return hash;
}

double local_start_time(const TopologySpec& topology, const std::string& center, int local_hour) {
    for (const NodeSpec& n : topology.nodes) {
        if (n.name == center) {
            const int shifted = ((local_hour - n.utc_offset_hours) % 24 + 24) % 24;
            return static_cast<double>(shifted) * 3600.0;
        }
    }
    raise(Errc::unknown_node, "no node named '" + center + "'");
}

void set_transatlantic_capacity(ScenarioConfig& config, double capacity_bps) {
    if (!(capacity_bps > 0.0))
        raise(Errc::range_violation, "transatlantic capacity must be positive");
    for (LinkSpec& link : config.topology.links) {
        const bool match = (link.a == "T0" && link.b == "T1-US1") ||
                           (link.a == "T1-US1" && link.b == "T0");
        if (match) {
            link.capacity_bps = capacity_bps;
            return;
        }
    }
    raise(Errc::unknown_node, "topology has no T0 / T1-US1 link to resize");
}

double sample_file_size(Rng& rng, double mean, double sd_fraction) {
    if (sd_fraction == 0.0) return mean;
    const double sd = sd_fraction * mean;
    const double lo = mean * (1.0 - 4.0 * sd_fraction);
    const double hi = mean * (1.0 + 4.0 * sd_fraction);
    const double size = rng.truncated_normal(mean, sd, lo, hi);
    return size < 1.0 ? 1.0 : size;
}

} // namespace gridflow
