#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridflow/activities.hpp"
#include "gridflow/errors.hpp"
#include "gridflow/outputs.hpp"
#include "gridflow/scenario.hpp"
#include "gridflow/units.hpp"

namespace {

gridflow::ScenarioConfig load_scenario(const std::string& arg) {
    if (arg == "paper-default") {
        gridflow::ScenarioConfig cfg = gridflow::default_scenario();
        gridflow::finalize_scenario(cfg);
        return cfg;
    }
    return gridflow::parse_scenario_file(arg);
}

std::vector<double> parse_gbps_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string piece = text.substr(pos, comma - pos);
        out.push_back(gridflow::units::parse_real(piece, "transatlantic-gbps") *
                      gridflow::units::bytes_per_second_per_gbps);
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flow-level simulator of tiered data replication over shared WAN links"};
    app.require_subcommand(1);

    std::string scenario = "paper-default";
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::string duration;
    std::string transatlantic;
    unsigned jobs = 1;
    bool agent = false;
    bool no_agent = false;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario,
                        "Scenario file, or 'paper-default' for the built-in scenario")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "Override the scenario's random seed");
        cmd->add_option("--duration", duration,
                        "Override the simulated duration (seconds; ms/min/h suffixes accepted)");
        auto* on = cmd->add_flag("--agent", agent, "Force store-and-forward relaying on");
        auto* off = cmd->add_flag("--no-agent", no_agent, "Force direct per-destination copies");
        on->excludes(off);
        off->excludes(on);
        cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    };

    CLI::App* run_cmd =
        app.add_subcommand("run", "Run one scenario; writes flows.csv, link_usage.csv, summary.txt");
    add_common(run_cmd);
    run_cmd->add_option("--transatlantic-gbps", transatlantic,
                        "Override the T0 / T1-US1 link capacity (Gbps)");

    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "Run once per transatlantic capacity; adds sweep_summary.csv");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--transatlantic-gbps", transatlantic,
                          "Comma-separated capacities in Gbps, e.g. 3,5,7,10");
    sweep_cmd->add_option("--jobs", jobs, "Concurrent runs (default 1)");

    CLI11_PARSE(app, argc, argv);

    try {
        gridflow::ScenarioConfig cfg = load_scenario(scenario);
        if (seed) cfg.seed = *seed;
        if (!duration.empty()) {
            const double new_duration = gridflow::units::parse_seconds(duration, "duration");
            // The recording horizon tracks the run horizon unless the scenario
            // pinned it to a different value.
            if (cfg.raw_record_until == cfg.duration) cfg.raw_record_until = new_duration;
            cfg.duration = new_duration;
        }
        if (agent) cfg.agent_enabled = true;
        if (no_agent) cfg.agent_enabled = false;

        if (run_cmd->parsed()) {
            if (!transatlantic.empty()) {
                const std::vector<double> caps = parse_gbps_list(transatlantic);
                if (caps.size() != 1)
                    gridflow::raise(gridflow::Errc::range_violation,
                                    "run takes exactly one --transatlantic-gbps value");
                gridflow::set_transatlantic_capacity(cfg, caps.front());
            }
            const auto sim = gridflow::run_scenario(cfg);
            gridflow::write_outputs(*sim, out_dir);
        } else {
            std::vector<double> caps =
                transatlantic.empty() ? cfg.sweep_capacities : parse_gbps_list(transatlantic);
            if (caps.empty())
                gridflow::raise(gridflow::Errc::range_violation,
                                "no sweep capacities: pass --transatlantic-gbps or set "
                                "sweep_capacities in the scenario");
            gridflow::run_sweep(cfg, caps, out_dir, jobs);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
