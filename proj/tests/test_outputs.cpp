#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gridflow/activities.hpp"
#include "gridflow/errors.hpp"
#include "gridflow/outputs.hpp"
#include "gridflow/scenario.hpp"

using namespace gridflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(bool(in), "missing file: ", path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

bool has_line_starting(const std::string& text, const std::string& prefix) {
    for (const std::string& line : lines_of(text))
        if (line.rfind(prefix, 0) == 0) return true;
    return false;
}

/// Fresh scratch directory under the system temp root.
fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gridflow-tests-" + name);
    fs::remove_all(dir);
    return dir;
}

/// Short but complete workload: every activity fires within one hour except
/// window gathering, which needs more than a day.
ScenarioConfig small_scenario() {
    ScenarioConfig cfg = default_scenario();
    cfg.seed = 11;
    cfg.duration = 3600.0;
    cfg.reproduction_start = 1800.0;
    return cfg;
}

} // namespace

TEST_SUITE("outputs") {

TEST_CASE("a run writes the transfer log, link usage, and summary") {
    const fs::path dir = scratch("run");
    const auto sim = run_scenario(small_scenario());
    write_outputs(*sim, dir.string());

    REQUIRE(fs::exists(dir / "flows.csv"));
    REQUIRE(fs::exists(dir / "link_usage.csv"));
    REQUIRE(fs::exists(dir / "summary.txt"));

    const std::string flows = slurp(dir / "flows.csv");
    CHECK(lines_of(flows)[0] ==
          "flow_id,file_id,class,activity,src,dst,bytes,opened_at,started_at,completed_at");
    CHECK(lines_of(flows).size() == sim->metrics().flows().size() + 1);

    const std::string usage = slurp(dir / "link_usage.csv");
    const auto usage_lines = lines_of(usage);
    CHECK(usage_lines[0] == "bin_start,link,direction,bytes,utilization");
    // 3600 s in 300 s bins over 7 links, both directions: 12 * 14 rows.
    CHECK(usage_lines.size() == 1 + 12 * 14);

    const std::string summary = slurp(dir / "summary.txt");
    CHECK(has_line_starting(summary, "scenario_digest: "));
    CHECK(has_line_starting(summary, "seed: 11"));
    CHECK(has_line_starting(summary, "duration_s: 3600"));
    CHECK(has_line_starting(summary, "agent_enabled: on"));
    CHECK(has_line_starting(summary, "transatlantic_gbps: 2.5"));
    CHECK(has_line_starting(summary, "raw_files_recorded: "));
    CHECK(has_line_starting(summary, "  RAW to T1-EU1: count="));
    CHECK(has_line_starting(summary, "  DST to all: count="));
    CHECK(summary.find("window_gathering_runs:") != std::string::npos);
    CHECK(summary.find("link_totals_bytes") != std::string::npos);
    CHECK(summary.find("queued_backlog") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("two identical runs produce byte-identical outputs") {
    const fs::path dir_a = scratch("identical-a");
    const fs::path dir_b = scratch("identical-b");
    write_outputs(*run_scenario(small_scenario()), dir_a.string());
    write_outputs(*run_scenario(small_scenario()), dir_b.string());
    for (const char* name : {"flows.csv", "link_usage.csv", "summary.txt"})
        CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("a capacity sweep writes one directory per point plus a table") {
    const fs::path dir = scratch("sweep");
    ScenarioConfig base = small_scenario();
    const auto rows = run_sweep(base, {3.75e8, 1.25e9}, dir.string());

    REQUIRE(rows.size() == 2);
    CHECK(rows[0].capacity_gbps == 3.0);
    CHECK(rows[1].capacity_gbps == 10.0);
    CHECK(rows[0].dst_stats.count > 0);
    CHECK(rows[0].raw_stats.count > 0);

    REQUIRE(fs::exists(dir / "3Gbps" / "summary.txt"));
    REQUIRE(fs::exists(dir / "10Gbps" / "summary.txt"));
    CHECK(has_line_starting(slurp(dir / "3Gbps" / "summary.txt"), "transatlantic_gbps: 3"));
    CHECK(has_line_starting(slurp(dir / "10Gbps" / "summary.txt"), "transatlantic_gbps: 10"));

    const auto table = lines_of(slurp(dir / "sweep_summary.csv"));
    REQUIRE(table.size() == 3);
    CHECK(table[0] == "capacity_gbps,mean_dst_transfer_s,mean_raw_transfer_s,analysis_T1-JP_s");
    CHECK(table[1].rfind("3,", 0) == 0);
    CHECK(table[2].rfind("10,", 0) == 0);
    // One hour is too short for any window-gathering run: the cell stays blank.
    CHECK(table[1].back() == ',');
    CHECK(table[2].back() == ',');
    fs::remove_all(dir);
}

TEST_CASE("parallel sweeps write exactly what serial sweeps write") {
    const fs::path serial = scratch("sweep-serial");
    const fs::path parallel = scratch("sweep-parallel");
    ScenarioConfig base = small_scenario();
    run_sweep(base, {3.75e8, 6.25e8, 1.25e9}, serial.string(), 1);
    run_sweep(base, {3.75e8, 6.25e8, 1.25e9}, parallel.string(), 2);

    CHECK(slurp(serial / "sweep_summary.csv") == slurp(parallel / "sweep_summary.csv"));
    for (const char* point : {"3Gbps", "5Gbps", "10Gbps"})
        for (const char* name : {"flows.csv", "link_usage.csv", "summary.txt"})
            CHECK(slurp(serial / point / name) == slurp(parallel / point / name));
    fs::remove_all(serial);
    fs::remove_all(parallel);
}

TEST_CASE("a one-point sweep equals a plain run at that capacity") {
    const fs::path swept = scratch("sweep-one");
    const fs::path plain = scratch("plain-one");
    ScenarioConfig base = small_scenario();
    run_sweep(base, {3.75e8}, swept.string());

    ScenarioConfig manual = base;
    set_transatlantic_capacity(manual, 3.75e8);
    write_outputs(*run_scenario(manual), plain.string());

    for (const char* name : {"flows.csv", "link_usage.csv", "summary.txt"})
        CHECK(slurp(swept / "3Gbps" / name) == slurp(plain / name));
    fs::remove_all(swept);
    fs::remove_all(plain);
}

TEST_CASE("an empty sweep is rejected") {
    ScenarioConfig base = small_scenario();
    CHECK_THROWS_AS(run_sweep(base, {}, scratch("sweep-empty").string()), SimError);
}

TEST_CASE("a missing scenario file is reported with its path") {
    try {
        parse_scenario_file("/nonexistent/nowhere.scenario");
        FAIL("expected the open to fail");
    } catch (const SimError& e) {
        CHECK(e.code() == Errc::io_failure);
        CHECK(std::string(e.what()).find("/nonexistent/nowhere.scenario") != std::string::npos);
    }
}

TEST_CASE("scenario files round-trip through the filesystem") {
    const fs::path dir = scratch("scenario-file");
    fs::create_directories(dir);
    const fs::path path = dir / "case.scenario";
    {
        std::ofstream out(path);
        out << "seed: 9\nduration: 2h\nactivities:\n  analysis: off\n";
    }
    const ScenarioConfig cfg = parse_scenario_file(path.string());
    CHECK(cfg.seed == 9);
    CHECK(cfg.duration == 7200.0);
    CHECK_FALSE(cfg.activities.analysis);
    fs::remove_all(dir);
}

} // TEST_SUITE
