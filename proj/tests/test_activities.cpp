#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gridflow/activities.hpp"
#include "gridflow/errors.hpp"
#include "gridflow/scenario.hpp"

using namespace gridflow;

namespace {

/// Deterministic base: exact 2 GB files every 10 s, no activities enabled.
/// Tests switch on exactly what they exercise.
ScenarioConfig controlled() {
    ScenarioConfig cfg;
    cfg.seed = 5;
    cfg.raw_sd_fraction = 0.0;
    cfg.activities = {false, false, false, false};
    cfg.analysis_centers.clear();
    return cfg;
}

const std::vector<std::string> t1_names{"T1-EU1", "T1-EU2", "T1-EU3",
                                        "T1-US1", "T1-US2", "T1-JP"};

std::vector<FlowRecord> records_of(const Simulation& sim, ActivityId activity) {
    std::vector<FlowRecord> out;
    for (const FlowRecord& rec : sim.metrics().flows())
        if (rec.activity == activity) out.push_back(rec);
    return out;
}

std::set<std::string> holder_names(const Simulation& sim, const DataFile& file) {
    std::set<std::string> names;
    for (NodeId node : file.holders) names.insert(sim.network().node_name(node));
    return names;
}

} // namespace

TEST_SUITE("activities") {

TEST_CASE("recording with zero spread lays files down every ten seconds") {
    ScenarioConfig cfg = controlled();
    cfg.activities.raw_replication = true;
    cfg.raw_record_until = 5990.0;
    cfg.duration = 6500.0;
    const auto sim = run_scenario(cfg);

    CHECK(sim->raw_files_recorded() == 600);
    CHECK(sim->files().all().size() == 600);
    for (const DataFile& file : sim->files().all()) {
        CHECK(file.file_class == FileClass::raw);
        CHECK(file.bytes == 2e9);
        CHECK(file.created_at == 10.0 * static_cast<double>(file.id)); // exact
        CHECK(file.origin == sim->network().node_id("T0"));
    }
}

TEST_CASE("replication rotates through the six centers in order") {
    ScenarioConfig cfg = controlled();
    cfg.activities.raw_replication = true;
    cfg.raw_record_until = 5990.0;
    cfg.duration = 6500.0;
    const auto sim = run_scenario(cfg);

    const auto replication = records_of(*sim, ActivityId::raw_replication);
    REQUIRE(replication.size() == 600); // everything lands within the horizon

    std::map<std::uint64_t, std::string> dst_of;
    std::map<std::string, int> per_center;
    for (const FlowRecord& rec : replication) {
        CHECK(rec.src == "T0");
        CHECK(rec.file_class == FileClass::raw);
        dst_of[rec.file_id] = rec.dst;
        ++per_center[rec.dst];
    }
    CHECK(dst_of[0] == "T1-EU1"); // first file to the first center
    CHECK(dst_of[1] == "T1-EU2");
    CHECK(dst_of[5] == "T1-JP");
    CHECK(dst_of[6] == "T1-EU1"); // and round again
    CHECK(dst_of[7] == "T1-EU2");
    for (const std::string& name : t1_names) CHECK(per_center[name] == 100);

    // Every shipped copy is registered at its destination.
    for (const FlowRecord& rec : replication)
        CHECK(sim->files().holds(rec.file_id, sim->network().node_id(rec.dst)));
    // Opening times follow the recording clock; transfer times follow the
    // per-path window caps (5 s to T1-EU1, 30 s to T1-US1, 90 s to T1-JP).
    for (const FlowRecord& rec : replication) {
        CHECK(rec.opened_at == 10.0 * static_cast<double>(rec.file_id));
        if (rec.dst == "T1-EU1")
            CHECK(rec.transfer_seconds() == doctest::Approx(5.0).epsilon(1e-9));
        if (rec.dst == "T1-US1")
            CHECK(rec.transfer_seconds() == doctest::Approx(30.0).epsilon(1e-9));
        if (rec.dst == "T1-JP")
            CHECK(rec.transfer_seconds() == doctest::Approx(90.0).epsilon(1e-9));
    }
}

TEST_CASE("file sizes vary around the mean when the spread is on") {
    ScenarioConfig cfg = controlled();
    cfg.raw_sd_fraction = 0.1;
    cfg.activities.raw_replication = true;
    cfg.duration = 7200.0;
    const auto sim = run_scenario(cfg);

    // 200 MB/s of 2 GB files averages one file every 10 s: about 720 in 2 h.
    CHECK(sim->raw_files_recorded() > 700);
    CHECK(sim->raw_files_recorded() < 740);
    double total = 0.0;
    std::set<double> distinct;
    for (const DataFile& file : sim->files().all()) {
        CHECK(file.bytes >= 1.2e9);
        CHECK(file.bytes <= 2.8e9);
        distinct.insert(file.bytes);
        total += file.bytes;
    }
    CHECK(distinct.size() > 600); // actually random, not repeated
    const double mean = total / static_cast<double>(sim->raw_files_recorded());
    CHECK(std::abs(mean - 2e9) < 0.02 * 2e9);
}

TEST_CASE("production derives one distributed summary file per recorded file") {
    ScenarioConfig cfg = controlled();
    cfg.activities.production = true;
    cfg.dst_size_mode = "derived";
    cfg.raw_record_until = 990.0;
    cfg.duration = 2000.0;
    const auto sim = run_scenario(cfg);

    CHECK(sim->raw_files_recorded() == 100);
    CHECK(sim->dst_files_created() == 100);

    std::size_t dst_seen = 0;
    for (const DataFile& file : sim->files().all()) {
        if (file.file_class != FileClass::dst) continue;
        ++dst_seen;
        CHECK(file.bytes == 2e8); // exactly a tenth of its parent
        REQUIRE(file.parent.has_value());
        const DataFile& parent = sim->files().get(*file.parent);
        CHECK(parent.file_class == FileClass::raw);
        CHECK(file.created_at == parent.created_at); // no processing delay
        // Landed everywhere: T0 plus all six centers.
        CHECK(holder_names(*sim, file) ==
              std::set<std::string>{"T0", "T1-EU1", "T1-EU2", "T1-EU3", "T1-US1",
                                    "T1-US2", "T1-JP"});
    }
    CHECK(dst_seen == 100);

    // Exactly one arrival per destination per file.
    std::map<std::pair<std::uint64_t, std::string>, int> arrivals;
    for (const FlowRecord& rec : records_of(*sim, ActivityId::production))
        ++arrivals[{rec.file_id, rec.dst}];
    CHECK(arrivals.size() == 600);
    for (const auto& [key, count] : arrivals) CHECK(count == 1);
}

TEST_CASE("sampled summary sizes draw fresh values instead of dividing") {
    ScenarioConfig cfg = controlled();
    cfg.activities.production = true;
    cfg.raw_sd_fraction = 0.1;
    cfg.dst_size_mode = "sampled";
    cfg.raw_record_until = 3000.0;
    cfg.duration = 4000.0;
    const auto sim = run_scenario(cfg);

    std::size_t mismatched = 0, dsts = 0;
    double total = 0.0;
    for (const DataFile& file : sim->files().all()) {
        if (file.file_class != FileClass::dst) continue;
        ++dsts;
        total += file.bytes;
        CHECK(file.bytes >= 1.2e8);
        CHECK(file.bytes <= 2.8e8);
        const DataFile& parent = sim->files().get(*file.parent);
        if (std::abs(file.bytes - parent.bytes / 10.0) > 1.0) ++mismatched;
    }
    CHECK(dsts > 250);
    CHECK(mismatched > dsts / 2); // a fresh draw, not the parent size over ten
    CHECK(std::abs(total / static_cast<double>(dsts) - 2e8) < 0.03 * 2e8);
}

TEST_CASE("a processing delay postpones the summary file") {
    ScenarioConfig cfg = controlled();
    cfg.activities.production = true;
    cfg.processing_delay = 2.5;
    cfg.raw_record_until = 490.0;
    cfg.duration = 1000.0;
    const auto sim = run_scenario(cfg);

    std::size_t dsts = 0;
    for (const DataFile& file : sim->files().all()) {
        if (file.file_class != FileClass::dst) continue;
        ++dsts;
        const DataFile& parent = sim->files().get(*file.parent);
        CHECK(file.created_at == doctest::Approx(parent.created_at + 2.5).epsilon(1e-12));
    }
    CHECK(dsts == 50);
}

TEST_CASE("reprocessing reads each center's arrivals in order at the shared rate") {
    ScenarioConfig cfg = controlled();
    cfg.activities.raw_replication = true;
    cfg.activities.reproduction = true;
    cfg.raw_record_until = 5990.0;
    cfg.reproduction_start = 6300.0; // after the last arrival lands (t = 6080)
    cfg.duration = 20000.0;
    const auto sim = run_scenario(cfg);

    CHECK(sim->files_reprocessed() == 600);
    CHECK(sim->dst_files_created() == 600);

    // Per center: 100 files x 2 GB at 200/6 MB/s is exactly 60 s per file, so
    // new summary files appear at 6360, 6420, ... per center, the last at
    // 6300 + 6000 = 12300.
    std::map<std::string, std::vector<const DataFile*>> by_center;
    double last_created = 0.0;
    for (const DataFile& file : sim->files().all()) {
        if (file.file_class != FileClass::dst) continue;
        by_center[sim->network().node_name(file.origin)].push_back(&file);
        last_created = std::max(last_created, file.created_at);
    }
    CHECK(by_center.size() == 6);
    CHECK(last_created == doctest::Approx(12300.0).epsilon(1e-9));
    for (const std::string& name : t1_names) {
        const auto& made = by_center[name];
        REQUIRE(made.size() == 100);
        for (std::size_t j = 0; j < made.size(); ++j) {
            CHECK(made[j]->created_at ==
                  doctest::Approx(6300.0 + 60.0 * static_cast<double>(j + 1)).epsilon(1e-9));
            REQUIRE(made[j]->parent.has_value());
        }
        // Arrival order: the j-th reprocessed file is the center's j-th replica.
        for (std::size_t j = 1; j < made.size(); ++j)
            CHECK(*made[j]->parent > *made[j - 1]->parent);
    }

    // Every recorded file was reprocessed exactly once.
    std::set<std::uint64_t> parents;
    for (const auto& [name, made] : by_center)
        for (const DataFile* file : made) parents.insert(*file->parent);
    CHECK(parents.size() == 600);

    // Each new summary reaches T0 and the five other centers.
    for (const auto& [name, made] : by_center)
        for (const DataFile* file : made) {
            CHECK(holder_names(*sim, *file) ==
                  std::set<std::string>{"T0", "T1-EU1", "T1-EU2", "T1-EU3", "T1-US1",
                                        "T1-US2", "T1-JP"});
            const TransferPlan* plan = sim->plan_for(file->id);
            REQUIRE(plan != nullptr);
            CHECK(plan->edges.size() == 6);
        }
}

TEST_CASE("a reprocessing fraction thins arrivals evenly") {
    ScenarioConfig cfg = controlled();
    cfg.activities.raw_replication = true;
    cfg.activities.reproduction = true;
    cfg.raw_record_until = 5990.0;
    cfg.reproduction_start = 6300.0;
    cfg.reproduction_fraction = 0.5;
    cfg.duration = 20000.0;
    const auto sim = run_scenario(cfg);
    // Half of each center's 100 arrivals: the 2nd, 4th, ... of each.
    CHECK(sim->files_reprocessed() == 300);
}

TEST_CASE("window gathering fetches exactly the missing files and keeps them") {
    ScenarioConfig cfg = controlled();
    cfg.activities.raw_replication = true;
    cfg.activities.analysis = true;
    cfg.raw_record_until = 5990.0;
    cfg.analysis_centers = {{"T1-US1", 9, 15.0}}; // starts 15:00 UTC = 54000 s
    cfg.duration = 60000.0;
    const auto sim = run_scenario(cfg);

    REQUIRE(sim->analyses().size() == 1);
    const AnalysisReport& report = sim->analyses()[0];
    CHECK(report.center == "T1-US1");
    CHECK(report.started_at == 54000.0);
    CHECK(report.candidates == 600); // all recorded files fall in [0, 54000)
    CHECK(report.fetches == 500);    // the center already held its hundred
    CHECK(report.fetched == 500);
    CHECK(report.completed);
    CHECK(report.completed_at > 54000.0);
    CHECK(report.completed_at < 60000.0);

    const NodeId us1 = sim->network().node_id("T1-US1");
    for (const DataFile& file : sim->files().all())
        if (file.file_class == FileClass::raw) CHECK(sim->files().holds(file.id, us1));

    const auto fetches = records_of(*sim, ActivityId::analysis);
    REQUIRE(fetches.size() == 500);
    std::set<std::uint64_t> fetched_files;
    for (const FlowRecord& rec : fetches) {
        CHECK(rec.dst == "T1-US1");
        CHECK(rec.src != "T1-US1");
        CHECK(rec.file_class == FileClass::raw);
        CHECK(rec.opened_at >= 54000.0);
        fetched_files.insert(rec.file_id);
    }
    CHECK(fetched_files.size() == 500);
    // Exactly the files the center did not hold: ids 3, 9, 15, ... are its own.
    for (std::uint64_t id : fetched_files) CHECK(id % 6 != 3);
}

TEST_CASE("a center that already holds the window finishes instantly") {
    ScenarioConfig cfg = controlled();
    cfg.activities.raw_replication = true;
    cfg.activities.analysis = true;
    cfg.raw_record_until = 5990.0;
    cfg.analysis_centers = {{"T0", 9, 7.0}}; // 8:00 UTC start, 7 h lookback
    cfg.duration = 30000.0;
    const auto sim = run_scenario(cfg);

    REQUIRE(sim->analyses().size() == 1);
    const AnalysisReport& report = sim->analyses()[0];
    CHECK(report.started_at == 28800.0);
    // Window [3600, 28800) holds files 360..599.
    CHECK(report.candidates == 240);
    CHECK(report.fetches == 0);
    CHECK(report.completed);
    CHECK(report.completed_at == 28800.0);
    CHECK(records_of(*sim, ActivityId::analysis).empty());
}

TEST_CASE("gathering runs recur daily while the horizon allows") {
    ScenarioConfig cfg = controlled();
    cfg.activities.analysis = true; // recording happens, but no replication flows
    cfg.raw_record_until = 5990.0;
    cfg.analysis_centers = {{"T0", 9, 7.0}};
    cfg.duration = 130000.0; // one and a half days: starts at 28800 and 115200
    const auto sim = run_scenario(cfg);
    REQUIRE(sim->analyses().size() == 2);
    CHECK(sim->analyses()[0].started_at == 28800.0);
    CHECK(sim->analyses()[1].started_at == 115200.0);
    CHECK(sim->analyses()[1].candidates == 0); // no files created a day later
    CHECK(sim->analyses()[1].completed);
}

TEST_CASE("excluding the origin with no other holder is a hard fault") {
    ScenarioConfig cfg = controlled();
    cfg.activities.analysis = true; // files exist only at T0
    cfg.analysis_include_t0 = false;
    cfg.raw_record_until = 5990.0;
    cfg.analysis_centers = {{"T1-US1", 9, 15.0}};
    cfg.duration = 60000.0;
    try {
        run_scenario(cfg);
        FAIL("expected the fetch to find no source");
    } catch (const SimError& e) {
        CHECK(e.code() == Errc::handler_fault);
        CHECK(std::string(e.what()).find("NoHolder") != std::string::npos);
    }
}

TEST_CASE("the in-flight fetch ceiling paces the gather") {
    ScenarioConfig cfg = controlled();
    cfg.activities.raw_replication = true;
    cfg.activities.analysis = true;
    cfg.raw_record_until = 5990.0;
    cfg.analysis_centers = {{"T1-US1", 9, 15.0}};
    cfg.analysis_max_parallel = 4;
    cfg.duration = 120000.0; // fetching 500 files four at a time takes a while
    const auto sim = run_scenario(cfg);

    const auto fetches = records_of(*sim, ActivityId::analysis);
    REQUIRE(fetches.size() == 500);
    // Sweep the start/end events: never more than four in flight.
    std::vector<std::pair<double, int>> steps;
    for (const FlowRecord& rec : fetches) {
        steps.push_back({rec.opened_at, +1});
        steps.push_back({rec.completed_at, -1});
    }
    std::sort(steps.begin(), steps.end());
    int live = 0, peak = 0;
    for (const auto& [t, delta] : steps) {
        live += delta;
        peak = std::max(peak, live);
    }
    CHECK(peak <= 4);
    CHECK(peak == 4); // the ceiling is actually reached
    CHECK(sim->analyses()[0].completed);
}

TEST_CASE("identical scenarios replay to identical transfer logs") {
    ScenarioConfig cfg; // everything on, defaults, short horizon
    cfg.seed = 42;
    cfg.duration = 3600.0;
    const auto first = run_scenario(cfg);
    const auto second = run_scenario(cfg);

    const auto& a = first->metrics().flows();
    const auto& b = second->metrics().flows();
    REQUIRE(a.size() == b.size());
    CHECK(a.size() > 1000); // a real workload, not a trivial one
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].flow_id == b[i].flow_id);
        CHECK(a[i].file_id == b[i].file_id);
        CHECK(a[i].src == b[i].src);
        CHECK(a[i].dst == b[i].dst);
        CHECK(a[i].bytes == b[i].bytes);
        CHECK(a[i].opened_at == b[i].opened_at);
        CHECK(a[i].started_at == b[i].started_at);
        CHECK(a[i].completed_at == b[i].completed_at);
    }
    REQUIRE(first->files().all().size() == second->files().all().size());
    for (std::size_t i = 0; i < first->files().all().size(); ++i) {
        CHECK(first->files().all()[i].bytes == second->files().all()[i].bytes);
        CHECK(first->files().all()[i].holders == second->files().all()[i].holders);
    }
    CHECK(first->events_dispatched() == second->events_dispatched());
}

TEST_CASE("a different seed reshuffles the file sizes") {
    ScenarioConfig cfg = controlled();
    cfg.raw_sd_fraction = 0.1;
    cfg.activities.raw_replication = true;
    cfg.duration = 3600.0;
    ScenarioConfig other = cfg;
    other.seed = 6;
    const auto first = run_scenario(cfg);
    const auto second = run_scenario(other);
    std::size_t differing = 0;
    const std::size_t n = std::min(first->files().all().size(), second->files().all().size());
    for (std::size_t i = 0; i < n; ++i)
        if (first->files().all()[i].bytes != second->files().all()[i].bytes) ++differing;
    CHECK(differing > n / 2);
}

TEST_CASE("queue snapshots span the run from start to horizon") {
    ScenarioConfig cfg = controlled();
    cfg.activities.raw_replication = true;
    cfg.raw_record_until = 5990.0;
    cfg.duration = 6500.0;
    const auto sim = run_scenario(cfg);
    const auto& samples = sim->metrics().backlog(0);
    REQUIRE(!samples.empty());
    CHECK(samples.front().t == 0.0);
    CHECK(samples.back().t == 6500.0);
    CHECK(samples.size() == 23); // every 300 s plus the final horizon sample
}

} // TEST_SUITE
