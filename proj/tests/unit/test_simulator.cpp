#include "mmpart/simulator.hpp"

#include "mmpart/offline_allocator.hpp"

#include "../support/generators.hpp"

#include "doctest.h"

#include <algorithm>

using mmpart::AllocationPolicy;
using mmpart::EventKind;
using mmpart::Scenario;
using mmpart::Time;

namespace {

Scenario fig2(const mmpart::ModeSystem& sys)
{
    Scenario sc;
    sc.initial_mode = sys.mode_index("old");
    sc.tables[0] = {0, {0, 1}};
    sc.tables[1] = {1, {0}};
    sc.mcrs = {{7, sys.mode_index("new")}};
    sc.horizon = 20;
    sc.release_delays[sys.task_index("t2")] = {0, 2};
    return sc;
}

std::size_t count(const mmpart::SimTrace& trace, EventKind kind)
{
    return static_cast<std::size_t>(
        std::count_if(trace.events.begin(), trace.events.end(), [&](const auto& e) { return e.kind == kind; }));
}

} // namespace

TEST_CASE("two-mode replay: latency 4, first new job done at 15, deadline 18")
{
    auto sys = fixture::table1();
    auto trace = mmpart::run(sys, fig2(sys));
    REQUIRE(trace.latencies.size() == 1);
    CHECK(trace.latencies[0].mcr_time == 7);
    CHECK(*trace.latencies[0].latency == 4);
    REQUIRE(trace.transition_checks.size() == 1);
    const auto& check = trace.transition_checks[0];
    CHECK(check.task == sys.task_index("t5"));
    CHECK(check.absolute_deadline == 18);
    CHECK(*check.first_completion == 15);
    CHECK(check.met);
    CHECK(trace.deadline_misses == 0);

    // Old MD tasks stop releasing at the request; the new one starts at 11.
    for (const auto& job : trace.jobs) {
        if (job.task == sys.task_index("t2") || job.task == sys.task_index("t4"))
            CHECK(job.release <= 7);
        if (job.task == sys.task_index("t5"))
            CHECK(job.release >= 11);
    }
    CHECK(count(trace, EventKind::ModeChangeRequest) == 1);
    CHECK(count(trace, EventKind::TransitionEnd) == 1);
    CHECK(count(trace, EventKind::MdDisabled) == 2);
}

TEST_CASE("MI tasks keep their periodic pattern across the transition")
{
    auto sys = fixture::table1();
    auto trace = mmpart::run(sys, fig2(sys));
    for (auto mi : sys.mi_tasks()) {
        const auto& t = sys.task(mi);
        std::uint64_t k = 0;
        for (const auto& job : trace.jobs)
            if (job.task == mi) {
                CHECK(job.release == t.period * Time(static_cast<long>(k)));
                ++k;
            }
        CHECK(k > 0);
    }
}

TEST_CASE("EDF invariants hold on every job")
{
    auto sys = fixture::case_study();
    Scenario sc;
    sc.tables = mmpart::optimal_tables(sys);
    sc.mcrs = {{13, 1}, {400, 0}};
    sc.horizon = 900;
    auto trace = mmpart::run(sys, sc);
    CHECK(trace.deadline_misses == 0);
    for (const auto& job : trace.jobs) {
        const auto& t = sys.task(job.task);
        CHECK(job.deadline == job.release + t.period);
        CHECK(job.executed <= t.wcet);
        if (job.completion) {
            CHECK(job.executed == t.wcet);
            CHECK(*job.completion >= job.release + t.wcet);
            CHECK(*job.completion <= job.deadline);
        }
    }
    // A processor never runs two jobs: starts and resumes alternate with
    // preemptions and completions.
    std::vector<int> running(sys.processor_count(), 0);
    for (const auto& e : trace.events) {
        if (!e.processor)
            continue;
        auto& r = running[*e.processor];
        if (e.kind == EventKind::Start || e.kind == EventKind::Resume)
            CHECK(++r == 1);
        if (e.kind == EventKind::Preempt || e.kind == EventKind::Complete)
            CHECK(--r == 0);
    }
    REQUIRE(trace.latencies.size() == 2);
    CHECK(*trace.latencies[0].latency <= 40);
    CHECK(*trace.latencies[1].latency <= 85);
}

TEST_CASE("horizon 0 yields an empty trace")
{
    auto sys = fixture::table1();
    Scenario sc = fig2(sys);
    sc.mcrs.clear();
    sc.horizon = 0;
    auto trace = mmpart::run(sys, sc);
    CHECK(trace.events.empty());
    CHECK(trace.jobs.empty());
    CHECK(trace.deadline_misses == 0);
}

TEST_CASE("invalid scenarios are rejected")
{
    auto sys = fixture::case_study();
    Scenario base;
    base.tables = mmpart::optimal_tables(sys);
    base.horizon = 100;

    auto bad = base;
    bad.mcrs = {{10, 1}, {10, 0}};
    CHECK_THROWS_AS(mmpart::validate_scenario(sys, bad), mmpart::ScenarioError);
    bad.mcrs = {{10, 0}};
    CHECK_THROWS_AS(mmpart::validate_scenario(sys, bad), mmpart::ScenarioError);
    bad.mcrs = {{-1, 1}};
    CHECK_THROWS_AS(mmpart::validate_scenario(sys, bad), mmpart::ScenarioError);
    bad.mcrs = {{100, 1}};
    CHECK_THROWS_AS(mmpart::validate_scenario(sys, bad), mmpart::ScenarioError);
    bad = base;
    bad.tables.erase(1);
    bad.mcrs = {{10, 1}};
    CHECK_THROWS_AS(mmpart::validate_scenario(sys, bad), mmpart::ScenarioError);
    bad = base;
    bad.tables[1] = {1, {0}};
    bad.mcrs = {{10, 1}};
    CHECK_THROWS_AS(mmpart::validate_scenario(sys, bad), mmpart::ScenarioError);
    bad = base;
    bad.release_delays[4] = {-1};
    CHECK_THROWS_AS(mmpart::validate_scenario(sys, bad), mmpart::ScenarioError);

    auto t1 = fixture::table1();
    Scenario unreachable = fig2(t1);
    unreachable.initial_mode = 1;
    CHECK_THROWS_AS(mmpart::run(t1, unreachable), mmpart::ScenarioError);
}

TEST_CASE("a request during an unfinished transition is rejected")
{
    auto sys = fixture::case_study();
    Scenario sc;
    sc.tables = mmpart::optimal_tables(sys);
    sc.mcrs = {{0, 1}, {1, 0}};
    sc.horizon = 200;
    CHECK_THROWS_AS(mmpart::run(sys, sc), mmpart::ScenarioError);
}

TEST_CASE("a missed transition deadline counts as a miss")
{
    auto raw = fixture::table1_raw();
    raw.tasks[4].transition_deadline = "7";
    auto sys = mmpart::ModeSystem::build(raw);
    auto trace = mmpart::run(sys, fig2(sys));
    REQUIRE(trace.transition_checks.size() == 1);
    CHECK(trace.transition_checks[0].absolute_deadline == 14);
    CHECK_FALSE(trace.transition_checks[0].met);
    CHECK(trace.deadline_misses == 1);
}

TEST_CASE("online FFD placement is applied at run time")
{
    auto sys = fixture::case_study();
    Scenario sc;
    sc.policy = AllocationPolicy::OnlineFfd;
    sc.mcrs = {{25, 1}};
    sc.horizon = 400;
    auto trace = mmpart::run(sys, sc);
    CHECK(trace.deadline_misses == 0);
    CHECK(*trace.latencies[0].latency <= 50);
    for (const auto& job : trace.jobs)
        if (job.task == sys.task_index("t10"))
            CHECK(job.processor == 1);
}

TEST_CASE("sweeps stay below the analytical bound")
{
    auto sys = fixture::table1();
    auto tables = mmpart::optimal_tables(sys);
    auto bound = mmpart::analyze_allocation(sys, tables.at(0)).platform_bound;
    auto grid = mmpart::time_grid(mmpart::hyperperiod(sys, 0), Time(1, 2));
    CHECK(grid.size() == 30);
    auto result = mmpart::sweep_mcr(sys, AllocationPolicy::StaticTables, tables, 0, 1, grid);
    CHECK(result.runs == 30);
    CHECK(result.all_transitions_ended);
    CHECK(*result.max_latency <= bound);
    CHECK(result.deadline_misses == 0);
    CHECK_THROWS_AS(mmpart::sweep_mcr(sys, AllocationPolicy::StaticTables, tables, 1, 0, grid),
                    mmpart::ScenarioError);
}

TEST_CASE("grid and hyperperiod helpers")
{
    auto sys = fixture::case_study();
    CHECK(mmpart::hyperperiod(sys, 0) == 1800);
    CHECK(mmpart::hyperperiod(sys, 1) == 900);
    CHECK(mmpart::time_grid(3, 1) == std::vector<Time>{0, 1, 2});
    CHECK(mmpart::time_grid(1, Time(1, 3)).size() == 3);
}

TEST_CASE("trace export format")
{
    auto sys = fixture::table1();
    auto text = mmpart::format_trace(sys, mmpart::run(sys, fig2(sys)));
    CHECK(text.rfind("# time\tprocessor\tkind\ttask\tjob\n", 0) == 0);
    CHECK(text.find("7\t-\tMCR\tnew\t-\n") != std::string::npos);
    CHECK(text.find("11\t-\ttransition-end\tnew\t-\n") != std::string::npos);
    CHECK(text.find("15\t1\tcomplete\tt5\t0\n") != std::string::npos);
    CHECK(text.find("# latency\told->new\tmcr 7\t4\n") != std::string::npos);
    CHECK(text.find("# deadline-misses\t0\n") != std::string::npos);
}
