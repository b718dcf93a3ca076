#include "mmpart/latency_analysis.hpp"

#include "../support/generators.hpp"

#include "doctest.h"

using mmpart::Rational;
using mmpart::Task;
using mmpart::Time;

namespace {

Task periodic(const char* c, const char* t)
{
    Task task;
    task.wcet = mmpart::parse_rational(c);
    task.period = mmpart::parse_rational(t);
    return task;
}

} // namespace

TEST_CASE("UB1 is the largest hosted MD period")
{
    CHECK_FALSE(mmpart::ub1({}).has_value());
    std::vector<Task> md{periodic("7", "40"), periodic("1", "10"), periodic("1", "20")};
    CHECK(*mmpart::ub1(md) == 40);
}

TEST_CASE("busy periods of the case-study processors")
{
    auto sys = fixture::case_study();
    auto p1 = sys.collect(sys.mi_tasks_on(0));
    auto p2 = sys.collect(sys.mi_tasks_on(1));
    CHECK(*mmpart::busy_period(8, p1) == 48);
    CHECK(*mmpart::busy_period(6, p2) == 41);
    CHECK(*mmpart::busy_period(50, p2) == 85);
    CHECK(*mmpart::busy_period(10, p1) == 50);
    CHECK(*mmpart::busy_period(14, p2) == 49);
    CHECK(*mmpart::busy_period(9, p1) == 49);
    CHECK(*mmpart::busy_period(5, p2) == 40);
}

TEST_CASE("busy period edge cases")
{
    CHECK(*mmpart::busy_period(0, {}) == 0);
    CHECK(*mmpart::busy_period(7, {}) == 7);
    std::vector<Task> full{periodic("1", "2"), periodic("1", "2")};
    CHECK(*mmpart::busy_period(0, full) == 0);
    CHECK_FALSE(mmpart::busy_period(1, full).has_value());
    std::vector<Task> third{periodic("1/3", "1")};
    CHECK(*mmpart::busy_period(Rational(1, 2), third) == Rational(5, 6));
    // The fixed point may sit exactly on a release: 2 + ceil(L/3) = L at 3.
    std::vector<Task> one{periodic("1", "3")};
    CHECK(*mmpart::busy_period(2, one) == 3);
}

TEST_CASE("processor latency takes the smaller bound")
{
    auto sys = fixture::case_study();
    auto p2 = sys.collect(sys.mi_tasks_on(1));
    std::vector<Task> md{periodic("50", "100")};
    auto pl = mmpart::processor_latency(1, md, p2);
    CHECK(*pl.ub1 == 100);
    CHECK(*pl.ub2 == 85);
    CHECK(pl.effective == 85);

    auto empty = mmpart::processor_latency(0, {}, p2);
    CHECK_FALSE(empty.ub1.has_value());
    CHECK_FALSE(empty.ub2.has_value());
    CHECK(empty.effective == 0);
}

TEST_CASE("alternative mode-1 allocation: busy periods 48 and 41, UB1 40 and 30")
{
    auto sys = fixture::case_study();
    // t5, t6 on processor 1; t7, t8, t9 on processor 2.
    auto report = mmpart::analyze_allocation(sys, {0, {0, 0, 1, 1, 1}});
    CHECK(*report.per_processor[0].ub2 == 48);
    CHECK(*report.per_processor[1].ub2 == 41);
    CHECK(*report.per_processor[0].ub1 == 40);
    CHECK(*report.per_processor[1].ub1 == 30);
    CHECK(report.per_processor[0].effective == 40);
    CHECK(report.per_processor[1].effective == 30);
    CHECK(report.platform_bound == 40);
}

TEST_CASE("mode-2 allocation bounds")
{
    auto sys = fixture::case_study();
    auto report = mmpart::analyze_allocation(sys, {1, {1}});
    CHECK(*report.per_processor[1].ub1 == 100);
    CHECK(*report.per_processor[1].ub2 == 85);
    CHECK(report.platform_bound == 85);
    CHECK(report.per_processor[0].effective == 0);
    CHECK_THROWS_AS(mmpart::analyze_allocation(sys, {1, {0}}), mmpart::ModelError);
}
