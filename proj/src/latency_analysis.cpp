#include "mmpart/latency_analysis.hpp"

namespace mmpart {

std::optional<Time> ub1(std::span<const Task> md_tasks)
{
    std::optional<Time> best;
    for (const Task& t : md_tasks)
        if (!best || t.period > *best)
            best = t.period;
    return best;
}

std::optional<Time> busy_period(const Time& md_wcet_sum, std::span<const Task> mi_tasks)
{
    if (md_wcet_sum <= 0)
        return Time(0);

    Rational mi_load = 0;
    for (const Task& t : mi_tasks)
        mi_load += t.utilization();
    if (mi_load >= 1)
        return std::nullopt;

    Time current = md_wcet_sum;
    for (;;) {
        Time next = md_wcet_sum;
        for (const Task& t : mi_tasks)
            next += Rational(ceil_div(current, t.period)) * t.wcet;
        if (next == current)
            return current;
        current = next;
    }
}

ProcessorLatency processor_latency(ProcessorIndex processor, std::span<const Task> md_tasks,
                                   std::span<const Task> mi_tasks)
{
    ProcessorLatency pl;
    pl.processor = processor;
    pl.effective = 0;
    if (md_tasks.empty())
        return pl;

    pl.ub1 = ub1(md_tasks);
    Time z = 0;
    for (const Task& t : md_tasks)
        z += t.wcet;
    pl.ub2 = busy_period(z, mi_tasks);

    if (pl.ub2 && *pl.ub2 < *pl.ub1)
        pl.effective = *pl.ub2;
    else
        pl.effective = *pl.ub1;
    return pl;
}

LatencyReport analyze_allocation(const ModeSystem& system, const Allocation& allocation)
{
    validate_allocation(system, allocation);

    LatencyReport report;
    report.mode = allocation.mode;
    report.platform_bound = 0;
    for (ProcessorIndex p = 0; p < system.processor_count(); ++p) {
        auto md = system.collect(md_tasks_on(system, allocation, p));
        auto mi = system.collect(system.mi_tasks_on(p));
        auto pl = processor_latency(p, md, mi);
        if (pl.effective > report.platform_bound)
            report.platform_bound = pl.effective;
        report.per_processor.push_back(std::move(pl));
    }
    return report;
}

} // namespace mmpart
