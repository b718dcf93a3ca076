#ifndef MMPART_LATENCY_ANALYSIS_HPP
#define MMPART_LATENCY_ANALYSIS_HPP

#include "mmpart/task_model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mmpart {

// Transition-latency bounds of one processor in one mode.
//  ub1: largest MD period hosted (every pending MD job meets its deadline).
//  ub2: synchronous busy period draining one job per MD task under MI
//       interference.
// Both are absent on a processor without MD tasks; ub2 is also absent when
// the busy period diverges.
struct ProcessorLatency {
    ProcessorIndex processor = 0;
    std::optional<Time> ub1;
    std::optional<Time> ub2;
    Time effective; // min of the present bounds, 0 if none
};

struct LatencyReport {
    ModeIndex mode = 0;
    std::vector<ProcessorLatency> per_processor;
    Time platform_bound; // max over processors of `effective`
};

std::optional<Time> ub1(std::span<const Task> md_tasks);

// Least fixed point of  L = z + sum_j ceil(L / T_j) C_j  over the MI tasks,
// iterated from L = z. Returns 0 for z = 0 and nullopt when the MI
// utilization is >= 1 with z > 0 (the iteration cannot converge).
std::optional<Time> busy_period(const Time& md_wcet_sum, std::span<const Task> mi_tasks);

ProcessorLatency processor_latency(ProcessorIndex processor, std::span<const Task> md_tasks,
                                   std::span<const Task> mi_tasks);

// Eq.-style platform bound for a fixed allocation. Reads only the mode's MD
// tasks and the static MI tasks. Throws ModelError for invalid allocations.
LatencyReport analyze_allocation(const ModeSystem& system, const Allocation& allocation);

} // namespace mmpart

#endif
