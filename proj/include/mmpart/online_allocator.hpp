#ifndef MMPART_ONLINE_ALLOCATOR_HPP
#define MMPART_ONLINE_ALLOCATOR_HPP

#include "mmpart/latency_analysis.hpp"
#include "mmpart/task_model.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mmpart {

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(ProcessorIndex processor, const std::string& what)
        : std::runtime_error(what), processor(processor) {}
    ProcessorIndex processor;
};

// Utilization-bound certification of First-Fit allocation under EDF:
// U_sum <= (beta m + 1) / (beta + 1), beta = floor(1 / U_max), U over every
// task (MI and MD) active in the mode. A mode without tasks is trivially
// feasible and reports beta = 0.
struct FeasibilityVerdict {
    ModeIndex mode = 0;
    long beta = 0;
    Rational bound;
    Rational u_sum;
    Rational u_max;
    bool feasible = false;
    Rational margin; // bound - u_sum
};

FeasibilityVerdict lopez_test(const ModeSystem& system, ModeIndex mode);

struct FfdOutcome {
    std::optional<Allocation> allocation;
    std::optional<TaskIndex> unplaced; // first task that fit nowhere
};

// MD tasks by non-increasing utilization (ties: declaration order), each on
// the lowest-index processor where total utilization stays <= 1.
FfdOutcome first_fit_decreasing(const ModeSystem& system, ModeIndex mode);

// Worst-case MD selection on one processor: the subset of the pool with the
// largest total WCET whose utilization fits the capacity left by the MI tasks.
// Among equal-WCET optima the selection vector (pool in declaration order) is
// lexicographically smallest.
struct KnapsackResult {
    ProcessorIndex processor = 0;
    std::vector<TaskIndex> selected; // declaration order
    Time z;
    Rational capacity;
};

KnapsackResult worst_case_selection(const ModeSystem& system, ProcessorIndex processor,
                                    std::span<const TaskIndex> md_pool);

// Same problem on bare tasks. Returns positions into `items`, ascending.
struct SelectionResult {
    std::vector<std::size_t> selected;
    Time z;
};
SelectionResult max_wcet_selection(std::span<const Task> items, const Rational& capacity);

// Transition-latency bound valid for any utilization-feasible runtime
// placement of the source mode's MD tasks.
struct OnlineLatencyBound {
    ModeIndex source = 0;
    std::vector<KnapsackResult> selections;
    std::vector<Time> per_processor;
    Time bound;
};

// Throws DivergenceError if a processor's busy period does not converge.
OnlineLatencyBound latency_upper_bound(const ModeSystem& system, ModeIndex source);

struct OnlineModeVerdict {
    FeasibilityVerdict lopez;
    Time entry_latency; // worst bound over predecessor modes
    std::vector<DeadlineVerdict> deadlines;
    bool pass = false;
};

struct OnlineValidation {
    std::vector<OnlineLatencyBound> bounds; // indexed by source mode
    std::vector<OnlineModeVerdict> modes;
    bool pass = false;
};

OnlineValidation validate_online_scheme(const ModeSystem& system);

} // namespace mmpart

#endif
