#ifndef MMPART_SIMULATOR_HPP
#define MMPART_SIMULATOR_HPP

#include "mmpart/task_model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmpart {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EventKind {
    Release,
    Start,
    Preempt,
    Resume,
    Complete,
    DeadlineMiss,
    ModeChangeRequest,
    MdDisabled,
    TransitionEnd,
    Enable,
};

std::string_view to_string(EventKind kind);

struct TraceEvent {
    Time time;
    std::optional<ProcessorIndex> processor; // absent for platform-wide events
    EventKind kind = EventKind::Release;
    std::string subject; // task id, or destination mode id for MCR / transition-end
    std::optional<std::uint64_t> job;
};

struct JobRecord {
    TaskIndex task = 0;
    std::uint64_t job = 0;
    ProcessorIndex processor = 0;
    Time release;
    Time deadline;
    Time executed;
    std::optional<Time> completion;
    bool missed = false;
};

struct ObservedLatency {
    Time mcr_time;
    ModeIndex from = 0;
    ModeIndex to = 0;
    std::optional<Time> latency; // absent if the transition outlived the horizon
};

// Transition deadline of an MD task entering a mode: its first job must
// complete by mcr_time + D.
struct TransitionCheck {
    TaskIndex task = 0;
    Time mcr_time;
    Time absolute_deadline;
    std::optional<Time> first_completion;
    bool met = false;
};

struct SimTrace {
    std::vector<TraceEvent> events;
    std::vector<JobRecord> jobs;
    std::vector<ObservedLatency> latencies;
    std::vector<TransitionCheck> transition_checks;
    std::size_t deadline_misses = 0; // job deadlines and transition deadlines
};

struct ModeChangeRequest {
    Time time;
    ModeIndex destination = 0;
};

enum class AllocationPolicy { StaticTables, OnlineFfd };

struct Scenario {
    ModeIndex initial_mode = 0;
    AllocationPolicy policy = AllocationPolicy::StaticTables;
    std::map<ModeIndex, Allocation> tables; // StaticTables only; one per visited mode
    std::vector<ModeChangeRequest> mcrs;
    Time horizon;
    // Extra delay before job k of a task (k counts every job of the task).
    // Job k is released at (epoch start or previous release + T) + delay[k];
    // missing entries mean 0, i.e. strictly periodic.
    std::map<TaskIndex, std::vector<Time>> release_delays;
};

// Throws ScenarioError for scenarios that cannot run: non-increasing or
// out-of-horizon MCRs, MCRs along a missing edge, missing or invalid tables.
void validate_scenario(const ModeSystem& system, const Scenario& scenario);

// Per-processor preemptive EDF over [0, horizon] with the synchronous
// mode-change protocol. Events at one instant are ordered: completions,
// releases, mode change request, transition end (followed by the releases
// it enables), deadline misses, dispatch.
//
// Throws ScenarioError on invalid scenarios, on an MCR during an ongoing
// transition, and when online FFD cannot place a task.
SimTrace run(const ModeSystem& system, const Scenario& scenario);

// Latency-optimal allocation of every mode, as used by the offline method.
std::map<ModeIndex, Allocation> optimal_tables(const ModeSystem& system);

// Least common multiple of the periods of the tasks active in a mode.
Time hyperperiod(const ModeSystem& system, ModeIndex mode);

// 0, step, 2 step, ... below `end`.
std::vector<Time> time_grid(const Time& end, const Time& step);

struct SweepResult {
    std::optional<Time> max_latency; // absent if some transition did not end
    Time argmax;
    std::size_t runs = 0;
    std::size_t deadline_misses = 0;
    bool all_transitions_ended = true;
};

// Horizon past the MCR used by each sweep run: long enough for the
// transition to drain and for every transition deadline to come due.
Time sweep_tail(const ModeSystem& system);

// One run per grid time: start synchronously in `from`, request `to` at that
// time, keep the maximum observed latency.
SweepResult sweep_mcr(const ModeSystem& system, AllocationPolicy policy,
                      const std::map<ModeIndex, Allocation>& tables, ModeIndex from, ModeIndex to,
                      std::span<const Time> grid);

// Tab-separated `time processor kind task job` lines, exact fractions,
// summary footer.
std::string format_trace(const ModeSystem& system, const SimTrace& trace);

} // namespace mmpart

#endif
