#ifndef MMPART_TASK_MODEL_HPP
#define MMPART_TASK_MODEL_HPP

#include "mmpart/rational.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mmpart {

using TaskIndex = std::size_t;
using ModeIndex = std::size_t;
// 0-based internally; every reader/writer converts to the 1-based pi_1..pi_m.
using ProcessorIndex = std::size_t;

// Raised for any violation of the model invariants (bad input, unknown ids,
// invalid allocations).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TaskKind { ModeIndependent, ModeDependent };

// Sporadic implicit-deadline task.
struct Task {
    std::string id;
    TaskKind kind = TaskKind::ModeDependent;
    Time wcet;
    Time period;
    std::optional<Time> transition_deadline; // MD only
    std::optional<ProcessorIndex> processor; // MI only, mandatory there

    Rational utilization() const { return Rational(wcet / period); }
    bool is_mode_independent() const { return kind == TaskKind::ModeIndependent; }
};

struct Mode {
    std::string id;
    std::vector<TaskIndex> md_tasks;
};

struct ModeGraph {
    std::vector<Mode> modes;
    std::vector<std::pair<ModeIndex, ModeIndex>> edges;

    std::vector<ModeIndex> predecessors(ModeIndex mode) const;
    std::vector<ModeIndex> successors(ModeIndex mode) const;
    bool has_edge(ModeIndex from, ModeIndex to) const;
};

// Unvalidated description, as read from a system file. Numbers stay textual
// so that decimal strings convert exactly.
struct RawTask {
    std::string id;
    std::string kind; // "MI" | "MD"
    std::string wcet;
    std::string period;
    std::optional<std::string> transition_deadline;
    std::optional<long long> processor; // 1-based
};

struct RawMode {
    std::string id;
    std::vector<std::string> md_tasks;
};

struct RawSystem {
    long long processors = 0;
    std::vector<RawTask> tasks;
    std::vector<RawMode> modes;
    std::vector<std::pair<std::string, std::string>> transitions;
};

class ModeSystem {
public:
    // Validates every model invariant; throws ModelError on the first violation.
    static ModeSystem build(const RawSystem& raw);

    std::size_t processor_count() const { return processors_; }
    std::span<const Task> tasks() const { return tasks_; }
    const Task& task(TaskIndex index) const { return tasks_.at(index); }
    const ModeGraph& graph() const { return graph_; }
    std::span<const Mode> modes() const { return graph_.modes; }
    const Mode& mode(ModeIndex index) const { return graph_.modes.at(index); }

    TaskIndex task_index(std::string_view id) const;
    ModeIndex mode_index(std::string_view id) const;

    std::span<const TaskIndex> mi_tasks() const { return mi_tasks_; }
    std::span<const TaskIndex> mi_tasks_on(ProcessorIndex processor) const { return mi_by_processor_.at(processor); }
    const Rational& mi_utilization(ProcessorIndex processor) const { return mi_utilization_.at(processor); }

    // Mode owning an MD task; nullopt for MI tasks.
    std::optional<ModeIndex> owning_mode(TaskIndex task) const
    {
        if (tasks_.at(task).is_mode_independent())
            return std::nullopt;
        return owner_.at(task);
    }

    // Copies of the task records behind a list of indices.
    std::vector<Task> collect(std::span<const TaskIndex> indices) const;

private:
    std::size_t processors_ = 0;
    std::vector<Task> tasks_;
    ModeGraph graph_;
    std::vector<TaskIndex> mi_tasks_;
    std::vector<std::vector<TaskIndex>> mi_by_processor_;
    std::vector<Rational> mi_utilization_;
    std::vector<ModeIndex> owner_;
    std::unordered_map<std::string, TaskIndex> task_lookup_;
    std::unordered_map<std::string, ModeIndex> mode_lookup_;
};

inline ModeSystem build_system(const RawSystem& raw) { return ModeSystem::build(raw); }

// Placement of one mode's MD tasks. processor_of[k] hosts mode.md_tasks[k].
struct Allocation {
    ModeIndex mode = 0;
    std::vector<ProcessorIndex> processor_of;
};

// Total (MI + assigned MD) utilization per processor.
std::vector<Rational> processor_utilizations(const ModeSystem& system, const Allocation& allocation);

// MD tasks of the allocation's mode placed on one processor.
std::vector<TaskIndex> md_tasks_on(const ModeSystem& system, const Allocation& allocation, ProcessorIndex processor);

// Throws ModelError unless every MD task is placed on an existing processor
// and no processor exceeds utilization 1.
void validate_allocation(const ModeSystem& system, const Allocation& allocation);
bool is_valid_allocation(const ModeSystem& system, const Allocation& allocation);

struct UtilizationSummary {
    Rational u_sum;
    Rational u_max; // 0 when the mode has no task at all
    std::vector<Rational> mi_per_processor;
};

UtilizationSummary utilization_summary(const ModeSystem& system, ModeIndex mode);

enum class DeadlineStatus { Pass, Fail, Unchecked };

struct DeadlineVerdict {
    TaskIndex task = 0;
    DeadlineStatus status = DeadlineStatus::Unchecked;
    std::optional<Time> slack; // deadline - L - T, absent when unchecked

    bool passed() const { return status != DeadlineStatus::Fail; }
};

// Transition-deadline validity: L + T <= D. Tasks without a transition
// deadline come back Unchecked (vacuous pass).
DeadlineVerdict check_transition_deadline(const ModeSystem& system, TaskIndex md_task, const Time& latency);

// Max latency over the graph predecessors of `mode`; 0 for a mode without
// incoming edges. latency_by_mode is indexed by ModeIndex.
Time worst_predecessor_latency(const ModeSystem& system, ModeIndex mode, std::span<const Time> latency_by_mode);

} // namespace mmpart

#endif
