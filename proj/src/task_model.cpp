#include "mmpart/task_model.hpp"

#include <algorithm>

namespace mmpart {

std::vector<ModeIndex> ModeGraph::predecessors(ModeIndex mode) const
{
    std::vector<ModeIndex> out;
    for (const auto& [from, to] : edges)
        if (to == mode)
            out.push_back(from);
    return out;
}

std::vector<ModeIndex> ModeGraph::successors(ModeIndex mode) const
{
    std::vector<ModeIndex> out;
    for (const auto& [from, to] : edges)
        if (from == mode)
            out.push_back(to);
    return out;
}

bool ModeGraph::has_edge(ModeIndex from, ModeIndex to) const
{
    return std::find(edges.begin(), edges.end(), std::pair{from, to}) != edges.end();
}

namespace {

Time parse_time_field(const std::string& text, const std::string& task, const char* field)
{
    try {
        return parse_rational(text);
    } catch (const std::invalid_argument& e) {
        throw ModelError("task '" + task + "': bad " + field + ": " + e.what());
    }
}

} // namespace

ModeSystem ModeSystem::build(const RawSystem& raw)
{
    ModeSystem sys;
    if (raw.processors < 1)
        throw ModelError("processor count must be at least 1");
    sys.processors_ = static_cast<std::size_t>(raw.processors);

    for (const auto& rt : raw.tasks) {
        if (rt.id.empty())
            throw ModelError("task with empty id");
        if (sys.task_lookup_.count(rt.id))
            throw ModelError("duplicate task id '" + rt.id + "'");

        Task t;
        t.id = rt.id;
        if (rt.kind == "MI")
            t.kind = TaskKind::ModeIndependent;
        else if (rt.kind == "MD")
            t.kind = TaskKind::ModeDependent;
        else
            throw ModelError("task '" + rt.id + "': kind must be MI or MD, got '" + rt.kind + "'");

        t.wcet = parse_time_field(rt.wcet, rt.id, "wcet");
        t.period = parse_time_field(rt.period, rt.id, "period");
        if (t.wcet <= 0)
            throw ModelError("task '" + rt.id + "': wcet must be positive");
        if (t.period <= 0)
            throw ModelError("task '" + rt.id + "': period must be positive");
        if (t.wcet > t.period)
            throw ModelError("task '" + rt.id + "': wcet exceeds period");

        if (t.kind == TaskKind::ModeIndependent) {
            if (!rt.processor)
                throw ModelError("MI task '" + rt.id + "' has no processor");
            if (rt.transition_deadline)
                throw ModelError("MI task '" + rt.id + "' cannot carry a transition deadline");
            if (*rt.processor < 1 || *rt.processor > raw.processors)
                throw ModelError("MI task '" + rt.id + "': processor " + std::to_string(*rt.processor)
                                 + " outside [1, " + std::to_string(raw.processors) + "]");
            t.processor = static_cast<ProcessorIndex>(*rt.processor - 1);
        } else {
            if (rt.processor)
                throw ModelError("MD task '" + rt.id + "' must not name a processor; allocation is computed");
            if (rt.transition_deadline) {
                t.transition_deadline = parse_time_field(*rt.transition_deadline, rt.id, "transition_deadline");
                if (*t.transition_deadline < 0)
                    throw ModelError("task '" + rt.id + "': negative transition deadline");
            }
        }
        sys.task_lookup_.emplace(t.id, sys.tasks_.size());
        sys.tasks_.push_back(std::move(t));
    }

    constexpr ModeIndex unowned = static_cast<ModeIndex>(-1);
    sys.owner_.assign(sys.tasks_.size(), unowned);
    for (const auto& rm : raw.modes) {
        if (rm.id.empty())
            throw ModelError("mode with empty id");
        if (sys.mode_lookup_.count(rm.id))
            throw ModelError("duplicate mode id '" + rm.id + "'");
        ModeIndex mi = sys.graph_.modes.size();
        Mode mode{rm.id, {}};
        for (const auto& tid : rm.md_tasks) {
            auto it = sys.task_lookup_.find(tid);
            if (it == sys.task_lookup_.end())
                throw ModelError("mode '" + rm.id + "' references unknown task '" + tid + "'");
            const Task& t = sys.tasks_[it->second];
            if (t.kind != TaskKind::ModeDependent)
                throw ModelError("mode '" + rm.id + "' lists MI task '" + tid + "'");
            if (sys.owner_[it->second] != unowned)
                throw ModelError("MD task '" + tid + "' belongs to more than one mode");
            sys.owner_[it->second] = mi;
            mode.md_tasks.push_back(it->second);
        }
        sys.mode_lookup_.emplace(rm.id, mi);
        sys.graph_.modes.push_back(std::move(mode));
    }
    if (sys.graph_.modes.empty())
        throw ModelError("system declares no mode");
    for (TaskIndex i = 0; i < sys.tasks_.size(); ++i)
        if (!sys.tasks_[i].is_mode_independent() && sys.owner_[i] == unowned)
            throw ModelError("MD task '" + sys.tasks_[i].id + "' belongs to no mode");

    for (const auto& [from, to] : raw.transitions) {
        ModeIndex a = sys.mode_index(from);
        ModeIndex b = sys.mode_index(to);
        if (a == b)
            throw ModelError("self-loop transition on mode '" + from + "'");
        if (sys.graph_.has_edge(a, b))
            throw ModelError("duplicate transition '" + from + "' -> '" + to + "'");
        sys.graph_.edges.emplace_back(a, b);
    }

    sys.mi_by_processor_.assign(sys.processors_, {});
    sys.mi_utilization_.assign(sys.processors_, Rational(0));
    for (TaskIndex i = 0; i < sys.tasks_.size(); ++i) {
        const Task& t = sys.tasks_[i];
        if (!t.is_mode_independent())
            continue;
        sys.mi_tasks_.push_back(i);
        sys.mi_by_processor_[*t.processor].push_back(i);
        sys.mi_utilization_[*t.processor] += t.utilization();
    }
    for (ProcessorIndex p = 0; p < sys.processors_; ++p)
        if (sys.mi_utilization_[p] > 1)
            throw ModelError("MI utilization on processor " + std::to_string(p + 1) + " is "
                             + to_fraction(sys.mi_utilization_[p]) + " > 1");
    return sys;
}

TaskIndex ModeSystem::task_index(std::string_view id) const
{
    auto it = task_lookup_.find(std::string(id));
    if (it == task_lookup_.end())
        throw ModelError("unknown task '" + std::string(id) + "'");
    return it->second;
}

ModeIndex ModeSystem::mode_index(std::string_view id) const
{
    auto it = mode_lookup_.find(std::string(id));
    if (it == mode_lookup_.end())
        throw ModelError("unknown mode '" + std::string(id) + "'");
    return it->second;
}

std::vector<Task> ModeSystem::collect(std::span<const TaskIndex> indices) const
{
    std::vector<Task> out;
    out.reserve(indices.size());
    for (TaskIndex i : indices)
        out.push_back(tasks_.at(i));
    return out;
}

std::vector<Rational> processor_utilizations(const ModeSystem& system, const Allocation& allocation)
{
    std::vector<Rational> load(system.processor_count());
    for (ProcessorIndex p = 0; p < load.size(); ++p)
        load[p] = system.mi_utilization(p);
    const Mode& mode = system.mode(allocation.mode);
    for (std::size_t k = 0; k < mode.md_tasks.size() && k < allocation.processor_of.size(); ++k)
        if (allocation.processor_of[k] < load.size())
            load[allocation.processor_of[k]] += system.task(mode.md_tasks[k]).utilization();
    return load;
}

std::vector<TaskIndex> md_tasks_on(const ModeSystem& system, const Allocation& allocation, ProcessorIndex processor)
{
    std::vector<TaskIndex> out;
    const Mode& mode = system.mode(allocation.mode);
    for (std::size_t k = 0; k < mode.md_tasks.size(); ++k)
        if (allocation.processor_of.at(k) == processor)
            out.push_back(mode.md_tasks[k]);
    return out;
}

void validate_allocation(const ModeSystem& system, const Allocation& allocation)
{
    if (allocation.mode >= system.modes().size())
        throw ModelError("allocation refers to an unknown mode");
    const Mode& mode = system.mode(allocation.mode);
    if (allocation.processor_of.size() != mode.md_tasks.size())
        throw ModelError("allocation for mode '" + mode.id + "' does not place every MD task exactly once");
    for (std::size_t k = 0; k < mode.md_tasks.size(); ++k)
        if (allocation.processor_of[k] >= system.processor_count())
            throw ModelError("task '" + system.task(mode.md_tasks[k]).id + "' placed on a nonexistent processor");
    auto load = processor_utilizations(system, allocation);
    for (ProcessorIndex p = 0; p < load.size(); ++p)
        if (load[p] > 1)
            throw ModelError("mode '" + mode.id + "': processor " + std::to_string(p + 1) + " utilization "
                             + to_fraction(load[p]) + " exceeds 1");
}

bool is_valid_allocation(const ModeSystem& system, const Allocation& allocation)
{
    try {
        validate_allocation(system, allocation);
        return true;
    } catch (const ModelError&) {
        return false;
    }
}

UtilizationSummary utilization_summary(const ModeSystem& system, ModeIndex mode)
{
    if (mode >= system.modes().size())
        throw ModelError("unknown mode index " + std::to_string(mode));
    UtilizationSummary s;
    s.u_sum = 0;
    s.u_max = 0;
    auto account = [&](TaskIndex i) {
        Rational u = system.task(i).utilization();
        s.u_sum += u;
        if (u > s.u_max)
            s.u_max = u;
    };
    for (TaskIndex i : system.mi_tasks())
        account(i);
    for (TaskIndex i : system.mode(mode).md_tasks)
        account(i);
    for (ProcessorIndex p = 0; p < system.processor_count(); ++p)
        s.mi_per_processor.push_back(system.mi_utilization(p));
    return s;
}

DeadlineVerdict check_transition_deadline(const ModeSystem& system, TaskIndex md_task, const Time& latency)
{
    const Task& t = system.task(md_task);
    if (t.is_mode_independent())
        throw ModelError("transition deadlines apply to MD tasks only ('" + t.id + "')");
    DeadlineVerdict v;
    v.task = md_task;
    if (!t.transition_deadline)
        return v;
    Time slack = *t.transition_deadline - latency - t.period;
    v.status = slack >= 0 ? DeadlineStatus::Pass : DeadlineStatus::Fail;
    v.slack = slack;
    return v;
}

Time worst_predecessor_latency(const ModeSystem& system, ModeIndex mode, std::span<const Time> latency_by_mode)
{
    Time worst = 0;
    for (ModeIndex pred : system.graph().predecessors(mode)) {
        if (pred >= latency_by_mode.size())
            throw ModelError("no latency supplied for mode '" + system.mode(pred).id + "'");
        if (latency_by_mode[pred] > worst)
            worst = latency_by_mode[pred];
    }
    return worst;
}

} // namespace mmpart
