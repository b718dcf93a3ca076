#include "mmpart/simulator.hpp"

#include "mmpart/offline_allocator.hpp"
#include "mmpart/online_allocator.hpp"

#include <algorithm>
#include <sstream>

namespace mmpart {

std::string_view to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::Release: return "release";
    case EventKind::Start: return "start";
    case EventKind::Preempt: return "preempt";
    case EventKind::Resume: return "resume";
    case EventKind::Complete: return "complete";
    case EventKind::DeadlineMiss: return "deadline-miss";
    case EventKind::ModeChangeRequest: return "MCR";
    case EventKind::MdDisabled: return "MD-disabled";
    case EventKind::TransitionEnd: return "transition-end";
    case EventKind::Enable: return "enable";
    }
    return "?";
}

void validate_scenario(const ModeSystem& system, const Scenario& scenario)
{
    const std::size_t modes = system.modes().size();
    if (scenario.initial_mode >= modes)
        throw ScenarioError("initial mode does not exist");
    if (scenario.horizon < 0)
        throw ScenarioError("negative horizon");

    ModeIndex current = scenario.initial_mode;
    std::vector<ModeIndex> visited{current};
    for (std::size_t k = 0; k < scenario.mcrs.size(); ++k) {
        const auto& mcr = scenario.mcrs[k];
        if (mcr.time < 0)
            throw ScenarioError("MCR at negative time");
        if (k > 0 && mcr.time <= scenario.mcrs[k - 1].time)
            throw ScenarioError("MCR times must be strictly increasing");
        if (mcr.time >= scenario.horizon)
            throw ScenarioError("MCR at " + to_fraction(mcr.time) + " is not before the horizon");
        if (mcr.destination >= modes)
            throw ScenarioError("MCR towards an unknown mode");
        if (!system.graph().has_edge(current, mcr.destination))
            throw ScenarioError("no transition '" + system.mode(current).id + "' -> '"
                                + system.mode(mcr.destination).id + "'");
        current = mcr.destination;
        visited.push_back(current);
    }

    if (scenario.policy == AllocationPolicy::StaticTables) {
        for (ModeIndex m : visited) {
            auto it = scenario.tables.find(m);
            if (it == scenario.tables.end())
                throw ScenarioError("no allocation table for mode '" + system.mode(m).id + "'");
            if (it->second.mode != m)
                throw ScenarioError("allocation table for mode '" + system.mode(m).id + "' names another mode");
            try {
                validate_allocation(system, it->second);
            } catch (const ModelError& e) {
                throw ScenarioError(std::string("invalid allocation table: ") + e.what());
            }
        }
    }
    for (const auto& [task, delays] : scenario.release_delays) {
        if (task >= system.tasks().size())
            throw ScenarioError("release delay for an unknown task");
        for (const auto& d : delays)
            if (d < 0)
                throw ScenarioError("negative release delay for task '" + system.task(task).id + "'");
    }
}

namespace {

using JobId = std::size_t;

class Engine {
public:
    Engine(const ModeSystem& system, const Scenario& scenario) : sys_(system), sc_(scenario)
    {
        const std::size_t n = system.tasks().size();
        task_.resize(n);
        for (TaskIndex i = 0; i < n; ++i)
            if (system.task(i).is_mode_independent())
                task_[i].processor = *system.task(i).processor;
        cpu_.resize(system.processor_count());
    }

    SimTrace run()
    {
        if (sc_.horizon == 0)
            return std::move(trace_);

        now_ = 0;
        mode_ = sc_.initial_mode;
        for (TaskIndex i : sys_.mi_tasks())
            enable(i, false);
        place_and_enable(mode_);

        for (;;) {
            settle();
            flag_misses();
            if (now_ >= sc_.horizon)
                break;
            dispatch();
            advance(next_instant());
        }
        return std::move(trace_);
    }

private:
    struct TaskState {
        ProcessorIndex processor = 0;
        bool enabled = false;
        std::optional<Time> next_release;
        std::uint64_t jobs = 0;
        bool epoch_started = false;
        std::optional<std::size_t> pending_check; // index into transition_checks
    };

    struct Cpu {
        std::vector<JobId> ready;
        std::optional<JobId> running;
    };

    void emit(std::optional<ProcessorIndex> cpu, EventKind kind, std::string subject,
              std::optional<std::uint64_t> job = std::nullopt)
    {
        trace_.events.push_back({now_, cpu, kind, std::move(subject), job});
    }

    Time delay_for(TaskIndex task, std::uint64_t job) const
    {
        auto it = sc_.release_delays.find(task);
        if (it == sc_.release_delays.end() || job >= it->second.size())
            return 0;
        return it->second[job];
    }

    void enable(TaskIndex i, bool announce)
    {
        auto& ts = task_[i];
        ts.enabled = true;
        ts.epoch_started = false;
        ts.next_release = now_ + delay_for(i, ts.jobs);
        if (announce)
            emit(ts.processor, EventKind::Enable, sys_.task(i).id);
    }

    Allocation allocation_for(ModeIndex mode) const
    {
        if (sc_.policy == AllocationPolicy::StaticTables)
            return sc_.tables.at(mode);
        auto ffd = first_fit_decreasing(sys_, mode);
        if (!ffd.allocation)
            throw ScenarioError("online FFD cannot place task '" + sys_.task(*ffd.unplaced).id + "' at time "
                                + to_fraction(now_));
        return *ffd.allocation;
    }

    void place_and_enable(ModeIndex mode)
    {
        Allocation alloc = allocation_for(mode);
        const Mode& md = sys_.mode(mode);
        for (std::size_t k = 0; k < md.md_tasks.size(); ++k) {
            task_[md.md_tasks[k]].processor = alloc.processor_of[k];
            enable(md.md_tasks[k], true);
        }
    }

    // Processes everything due at `now_` except deadline checks and dispatch.
    void settle()
    {
        for (bool changed = true; changed;) {
            changed = false;
            if (now_ < sc_.horizon)
                changed = release_due() || changed;
            if (now_ < sc_.horizon && next_mcr_ < sc_.mcrs.size() && sc_.mcrs[next_mcr_].time == now_) {
                request_mode_change(sc_.mcrs[next_mcr_++]);
                changed = true;
            }
            if (in_transition_ && pending_old_ == 0) {
                end_transition();
                changed = true;
            }
        }
    }

    bool release_due()
    {
        bool any = false;
        for (TaskIndex i = 0; i < task_.size(); ++i) {
            auto& ts = task_[i];
            if (!ts.enabled || !ts.next_release || *ts.next_release != now_)
                continue;
            const Task& t = sys_.task(i);
            JobRecord job;
            job.task = i;
            job.job = ts.jobs++;
            job.processor = ts.processor;
            job.release = now_;
            job.deadline = now_ + t.period;
            job.executed = 0;
            JobId id = trace_.jobs.size();
            trace_.jobs.push_back(job);
            cpu_[ts.processor].ready.push_back(id);
            active_.push_back(id);
            emit(ts.processor, EventKind::Release, t.id, job.job);

            if (!ts.epoch_started) {
                ts.epoch_started = true;
                first_job_[i] = id;
            }
            ts.next_release = now_ + t.period + delay_for(i, ts.jobs);
            any = true;
        }
        return any;
    }

    void request_mode_change(const ModeChangeRequest& mcr)
    {
        if (in_transition_)
            throw ScenarioError("MCR at " + to_fraction(now_) + " arrives during an ongoing transition");
        emit(std::nullopt, EventKind::ModeChangeRequest, sys_.mode(mcr.destination).id);
        in_transition_ = true;
        mcr_time_ = now_;
        destination_ = mcr.destination;

        pending_old_ = 0;
        for (TaskIndex i : sys_.mode(mode_).md_tasks) {
            auto& ts = task_[i];
            ts.enabled = false;
            ts.next_release.reset();
            emit(ts.processor, EventKind::MdDisabled, sys_.task(i).id);
        }
        for (JobId id : active_)
            if (sys_.owning_mode(trace_.jobs[id].task) == std::optional<ModeIndex>(mode_))
                ++pending_old_;
        trace_.latencies.push_back({mcr_time_, mode_, destination_, std::nullopt});
    }

    void end_transition()
    {
        in_transition_ = false;
        trace_.latencies.back().latency = now_ - mcr_time_;
        emit(std::nullopt, EventKind::TransitionEnd, sys_.mode(destination_).id);
        mode_ = destination_;
        place_and_enable(mode_);
        for (TaskIndex i : sys_.mode(mode_).md_tasks) {
            const Task& t = sys_.task(i);
            if (!t.transition_deadline)
                continue;
            task_[i].pending_check = trace_.transition_checks.size();
            trace_.transition_checks.push_back({i, mcr_time_, mcr_time_ + *t.transition_deadline, std::nullopt, false});
        }
    }

    void flag_misses()
    {
        for (JobId id : active_) {
            auto& job = trace_.jobs[id];
            if (job.missed || job.deadline > now_)
                continue;
            job.missed = true;
            ++trace_.deadline_misses;
            emit(job.processor, EventKind::DeadlineMiss, sys_.task(job.task).id, job.job);
        }
        check_flagged_.resize(trace_.transition_checks.size(), false);
        for (std::size_t k = 0; k < trace_.transition_checks.size(); ++k) {
            const auto& check = trace_.transition_checks[k];
            if (check.first_completion || check.absolute_deadline > now_ || check_flagged_[k])
                continue;
            check_flagged_[k] = true;
            ++trace_.deadline_misses;
            auto it = first_job_.find(check.task);
            std::optional<std::uint64_t> job;
            if (it != first_job_.end() && trace_.jobs[it->second].release >= check.mcr_time)
                job = trace_.jobs[it->second].job;
            emit(task_[check.task].processor, EventKind::DeadlineMiss, sys_.task(check.task).id, job);
        }
    }

    bool earlier(JobId a, JobId b) const
    {
        const auto& ja = trace_.jobs[a];
        const auto& jb = trace_.jobs[b];
        if (ja.deadline != jb.deadline)
            return ja.deadline < jb.deadline;
        if (ja.task != jb.task)
            return ja.task < jb.task;
        return ja.job < jb.job;
    }

    void dispatch()
    {
        for (ProcessorIndex p = 0; p < cpu_.size(); ++p) {
            Cpu& c = cpu_[p];
            std::optional<JobId> pick;
            for (JobId id : c.ready)
                if (!pick || earlier(id, *pick))
                    pick = id;
            if (pick == c.running)
                continue;
            if (c.running)
                emit(p, EventKind::Preempt, sys_.task(trace_.jobs[*c.running].task).id, trace_.jobs[*c.running].job);
            if (pick) {
                const auto& job = trace_.jobs[*pick];
                emit(p, job.executed > 0 ? EventKind::Resume : EventKind::Start, sys_.task(job.task).id, job.job);
            }
            c.running = pick;
        }
    }

    Time next_instant() const
    {
        Time next = sc_.horizon;
        auto consider = [&](const Time& t) {
            if (t > now_ && t < next)
                next = t;
        };
        for (const auto& ts : task_)
            if (ts.enabled && ts.next_release)
                consider(*ts.next_release);
        for (const auto& c : cpu_)
            if (c.running) {
                const auto& job = trace_.jobs[*c.running];
                consider(now_ + sys_.task(job.task).wcet - job.executed);
            }
        if (next_mcr_ < sc_.mcrs.size())
            consider(sc_.mcrs[next_mcr_].time);
        for (JobId id : active_)
            if (!trace_.jobs[id].missed)
                consider(trace_.jobs[id].deadline);
        for (const auto& check : trace_.transition_checks)
            if (!check.first_completion)
                consider(check.absolute_deadline);
        return next;
    }

    void advance(const Time& next)
    {
        Time elapsed = next - now_;
        now_ = next;
        for (ProcessorIndex p = 0; p < cpu_.size(); ++p) {
            Cpu& c = cpu_[p];
            if (!c.running)
                continue;
            auto& job = trace_.jobs[*c.running];
            job.executed += elapsed;
            if (job.executed < sys_.task(job.task).wcet)
                continue;
            complete(p, *c.running);
        }
    }

    void complete(ProcessorIndex p, JobId id)
    {
        Cpu& c = cpu_[p];
        auto& job = trace_.jobs[id];
        job.completion = now_;
        emit(p, EventKind::Complete, sys_.task(job.task).id, job.job);
        c.ready.erase(std::find(c.ready.begin(), c.ready.end(), id));
        active_.erase(std::find(active_.begin(), active_.end(), id));
        c.running.reset();

        if (in_transition_ && sys_.owning_mode(job.task) == std::optional<ModeIndex>(mode_))
            --pending_old_;

        auto& ts = task_[job.task];
        auto first = first_job_.find(job.task);
        if (ts.pending_check && first != first_job_.end() && first->second == id) {
            auto& check = trace_.transition_checks[*ts.pending_check];
            check.first_completion = now_;
            check.met = now_ <= check.absolute_deadline;
            ts.pending_check.reset();
        }
    }

    const ModeSystem& sys_;
    const Scenario& sc_;
    SimTrace trace_;
    std::vector<TaskState> task_;
    std::vector<Cpu> cpu_;
    std::map<TaskIndex, JobId> first_job_; // first job of the current enable epoch
    std::vector<JobId> active_; // released, not completed
    std::vector<bool> check_flagged_;
    Time now_;
    ModeIndex mode_ = 0;
    bool in_transition_ = false;
    Time mcr_time_;
    ModeIndex destination_ = 0;
    std::size_t pending_old_ = 0;
    std::size_t next_mcr_ = 0;
};

} // namespace

SimTrace run(const ModeSystem& system, const Scenario& scenario)
{
    validate_scenario(system, scenario);
    return Engine(system, scenario).run();
}

std::map<ModeIndex, Allocation> optimal_tables(const ModeSystem& system)
{
    std::map<ModeIndex, Allocation> tables;
    for (ModeIndex m = 0; m < system.modes().size(); ++m)
        tables.emplace(m, solve_optimal(system, m).best_allocation);
    return tables;
}

Time hyperperiod(const ModeSystem& system, ModeIndex mode)
{
    Time h = 1;
    bool any = false;
    auto fold = [&](TaskIndex i) {
        h = any ? rational_lcm(h, system.task(i).period) : system.task(i).period;
        any = true;
    };
    for (TaskIndex i : system.mi_tasks())
        fold(i);
    for (TaskIndex i : system.mode(mode).md_tasks)
        fold(i);
    return h;
}

std::vector<Time> time_grid(const Time& end, const Time& step)
{
    if (step <= 0)
        throw ScenarioError("sweep step must be positive");
    std::vector<Time> grid;
    for (Time t = 0; t < end; t += step)
        grid.push_back(t);
    return grid;
}

Time sweep_tail(const ModeSystem& system)
{
    Time tail = 1;
    Time max_period = 0;
    for (const Task& t : system.tasks()) {
        tail += t.wcet;
        max_period = std::max(max_period, t.period);
        if (t.transition_deadline)
            tail = std::max(tail, Time(*t.transition_deadline + 1));
    }
    return tail + 2 * max_period;
}

SweepResult sweep_mcr(const ModeSystem& system, AllocationPolicy policy,
                      const std::map<ModeIndex, Allocation>& tables, ModeIndex from, ModeIndex to,
                      std::span<const Time> grid)
{
    if (!system.graph().has_edge(from, to))
        throw ScenarioError("no transition '" + system.mode(from).id + "' -> '" + system.mode(to).id + "'");

    const Time tail = sweep_tail(system);

    SweepResult result;
    result.argmax = 0;
    std::optional<Time> worst;
    for (const Time& at : grid) {
        Scenario sc;
        sc.initial_mode = from;
        sc.policy = policy;
        sc.tables = tables;
        sc.mcrs = {{at, to}};
        sc.horizon = at + tail;
        auto trace = run(system, sc);
        ++result.runs;
        result.deadline_misses += trace.deadline_misses;
        const auto& observed = trace.latencies.at(0).latency;
        if (!observed) {
            result.all_transitions_ended = false;
            continue;
        }
        if (!worst || *observed > *worst) {
            worst = *observed;
            result.argmax = at;
        }
    }
    result.max_latency = result.all_transitions_ended ? worst : std::nullopt;
    return result;
}

std::string format_trace(const ModeSystem& system, const SimTrace& trace)
{
    std::ostringstream out;
    out << "# time\tprocessor\tkind\ttask\tjob\n";
    for (const auto& e : trace.events) {
        out << to_fraction(e.time) << '\t' << (e.processor ? std::to_string(*e.processor + 1) : "-") << '\t'
            << to_string(e.kind) << '\t' << e.subject << '\t' << (e.job ? std::to_string(*e.job) : "-") << '\n';
    }
    for (const auto& l : trace.latencies)
        out << "# latency\t" << system.mode(l.from).id << "->" << system.mode(l.to).id << "\tmcr "
            << to_fraction(l.mcr_time) << '\t' << (l.latency ? to_fraction(*l.latency) : "unfinished") << '\n';
    for (const auto& c : trace.transition_checks)
        out << "# transition-deadline\t" << system.task(c.task).id << "\tdeadline " << to_fraction(c.absolute_deadline)
            << "\tfirst-completion " << (c.first_completion ? to_fraction(*c.first_completion) : "none") << '\t'
            << (c.met ? "met" : "not-met") << '\n';
    out << "# deadline-misses\t" << trace.deadline_misses << '\n';
    return out.str();
}

} // namespace mmpart
