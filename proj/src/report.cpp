#include "mmpart/report.hpp"

#include "mmpart/system_io.hpp"

#include <iomanip>
#include <sstream>

namespace mmpart {

using nlohmann::json;

namespace {

std::vector<DeadlineVerdict> check_mode_deadlines(const ModeSystem& system, ModeIndex mode, const Time& latency)
{
    std::vector<DeadlineVerdict> out;
    for (TaskIndex t : system.mode(mode).md_tasks)
        out.push_back(check_transition_deadline(system, t, latency));
    return out;
}

bool all_passed(const std::vector<DeadlineVerdict>& verdicts)
{
    for (const auto& v : verdicts)
        if (!v.passed())
            return false;
    return true;
}

// Worst predecessor latency, or nullopt when some predecessor has none.
std::optional<Time> entry_latency(const ModeSystem& system, ModeIndex mode,
                                  const std::vector<std::optional<Time>>& exit_latency)
{
    std::vector<Time> known(exit_latency.size(), Time(0));
    for (ModeIndex pred : system.graph().predecessors(mode)) {
        if (!exit_latency[pred])
            return std::nullopt;
        known[pred] = *exit_latency[pred];
    }
    return worst_predecessor_latency(system, mode, known);
}

const char* status_name(DeadlineStatus s)
{
    switch (s) {
    case DeadlineStatus::Pass: return "pass";
    case DeadlineStatus::Fail: return "fail";
    case DeadlineStatus::Unchecked: return "unchecked";
    }
    return "?";
}

json deadlines_json(const ModeSystem& system, const std::vector<DeadlineVerdict>& verdicts, const std::optional<Time>& latency)
{
    json out = json::array();
    for (const auto& v : verdicts) {
        const Task& t = system.task(v.task);
        json e{{"task", t.id}, {"period", rational_json(t.period)}, {"status", status_name(v.status)}};
        if (t.transition_deadline)
            e["transition_deadline"] = rational_json(*t.transition_deadline);
        if (latency)
            e["latency_plus_period"] = rational_json(*latency + t.period);
        if (v.slack)
            e["slack"] = rational_json(*v.slack);
        out.push_back(std::move(e));
    }
    return out;
}

json latency_json(const ModeSystem& system, const LatencyReport& report, const Allocation& alloc)
{
    json procs = json::array();
    auto loads = processor_utilizations(system, alloc);
    for (const auto& pl : report.per_processor) {
        json p{{"processor", pl.processor + 1}, {"utilization", rational_json(loads[pl.processor])}};
        json md = json::array();
        for (TaskIndex t : md_tasks_on(system, alloc, pl.processor))
            md.push_back(system.task(t).id);
        p["md_tasks"] = md;
        p["ub1"] = pl.ub1 ? rational_json(*pl.ub1) : json(nullptr);
        p["ub2"] = pl.ub2 ? rational_json(*pl.ub2) : json(nullptr);
        p["effective"] = rational_json(pl.effective);
        procs.push_back(std::move(p));
    }
    return procs;
}

json utilization_json(const UtilizationSummary& u)
{
    json mi = json::array();
    for (const auto& r : u.mi_per_processor)
        mi.push_back(rational_json(r));
    return {{"u_sum", rational_json(u.u_sum)}, {"u_max", rational_json(u.u_max)}, {"mi_per_processor", mi}};
}

std::string show(const Rational& r)
{
    if (r.get_den() == 1)
        return to_fraction(r);
    return to_fraction(r) + " (~" + to_decimal(r, 6) + ")";
}

std::string show(const std::optional<Time>& r) { return r ? show(*r) : std::string("--"); }

std::string task_list(const ModeSystem& system, const std::vector<TaskIndex>& tasks)
{
    std::string out;
    for (TaskIndex t : tasks)
        out += (out.empty() ? "" : " ") + system.task(t).id;
    return out.empty() ? "-" : out;
}

void render_processors(std::ostringstream& out, const ModeSystem& system, const LatencyReport& report,
                       const Allocation& alloc)
{
    auto loads = processor_utilizations(system, alloc);
    out << "  " << std::left << std::setw(10) << "processor" << std::setw(24) << "MD tasks" << std::setw(22)
        << "utilization" << std::setw(10) << "UB1" << std::setw(10) << "UB2"
        << "effective\n";
    for (const auto& pl : report.per_processor) {
        out << "  " << std::setw(10) << ("pi_" + std::to_string(pl.processor + 1)) << std::setw(24)
            << task_list(system, md_tasks_on(system, alloc, pl.processor)) << std::setw(22) << show(loads[pl.processor])
            << std::setw(10) << show(pl.ub1) << std::setw(10) << show(pl.ub2) << show(pl.effective) << "\n";
    }
}

void render_deadlines(std::ostringstream& out, const ModeSystem& system, const std::vector<DeadlineVerdict>& verdicts,
                      const std::optional<Time>& latency)
{
    out << "  entry latency (worst predecessor): " << show(latency) << "\n";
    if (verdicts.empty())
        return;
    out << "  " << std::left << std::setw(10) << "task" << std::setw(10) << "T" << std::setw(10) << "D"
        << std::setw(12) << "L+T" << std::setw(10) << "slack"
        << "verdict\n";
    for (const auto& v : verdicts) {
        const Task& t = system.task(v.task);
        out << "  " << std::setw(10) << t.id << std::setw(10) << show(t.period) << std::setw(10)
            << show(t.transition_deadline) << std::setw(12)
            << (latency ? show(Rational(*latency + t.period)) : std::string("--")) << std::setw(10) << show(v.slack)
            << (latency ? status_name(v.status) : "unknown") << "\n";
    }
}

} // namespace

json rational_json(const Rational& value)
{
    return {{"exact", to_fraction(value)}, {"approx", value.get_d()}};
}

OfflineReport analyze_offline(const ModeSystem& system)
{
    OfflineReport report;
    const std::size_t n = system.modes().size();
    std::vector<std::optional<Time>> exit_latency(n);
    for (ModeIndex m = 0; m < n; ++m) {
        OfflineModeSection s;
        s.mode = m;
        s.utilization = utilization_summary(system, m);
        try {
            s.optimum = solve_optimal(system, m);
            s.latency = analyze_allocation(system, s.optimum->best_allocation);
            exit_latency[m] = s.optimum->optimal_latency;
        } catch (const InfeasibleModeError& e) {
            s.error = e.what();
        }
        report.modes.push_back(std::move(s));
    }

    report.pass = true;
    for (auto& s : report.modes) {
        s.entry_latency = entry_latency(system, s.mode, exit_latency);
        if (s.entry_latency)
            s.deadlines = check_mode_deadlines(system, s.mode, *s.entry_latency);
        s.pass = !s.error && s.entry_latency && all_passed(s.deadlines);
        report.pass = report.pass && s.pass;
    }
    return report;
}

OnlineReport analyze_online(const ModeSystem& system)
{
    OnlineReport report;
    const std::size_t n = system.modes().size();
    std::vector<std::optional<Time>> exit_latency(n);
    for (ModeIndex m = 0; m < n; ++m) {
        OnlineModeSection s;
        s.mode = m;
        s.lopez = lopez_test(system, m);
        s.ffd = first_fit_decreasing(system, m);
        if (s.ffd.allocation)
            s.ffd_latency = analyze_allocation(system, *s.ffd.allocation);
        try {
            s.exit_bound = latency_upper_bound(system, m);
            exit_latency[m] = s.exit_bound->bound;
        } catch (const DivergenceError& e) {
            s.error = e.what();
        }
        report.modes.push_back(std::move(s));
    }

    report.pass = true;
    for (auto& s : report.modes) {
        s.entry_latency = entry_latency(system, s.mode, exit_latency);
        if (s.entry_latency)
            s.deadlines = check_mode_deadlines(system, s.mode, *s.entry_latency);
        s.pass = s.lopez.feasible && !s.error && s.entry_latency && all_passed(s.deadlines);
        report.pass = report.pass && s.pass;
    }
    return report;
}

json to_json(const ModeSystem& system, const OfflineReport& report)
{
    json modes = json::array();
    for (const auto& s : report.modes) {
        json m{{"mode", system.mode(s.mode).id}, {"utilization", utilization_json(s.utilization)}};
        if (s.optimum) {
            m["allocation"] = allocation_to_json(system, s.optimum->best_allocation);
            m["platform_bound"] = rational_json(s.optimum->optimal_latency);
            m["explored_nodes"] = s.optimum->explored_nodes;
            m["optimal"] = s.optimum->proof_of_optimality;
            m["processors"] = latency_json(system, *s.latency, s.optimum->best_allocation);
        }
        if (s.error)
            m["error"] = *s.error;
        m["entry_latency"] = s.entry_latency ? rational_json(*s.entry_latency) : json(nullptr);
        m["transition_deadlines"] = deadlines_json(system, s.deadlines, s.entry_latency);
        m["pass"] = s.pass;
        modes.push_back(std::move(m));
    }
    return {{"method", "offline"}, {"processors", system.processor_count()}, {"modes", modes}, {"pass", report.pass}};
}

json to_json(const ModeSystem& system, const OnlineReport& report)
{
    json modes = json::array();
    for (const auto& s : report.modes) {
        json m{{"mode", system.mode(s.mode).id}};
        m["feasibility"] = {{"beta", s.lopez.beta},          {"bound", rational_json(s.lopez.bound)},
                            {"u_sum", rational_json(s.lopez.u_sum)}, {"u_max", rational_json(s.lopez.u_max)},
                            {"margin", rational_json(s.lopez.margin)}, {"feasible", s.lopez.feasible}};
        if (s.ffd.allocation) {
            m["ffd_allocation"] = allocation_to_json(system, *s.ffd.allocation);
            m["ffd_processors"] = latency_json(system, *s.ffd_latency, *s.ffd.allocation);
        } else {
            m["ffd_allocation"] = nullptr;
            m["ffd_unplaced"] = system.task(*s.ffd.unplaced).id;
        }
        if (s.exit_bound) {
            json procs = json::array();
            for (std::size_t p = 0; p < s.exit_bound->selections.size(); ++p) {
                const auto& sel = s.exit_bound->selections[p];
                json chosen = json::array();
                for (TaskIndex t : sel.selected)
                    chosen.push_back(system.task(t).id);
                procs.push_back({{"processor", p + 1},
                                 {"capacity", rational_json(sel.capacity)},
                                 {"selected", chosen},
                                 {"z", rational_json(sel.z)},
                                 {"latency", rational_json(s.exit_bound->per_processor[p])}});
            }
            m["exit_latency_bound"] = {{"processors", procs}, {"bound", rational_json(s.exit_bound->bound)}};
        }
        if (s.error)
            m["error"] = *s.error;
        m["entry_latency"] = s.entry_latency ? rational_json(*s.entry_latency) : json(nullptr);
        m["transition_deadlines"] = deadlines_json(system, s.deadlines, s.entry_latency);
        m["pass"] = s.pass;
        modes.push_back(std::move(m));
    }
    return {{"method", "online"}, {"processors", system.processor_count()}, {"modes", modes}, {"pass", report.pass}};
}

std::string render_table(const ModeSystem& system, const OfflineReport& report)
{
    std::ostringstream out;
    out << "Offline (latency-optimal static allocation), " << system.processor_count() << " processors\n";
    for (const auto& s : report.modes) {
        out << "\nMode " << system.mode(s.mode).id << ": U_sum = " << show(s.utilization.u_sum)
            << ", U_max = " << show(s.utilization.u_max) << "\n";
        if (s.error) {
            out << "  INFEASIBLE: " << *s.error << "\n";
        } else {
            out << "  optimal transition latency bound L = " << show(s.optimum->optimal_latency) << "  ("
                << s.optimum->explored_nodes << " search nodes)\n";
            render_processors(out, system, *s.latency, s.optimum->best_allocation);
        }
        render_deadlines(out, system, s.deadlines, s.entry_latency);
        out << "  mode verdict: " << (s.pass ? "PASS" : "FAIL") << "\n";
    }
    out << "\nGlobal verdict: " << (report.pass ? "PASS" : "FAIL") << "\n";
    return out.str();
}

std::string render_table(const ModeSystem& system, const OnlineReport& report)
{
    std::ostringstream out;
    out << "Online (First-Fit Decreasing), " << system.processor_count() << " processors\n";
    for (const auto& s : report.modes) {
        const auto& v = s.lopez;
        out << "\nMode " << system.mode(s.mode).id << ": U_sum = " << show(v.u_sum) << ", U_max = " << show(v.u_max)
            << ", beta = " << v.beta << ", bound (beta m + 1)/(beta + 1) = " << show(v.bound) << " -> "
            << (v.feasible ? "feasible" : "NOT certified") << "\n";
        if (s.ffd.allocation) {
            out << "  FFD placement:\n";
            render_processors(out, system, *s.ffd_latency, *s.ffd.allocation);
        } else {
            out << "  FFD placement fails at task " << system.task(*s.ffd.unplaced).id << "\n";
        }
        if (s.exit_bound) {
            out << "  worst-case latency when leaving this mode: L = " << show(s.exit_bound->bound) << "\n";
            for (std::size_t p = 0; p < s.exit_bound->selections.size(); ++p) {
                const auto& sel = s.exit_bound->selections[p];
                out << "    pi_" << p + 1 << ": capacity " << show(sel.capacity) << ", selected {"
                    << task_list(system, sel.selected) << "}, z = " << show(sel.z)
                    << ", L_i = " << show(s.exit_bound->per_processor[p]) << "\n";
            }
        }
        if (s.error)
            out << "  ERROR: " << *s.error << "\n";
        render_deadlines(out, system, s.deadlines, s.entry_latency);
        out << "  mode verdict: " << (s.pass ? "PASS" : "FAIL") << "\n";
    }
    out << "\nGlobal verdict: " << (report.pass ? "PASS" : "FAIL") << "\n";
    return out.str();
}

} // namespace mmpart
