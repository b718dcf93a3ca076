#include "mmpart/offline_allocator.hpp"

#include "mmpart/online_allocator.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <sstream>

namespace mmpart {

namespace {

// Per-processor state of the allocation search.
struct Bin {
    std::vector<Task> mi;
    Rational load;
    Time z;
    Time max_period;
    std::size_t md_count = 0;
    Time effective;
    std::map<Time, std::optional<Time>> busy_cache;

    std::optional<Time> busy(const Time& wcet_sum)
    {
        auto it = busy_cache.find(wcet_sum);
        if (it != busy_cache.end())
            return it->second;
        auto value = busy_period(wcet_sum, mi);
        busy_cache.emplace(wcet_sum, value);
        return value;
    }

    // min(UB1, UB2) after hosting one more task with the given parameters.
    Time effective_with(const Task& t)
    {
        Time ub1 = md_count == 0 || t.period > max_period ? t.period : max_period;
        auto ub2 = busy(Time(z + t.wcet));
        return ub2 && *ub2 < ub1 ? *ub2 : ub1;
    }
};

class AllocationSearch {
public:
    AllocationSearch(const ModeSystem& system, ModeIndex mode) : system_(system), mode_(mode)
    {
        const Mode& md = system.mode(mode);
        for (std::size_t k = 0; k < md.md_tasks.size(); ++k)
            order_.push_back(k);
        std::sort(order_.begin(), order_.end(),
                  [&](std::size_t a, std::size_t b) { return md.md_tasks[a] < md.md_tasks[b]; });
        for (std::size_t k : order_)
            tasks_.push_back(system.task(md.md_tasks[k]));

        std::size_t m = system.processor_count();
        bins_.resize(m);
        std::vector<std::vector<std::pair<Time, Time>>> signature(m);
        for (ProcessorIndex p = 0; p < m; ++p) {
            bins_[p].mi = system.collect(system.mi_tasks_on(p));
            bins_[p].load = system.mi_utilization(p);
            bins_[p].z = 0;
            bins_[p].max_period = 0;
            bins_[p].effective = 0;
            for (const Task& t : bins_[p].mi)
                signature[p].emplace_back(t.wcet, t.period);
            std::sort(signature[p].begin(), signature[p].end());
        }
        // Processors with identical MI task multisets are interchangeable.
        symmetry_class_.resize(m);
        for (ProcessorIndex p = 0; p < m; ++p) {
            symmetry_class_[p] = p;
            for (ProcessorIndex q = 0; q < p; ++q)
                if (signature[q] == signature[p]) {
                    symmetry_class_[p] = symmetry_class_[q];
                    break;
                }
        }
        current_.assign(tasks_.size(), 0);
    }

    OptimizationResult run()
    {
        OptimizationResult result;
        result.mode = mode_;
        dfs(0, Time(0));
        result.explored_nodes = nodes_;
        if (!best_)
            throw_infeasible();

        const Mode& md = system_.mode(mode_);
        result.best_allocation.mode = mode_;
        result.best_allocation.processor_of.assign(md.md_tasks.size(), 0);
        for (std::size_t d = 0; d < order_.size(); ++d)
            result.best_allocation.processor_of[order_[d]] = best_assignment_[d];
        result.optimal_latency = *best_;
        return result;
    }

private:
    bool dominated(const Time& bound) const { return best_ && bound >= *best_; }

    void dfs(std::size_t depth, const Time& bound)
    {
        ++nodes_;
        if (depth == tasks_.size()) {
            if (!dominated(bound)) {
                best_ = bound;
                best_assignment_ = current_;
            }
            return;
        }
        deepest_ = std::max(deepest_, depth);

        // Every unplaced task ends on some processor whose bound it raises at
        // least to its cheapest single placement.
        Time lookahead = bound;
        for (std::size_t d = depth; d < tasks_.size(); ++d) {
            std::optional<Time> cheapest;
            Rational u = tasks_[d].utilization();
            for (auto& bin : bins_) {
                if (bin.load + u > 1)
                    continue;
                Time e = bin.effective_with(tasks_[d]);
                if (!cheapest || e < *cheapest)
                    cheapest = e;
            }
            if (!cheapest)
                return;
            if (*cheapest > lookahead)
                lookahead = *cheapest;
        }
        if (dominated(lookahead))
            return;

        const Task& t = tasks_[depth];
        Rational u = t.utilization();
        for (ProcessorIndex p = 0; p < bins_.size(); ++p) {
            Bin& bin = bins_[p];
            if (bin.load + u > 1)
                continue;
            if (bin.md_count == 0 && symmetric_empty_before(p))
                continue;
            Time e = bin.effective_with(t);
            Time next_bound = e > bound ? e : bound;
            if (dominated(next_bound))
                continue;

            Rational saved_load = bin.load;
            Time saved_z = bin.z;
            Time saved_max_period = bin.max_period;
            Time saved_effective = bin.effective;
            bin.load += u;
            bin.z += t.wcet;
            if (bin.md_count == 0 || t.period > bin.max_period)
                bin.max_period = t.period;
            ++bin.md_count;
            bin.effective = e;
            current_[depth] = p;

            dfs(depth + 1, next_bound);

            bin.load = saved_load;
            bin.z = saved_z;
            bin.max_period = saved_max_period;
            --bin.md_count;
            bin.effective = saved_effective;
        }
    }

    bool symmetric_empty_before(ProcessorIndex p) const
    {
        for (ProcessorIndex q = 0; q < p; ++q)
            if (symmetry_class_[q] == symmetry_class_[p] && bins_[q].md_count == 0)
                return true;
        return false;
    }

    [[noreturn]] void throw_infeasible() const
    {
        const Mode& md = system_.mode(mode_);
        for (std::size_t d = 0; d < tasks_.size(); ++d) {
            Rational u = tasks_[d].utilization();
            bool fits = false;
            for (ProcessorIndex p = 0; p < system_.processor_count(); ++p)
                fits = fits || system_.mi_utilization(p) + u <= 1;
            if (!fits)
                throw InfeasibleModeError(mode_, md.md_tasks[order_[d]],
                                          "mode '" + md.id + "' is infeasible: task '" + tasks_[d].id
                                              + "' fits on no processor");
        }
        std::size_t d = std::min(deepest_, tasks_.size() - 1);
        throw InfeasibleModeError(mode_, md.md_tasks[order_[d]],
                                  "mode '" + md.id + "' is infeasible: no joint placement exists (search fails at task '"
                                      + tasks_[d].id + "')");
    }

    const ModeSystem& system_;
    ModeIndex mode_;
    std::vector<std::size_t> order_; // positions in mode.md_tasks, declaration order
    std::vector<Task> tasks_;
    std::vector<Bin> bins_;
    std::vector<std::size_t> symmetry_class_;
    std::vector<ProcessorIndex> current_;
    std::vector<ProcessorIndex> best_assignment_;
    std::optional<Time> best_;
    std::uint64_t nodes_ = 0;
    std::size_t deepest_ = 0;
};

} // namespace

OptimizationResult solve_optimal(const ModeSystem& system, ModeIndex mode)
{
    if (mode >= system.modes().size())
        throw ModelError("unknown mode index " + std::to_string(mode));
    return AllocationSearch(system, mode).run();
}

// ---------------------------------------------------------------------------

std::string lp_name(std::string_view id)
{
    std::string out;
    for (char c : id)
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? c : '_';
    return out;
}

std::string y_var(ProcessorIndex processor, const Task& task)
{
    return "y_" + std::to_string(processor + 1) + "_" + lp_name(task.id);
}

std::string p_var(ProcessorIndex processor) { return "p_" + std::to_string(processor + 1); }

std::string x_var(const Task& task) { return "x_" + lp_name(task.id); }

Time big_m_threshold(const ModeSystem& system, ModeIndex mode)
{
    Time threshold = 0;
    for (TaskIndex t : system.mode(mode).md_tasks)
        threshold = std::max(threshold, system.task(t).period);
    // The worst-case selection maximizes the busy period over every feasible
    // placement on each processor.
    auto worst = latency_upper_bound(system, mode);
    return std::max(threshold, worst.bound);
}

Time default_big_m(const ModeSystem& system, ModeIndex mode)
{
    Time sum = 0;
    Time max_period = 0;
    for (TaskIndex t : system.mi_tasks())
        sum += system.task(t).wcet;
    for (TaskIndex t : system.mode(mode).md_tasks)
        sum += system.task(t).wcet;
    for (const Task& t : system.tasks())
        max_period = std::max(max_period, t.period);
    Time hv = sum + max_period;
    Time threshold = big_m_threshold(system, mode);
    return hv > threshold ? hv : Time(threshold + 1);
}

MilpDocument export_milp(const ModeSystem& system, ModeIndex mode, std::optional<Time> big_m)
{
    if (mode >= system.modes().size())
        throw ModelError("unknown mode index " + std::to_string(mode));
    Time threshold = big_m_threshold(system, mode);
    Time hv = big_m ? *big_m : default_big_m(system, mode);
    if (hv <= threshold)
        throw ModelError("big-M " + to_fraction(hv) + " does not exceed the largest attainable latency "
                         + to_fraction(threshold));

    MilpDocument doc;
    doc.mode = mode;
    doc.big_m = hv;
    const std::size_t m = system.processor_count();
    const auto& md = system.mode(mode).md_tasks;

    for (TaskIndex j : md) {
        MilpRow row{"assign_" + lp_name(system.task(j).id), {}, RowSense::Equal, 1};
        for (ProcessorIndex i = 0; i < m; ++i)
            row.terms.push_back({1, y_var(i, system.task(j))});
        doc.rows.push_back(std::move(row));
    }

    for (ProcessorIndex i = 0; i < m; ++i) {
        MilpRow row{"util_" + std::to_string(i + 1), {}, RowSense::LessEqual, 1 - system.mi_utilization(i)};
        for (TaskIndex l : md)
            row.terms.push_back({system.task(l).utilization(), y_var(i, system.task(l))});
        doc.rows.push_back(std::move(row));
    }

    // sum_M C y + sum_{I_i} C x, shared by the busy-period rows.
    auto busy_terms = [&](ProcessorIndex i) {
        std::vector<LinearTerm> terms;
        for (TaskIndex l : md)
            terms.push_back({system.task(l).wcet, y_var(i, system.task(l))});
        for (TaskIndex l : system.mi_tasks_on(i))
            terms.push_back({system.task(l).wcet, x_var(system.task(l))});
        return terms;
    };

    for (ProcessorIndex i = 0; i < m; ++i) {
        for (TaskIndex j : system.mi_tasks_on(i)) {
            const Task& tj = system.task(j);
            MilpRow row{"busy_" + std::to_string(i + 1) + "_" + lp_name(tj.id), busy_terms(i), RowSense::LessEqual, 0};
            for (auto& term : row.terms)
                if (term.variable == x_var(tj))
                    term.coefficient -= tj.period;
            doc.rows.push_back(std::move(row));
        }
    }

    for (ProcessorIndex i = 0; i < m; ++i) {
        MilpRow row{"ub2_" + std::to_string(i + 1), busy_terms(i), RowSense::LessEqual, hv};
        row.terms.push_back({-1, "L"});
        row.terms.push_back({hv, p_var(i)});
        doc.rows.push_back(std::move(row));
    }

    for (ProcessorIndex i = 0; i < m; ++i)
        for (TaskIndex j : md) {
            const Task& tj = system.task(j);
            MilpRow row{"ub1_" + std::to_string(i + 1) + "_" + lp_name(tj.id), {}, RowSense::LessEqual, 0};
            row.terms.push_back({tj.period, y_var(i, tj)});
            row.terms.push_back({-1, "L"});
            row.terms.push_back({Rational(-hv), p_var(i)});
            doc.rows.push_back(std::move(row));
        }

    for (ProcessorIndex i = 0; i < m; ++i)
        for (TaskIndex j : md)
            doc.binaries.push_back(y_var(i, system.task(j)));
    for (ProcessorIndex i = 0; i < m; ++i)
        doc.binaries.push_back(p_var(i));
    for (TaskIndex l : system.mi_tasks()) {
        const Task& t = system.task(l);
        doc.integers.push_back(x_var(t));
        doc.bounds.push_back({x_var(t), 0, Rational(ceil_div(hv, t.period))});
    }
    doc.continuous.push_back("L");
    return doc;
}

namespace {

constexpr int lp_digits = 12;

class LpWriter {
public:
    std::string number(const Rational& value)
    {
        bool r = false;
        auto s = to_decimal(value, lp_digits, &r);
        rounded = rounded || r;
        return s;
    }

    std::string expression(const std::vector<LinearTerm>& terms)
    {
        std::string out;
        bool first = true;
        for (const auto& term : terms) {
            if (term.coefficient == 0)
                continue;
            Rational mag = abs(term.coefficient);
            if (first)
                out += term.coefficient < 0 ? "- " : "";
            else
                out += term.coefficient < 0 ? " - " : " + ";
            if (mag != 1)
                out += number(mag) + " ";
            out += term.variable;
            first = false;
        }
        return first ? "0 L" : out;
    }

    bool rounded = false;
};

} // namespace

std::string to_lp(const MilpDocument& doc, const ModeSystem& system)
{
    LpWriter w;
    std::ostringstream body;
    body << "Minimize\n obj: " << doc.objective << "\nSubject To\n";
    for (const auto& row : doc.rows) {
        body << " " << row.name << ": " << w.expression(row.terms)
             << (row.sense == RowSense::Equal ? " = " : " <= ") << w.number(row.rhs) << "\n";
    }
    body << "Bounds\n";
    for (const auto& b : doc.bounds)
        body << " " << w.number(b.lower) << " <= " << b.variable << " <= " << w.number(b.upper) << "\n";
    for (const auto& v : doc.continuous)
        body << " " << v << " >= 0\n";
    body << "Binary\n";
    for (const auto& v : doc.binaries)
        body << " " << v << "\n";
    body << "General\n";
    for (const auto& v : doc.integers)
        body << " " << v << "\n";
    body << "End\n";

    std::ostringstream head;
    head << "\\ Latency-optimal MD task allocation, mode '" << system.mode(doc.mode).id << "'\n";
    head << "\\ processors " << system.processor_count() << ", MD tasks " << system.mode(doc.mode).md_tasks.size()
         << ", MI tasks " << system.mi_tasks().size() << ", HV = " << to_fraction(doc.big_m) << "\n";
    head << "\\ rows " << doc.rows.size() << ", binaries " << doc.binaries.size() << ", integers "
         << doc.integers.size() << ", continuous " << doc.continuous.size() << "\n";
    if (w.rounded)
        head << "\\ WARNING: some coefficients are rounded to " << lp_digits
             << " significant digits; the file is not an exact encoding\n";
    return head.str() + body.str();
}

std::map<std::string, Rational> incumbent_values(const ModeSystem& system, const Allocation& allocation)
{
    auto report = analyze_allocation(system, allocation);
    std::map<std::string, Rational> values;
    const Mode& mode = system.mode(allocation.mode);
    for (ProcessorIndex i = 0; i < system.processor_count(); ++i)
        for (std::size_t k = 0; k < mode.md_tasks.size(); ++k)
            values[y_var(i, system.task(mode.md_tasks[k]))] = allocation.processor_of[k] == i ? 1 : 0;

    for (ProcessorIndex i = 0; i < system.processor_count(); ++i) {
        const auto& pl = report.per_processor[i];
        bool busy_selected = pl.ub2 && pl.ub1 && *pl.ub2 < *pl.ub1;
        values[p_var(i)] = busy_selected ? 1 : 0;

        Time z = 0;
        for (TaskIndex t : md_tasks_on(system, allocation, i))
            z += system.task(t).wcet;
        auto mi = system.collect(system.mi_tasks_on(i));
        Time busy = busy_period(z, mi).value_or(Time(0));
        for (const Task& t : mi)
            values[x_var(t)] = Rational(ceil_div(busy, t.period));
    }
    values["L"] = report.platform_bound;
    return values;
}

std::vector<std::string> violated_rows(const MilpDocument& doc, const std::map<std::string, Rational>& values)
{
    std::vector<std::string> bad;
    for (const auto& row : doc.rows) {
        Rational lhs = 0;
        for (const auto& term : row.terms) {
            auto it = values.find(term.variable);
            if (it != values.end())
                lhs += term.coefficient * it->second;
        }
        bool ok = row.sense == RowSense::Equal ? lhs == row.rhs : lhs <= row.rhs;
        if (!ok)
            bad.push_back(row.name);
    }
    for (const auto& b : doc.bounds) {
        auto it = values.find(b.variable);
        Rational v = it == values.end() ? Rational(0) : it->second;
        if (v < b.lower || v > b.upper)
            bad.push_back(b.variable);
    }
    return bad;
}

} // namespace mmpart
