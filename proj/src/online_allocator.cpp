#include "mmpart/online_allocator.hpp"

#include <algorithm>
#include <numeric>

namespace mmpart {

FeasibilityVerdict lopez_test(const ModeSystem& system, ModeIndex mode)
{
    auto summary = utilization_summary(system, mode);
    FeasibilityVerdict v;
    v.mode = mode;
    v.u_sum = summary.u_sum;
    v.u_max = summary.u_max;
    if (summary.u_max == 0) {
        v.beta = 0;
        v.bound = 1;
    } else {
        v.beta = floor_of(Rational(1 / summary.u_max)).get_si();
        auto m = static_cast<long>(system.processor_count());
        v.bound = Rational(v.beta * m + 1, v.beta + 1);
        v.bound.canonicalize();
    }
    v.margin = v.bound - v.u_sum;
    v.feasible = v.u_sum <= v.bound;
    return v;
}

FfdOutcome first_fit_decreasing(const ModeSystem& system, ModeIndex mode)
{
    const Mode& md = system.mode(mode);
    std::vector<std::size_t> order(md.md_tasks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        Rational ua = system.task(md.md_tasks[a]).utilization();
        Rational ub = system.task(md.md_tasks[b]).utilization();
        if (ua != ub)
            return ua > ub;
        return md.md_tasks[a] < md.md_tasks[b];
    });

    std::vector<Rational> load(system.processor_count());
    for (ProcessorIndex p = 0; p < load.size(); ++p)
        load[p] = system.mi_utilization(p);

    Allocation alloc{mode, std::vector<ProcessorIndex>(md.md_tasks.size())};
    for (std::size_t k : order) {
        Rational u = system.task(md.md_tasks[k]).utilization();
        auto fit = std::find_if(load.begin(), load.end(), [&](const Rational& l) { return l + u <= 1; });
        if (fit == load.end())
            return {std::nullopt, md.md_tasks[k]};
        *fit += u;
        alloc.processor_of[k] = static_cast<ProcessorIndex>(fit - load.begin());
    }
    return {std::move(alloc), std::nullopt};
}

namespace {

// Exact 0-1 knapsack: maximize sum C subject to sum U <= capacity.
// Depth-first, take-first, items in decreasing C/U (= period) order, pruned
// with the fractional (Dantzig) relaxation.
class KnapsackSearch {
public:
    KnapsackSearch(std::span<const Task> items, std::vector<int> forced)
        : items_(items), forced_(std::move(forced))
    {
        for (std::size_t i = 0; i < items.size(); ++i)
            order_.push_back(i);
        std::stable_sort(order_.begin(), order_.end(),
                         [&](std::size_t a, std::size_t b) { return items_[a].period > items_[b].period; });
    }

    // Best achievable z, or nullopt when the forced items alone overflow.
    std::optional<Time> solve(const Rational& capacity)
    {
        Time base = 0;
        Rational room = capacity;
        free_.clear();
        for (std::size_t i : order_) {
            if (forced_[i] == 1) {
                base += items_[i].wcet;
                room -= items_[i].utilization();
            } else if (forced_[i] == -1) {
                free_.push_back(i);
            }
        }
        if (room < 0)
            return std::nullopt;
        best_ = 0;
        dfs(0, 0, room);
        return base + best_;
    }

private:
    Rational relaxation(std::size_t from, const Time& z, Rational room) const
    {
        Rational bound = z;
        for (std::size_t k = from; k < free_.size(); ++k) {
            const Task& t = items_[free_[k]];
            Rational u = t.utilization();
            if (u <= room) {
                room -= u;
                bound += t.wcet;
            } else {
                bound += t.period * room; // C/U = T
                break;
            }
        }
        return bound;
    }

    void dfs(std::size_t k, const Time& z, const Rational& room)
    {
        if (z > best_)
            best_ = z;
        if (k == free_.size())
            return;
        if (relaxation(k, z, room) <= best_)
            return;
        const Task& t = items_[free_[k]];
        Rational u = t.utilization();
        if (u <= room)
            dfs(k + 1, Time(z + t.wcet), Rational(room - u));
        dfs(k + 1, z, room);
    }

    std::span<const Task> items_;
    std::vector<int> forced_; // -1 free, 0 excluded, 1 included
    std::vector<std::size_t> order_;
    std::vector<std::size_t> free_;
    Time best_;
};

} // namespace

SelectionResult max_wcet_selection(std::span<const Task> items, const Rational& capacity)
{
    SelectionResult result;
    result.z = 0;
    if (capacity <= 0 || items.empty())
        return result;

    std::vector<int> forced(items.size(), -1);
    Time optimum = *KnapsackSearch(items, forced).solve(capacity);

    // Fix items in order, preferring exclusion whenever the optimum survives.
    for (std::size_t i = 0; i < items.size(); ++i) {
        forced[i] = 0;
        auto without = KnapsackSearch(items, forced).solve(capacity);
        if (!without || *without != optimum)
            forced[i] = 1;
    }
    for (std::size_t i = 0; i < items.size(); ++i)
        if (forced[i] == 1) {
            result.selected.push_back(i);
            result.z += items[i].wcet;
        }
    return result;
}

KnapsackResult worst_case_selection(const ModeSystem& system, ProcessorIndex processor,
                                    std::span<const TaskIndex> md_pool)
{
    std::vector<TaskIndex> pool(md_pool.begin(), md_pool.end());
    std::sort(pool.begin(), pool.end());

    KnapsackResult r;
    r.processor = processor;
    r.capacity = 1 - system.mi_utilization(processor);
    auto items = system.collect(pool);
    auto sel = max_wcet_selection(items, r.capacity);
    for (std::size_t k : sel.selected)
        r.selected.push_back(pool[k]);
    r.z = sel.z;
    return r;
}

OnlineLatencyBound latency_upper_bound(const ModeSystem& system, ModeIndex source)
{
    OnlineLatencyBound out;
    out.source = source;
    out.bound = 0;
    const auto& pool = system.mode(source).md_tasks;
    for (ProcessorIndex p = 0; p < system.processor_count(); ++p) {
        auto sel = worst_case_selection(system, p, pool);
        auto mi = system.collect(system.mi_tasks_on(p));
        auto lp = busy_period(sel.z, mi);
        if (!lp)
            throw DivergenceError(p, "busy period diverges on processor " + std::to_string(p + 1) + " in mode '"
                                         + system.mode(source).id + "'");
        if (*lp > out.bound)
            out.bound = *lp;
        out.per_processor.push_back(*lp);
        out.selections.push_back(std::move(sel));
    }
    return out;
}

OnlineValidation validate_online_scheme(const ModeSystem& system)
{
    OnlineValidation v;
    std::vector<Time> latency;
    for (ModeIndex m = 0; m < system.modes().size(); ++m) {
        v.bounds.push_back(latency_upper_bound(system, m));
        latency.push_back(v.bounds.back().bound);
    }
    v.pass = true;
    for (ModeIndex m = 0; m < system.modes().size(); ++m) {
        OnlineModeVerdict mv;
        mv.lopez = lopez_test(system, m);
        mv.entry_latency = worst_predecessor_latency(system, m, latency);
        mv.pass = mv.lopez.feasible;
        for (TaskIndex t : system.mode(m).md_tasks) {
            mv.deadlines.push_back(check_transition_deadline(system, t, mv.entry_latency));
            if (!mv.deadlines.back().passed())
                mv.pass = false;
        }
        v.pass = v.pass && mv.pass;
        v.modes.push_back(std::move(mv));
    }
    return v;
}

} // namespace mmpart
