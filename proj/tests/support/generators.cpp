#include "generators.hpp"

#include <sstream>

namespace gen {

namespace {

long uniform(std::mt19937_64& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

long draw_period(std::mt19937_64& rng, const Shape& shape)
{
    static const long divisors[] = {2, 3, 4, 5, 6, 10, 12, 15, 20, 30};
    if (!shape.small_hyperperiod)
        return uniform(rng, 1, shape.max_value);
    for (;;) {
        long t = divisors[uniform(rng, 0, 9)];
        if (t <= shape.max_value)
            return t;
    }
}

} // namespace

mmpart::RawSystem random_system(std::mt19937_64& rng, const Shape& shape)
{
    mmpart::RawSystem raw;
    const std::size_t m = static_cast<std::size_t>(uniform(rng, 1, static_cast<long>(shape.max_processors)));
    raw.processors = static_cast<long long>(m);
    const std::size_t n = static_cast<std::size_t>(uniform(rng, 1, static_cast<long>(shape.max_tasks)));
    const std::size_t mi_count = static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(n) - 1));

    std::vector<mmpart::Rational> mi_load(m, 0);
    for (std::size_t k = 0; k < n; ++k) {
        mmpart::RawTask t;
        t.id = "t" + std::to_string(k + 1);
        long period = draw_period(rng, shape);
        long wcet = uniform(rng, 1, period);
        if (k < mi_count) {
            auto p = static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(m) - 1));
            // Shrink the job until the processor stays schedulable; a lone
            // unit job on a full processor becomes an MD task instead.
            while (wcet > 1 && mi_load[p] + fraction(wcet, period) > 1)
                --wcet;
            if (mi_load[p] + fraction(wcet, period) <= 1) {
                mi_load[p] += fraction(wcet, period);
                t.kind = "MI";
                t.processor = static_cast<long long>(p + 1);
                t.wcet = std::to_string(wcet);
                t.period = std::to_string(period);
                raw.tasks.push_back(std::move(t));
                continue;
            }
        }
        t.kind = "MD";
        t.wcet = std::to_string(wcet);
        t.period = std::to_string(period);
        if (shape.with_deadlines)
            t.transition_deadline = std::to_string(uniform(rng, period, 6 * shape.max_value));
        raw.tasks.push_back(std::move(t));
    }

    const std::size_t modes = std::max<std::size_t>(1, shape.modes);
    for (std::size_t k = 0; k < modes; ++k)
        raw.modes.push_back({"m" + std::to_string(k + 1), {}});
    std::size_t next = 0;
    for (const auto& t : raw.tasks)
        if (t.kind == "MD") {
            // Round robin first so that every mode gets work when possible.
            std::size_t mode = next < modes ? next : static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(modes) - 1));
            ++next;
            raw.modes[mode].md_tasks.push_back(t.id);
        }
    if (modes > 1)
        for (std::size_t k = 0; k < modes; ++k)
            raw.transitions.emplace_back(raw.modes[k].id, raw.modes[(k + 1) % modes].id);
    return raw;
}

std::string describe(const mmpart::RawSystem& raw)
{
    std::ostringstream out;
    out << "m=" << raw.processors;
    for (const auto& t : raw.tasks) {
        out << " " << t.id << "(" << t.kind << " C=" << t.wcet << " T=" << t.period;
        if (t.processor)
            out << " P=" << *t.processor;
        if (t.transition_deadline)
            out << " D=" << *t.transition_deadline;
        out << ")";
    }
    for (const auto& m : raw.modes) {
        out << " " << m.id << "{";
        for (const auto& id : m.md_tasks)
            out << " " << id;
        out << " }";
    }
    return out.str();
}

} // namespace gen

namespace fixture {

namespace {

mmpart::RawTask mi(const char* id, const char* c, const char* t, long long p)
{
    return {id, "MI", c, t, std::nullopt, p};
}

mmpart::RawTask md(const char* id, const char* c, const char* t, const std::string& d)
{
    return {id, "MD", c, t, d, std::nullopt};
}

} // namespace

mmpart::RawSystem case_study_raw(const std::string& t10_deadline)
{
    mmpart::RawSystem raw;
    raw.processors = 2;
    raw.tasks = {mi("t1", "10", "30", 1),      mi("t2", "20", "60", 1),       mi("t3", "15", "90", 2),
                 mi("t4", "20", "100", 2),     md("t5", "7", "40", "150"),    md("t6", "1", "10", "100"),
                 md("t7", "1", "20", "150"),   md("t8", "2", "30", "200"),    md("t9", "3", "25", "200"),
                 md("t10", "50", "100", t10_deadline)};
    raw.modes = {{"1", {"t5", "t6", "t7", "t8", "t9"}}, {"2", {"t10"}}};
    raw.transitions = {{"1", "2"}, {"2", "1"}};
    return raw;
}

mmpart::ModeSystem case_study(const std::string& t10_deadline)
{
    return mmpart::ModeSystem::build(case_study_raw(t10_deadline));
}

mmpart::RawSystem table1_raw()
{
    mmpart::RawSystem raw;
    raw.processors = 2;
    raw.tasks = {mi("t1", "1", "3", 1), md("t2", "3", "5", "20"), mi("t3", "4", "5", 2), md("t4", "1", "5", "20"),
                 md("t5", "3", "5", "11")};
    raw.modes = {{"old", {"t2", "t4"}}, {"new", {"t5"}}};
    raw.transitions = {{"old", "new"}};
    return raw;
}

mmpart::ModeSystem table1() { return mmpart::ModeSystem::build(table1_raw()); }

} // namespace fixture
