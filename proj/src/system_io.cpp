#include "mmpart/system_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mmpart {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw InputError(where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object())
        fail(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        fail(where, std::string("missing key '") + key + "'");
    return *it;
}

// Identifiers may be written as strings or integers.
std::string identifier(const json& v, const std::string& where)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number_integer())
        return std::to_string(v.get<long long>());
    fail(where, "expected a string or integer identifier");
}

std::string number_text(const json& v, const std::string& where)
{
    if (v.is_number_integer())
        return std::to_string(v.get<long long>());
    if (v.is_number_unsigned())
        return std::to_string(v.get<unsigned long long>());
    if (v.is_string()) {
        auto s = v.get<std::string>();
        try {
            parse_rational(s);
        } catch (const std::invalid_argument& e) {
            fail(where, e.what());
        }
        return s;
    }
    if (v.is_number_float())
        fail(where, "floating-point literal; write non-integers as decimal strings, e.g. \"0.175\"");
    fail(where, "expected a number");
}

Time number(const json& v, const std::string& where) { return parse_rational(number_text(v, where)); }

long long integer(const json& v, const std::string& where)
{
    if (!v.is_number_integer())
        fail(where, "expected an integer");
    return v.get<long long>();
}

ModeIndex mode_ref(const ModeSystem& system, const json& v, const std::string& where)
{
    try {
        return system.mode_index(identifier(v, where));
    } catch (const ModelError& e) {
        fail(where, e.what());
    }
}

} // namespace

nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError(path.string() + ": cannot open file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw InputError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) + ": "
                         + e.what());
    }
}

RawSystem parse_raw_system(const json& doc)
{
    RawSystem raw;
    raw.processors = integer(require(doc, "processors", "/"), "/processors");

    const json& tasks = require(doc, "tasks", "/");
    if (!tasks.is_array())
        fail("/tasks", "expected an array");
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        std::string at = "/tasks/" + std::to_string(k);
        const json& t = tasks[k];
        RawTask rt;
        rt.id = identifier(require(t, "id", at), at + "/id");
        const json& kind = require(t, "kind", at);
        if (!kind.is_string())
            fail(at + "/kind", "expected \"MI\" or \"MD\"");
        rt.kind = kind.get<std::string>();
        rt.wcet = number_text(require(t, "wcet", at), at + "/wcet");
        rt.period = number_text(require(t, "period", at), at + "/period");
        if (auto it = t.find("transition_deadline"); it != t.end() && !it->is_null())
            rt.transition_deadline = number_text(*it, at + "/transition_deadline");
        if (auto it = t.find("processor"); it != t.end() && !it->is_null())
            rt.processor = integer(*it, at + "/processor");
        raw.tasks.push_back(std::move(rt));
    }

    const json& modes = require(doc, "modes", "/");
    if (!modes.is_array())
        fail("/modes", "expected an array");
    for (std::size_t k = 0; k < modes.size(); ++k) {
        std::string at = "/modes/" + std::to_string(k);
        RawMode rm;
        rm.id = identifier(require(modes[k], "id", at), at + "/id");
        const json& md = require(modes[k], "md_tasks", at);
        if (!md.is_array())
            fail(at + "/md_tasks", "expected an array");
        for (std::size_t j = 0; j < md.size(); ++j)
            rm.md_tasks.push_back(identifier(md[j], at + "/md_tasks/" + std::to_string(j)));
        raw.modes.push_back(std::move(rm));
    }

    if (auto it = doc.find("transitions"); it != doc.end()) {
        if (!it->is_array())
            fail("/transitions", "expected an array");
        for (std::size_t k = 0; k < it->size(); ++k) {
            std::string at = "/transitions/" + std::to_string(k);
            const json& e = (*it)[k];
            if (!e.is_array() || e.size() != 2)
                fail(at, "expected [source, destination]");
            raw.transitions.emplace_back(identifier(e[0], at + "/0"), identifier(e[1], at + "/1"));
        }
    }
    return raw;
}

ModeSystem parse_system(const json& doc)
{
    auto raw = parse_raw_system(doc);
    try {
        return ModeSystem::build(raw);
    } catch (const ModelError& e) {
        throw InputError(std::string("invalid system: ") + e.what());
    }
}

ModeSystem load_system(const std::filesystem::path& path)
{
    try {
        return parse_system(read_json_file(path));
    } catch (const InputError& e) {
        std::string msg = e.what();
        if (msg.rfind(path.string(), 0) == 0)
            throw;
        throw InputError(path.string() + ": " + msg);
    }
}

Allocation parse_allocation(const ModeSystem& system, ModeIndex mode, const json& doc)
{
    const std::string at = "allocation of mode '" + system.mode(mode).id + "'";
    if (!doc.is_object())
        fail(at, "expected an object {task: processor}");
    const Mode& md = system.mode(mode);
    Allocation alloc{mode, std::vector<ProcessorIndex>(md.md_tasks.size(), 0)};
    std::vector<bool> seen(md.md_tasks.size(), false);
    for (const auto& [task_id, proc] : doc.items()) {
        TaskIndex t;
        try {
            t = system.task_index(task_id);
        } catch (const ModelError& e) {
            fail(at, e.what());
        }
        auto pos = std::find(md.md_tasks.begin(), md.md_tasks.end(), t);
        if (pos == md.md_tasks.end())
            fail(at, "task '" + task_id + "' is not an MD task of this mode");
        long long p = integer(proc, at + "/" + task_id);
        if (p < 1 || p > static_cast<long long>(system.processor_count()))
            fail(at, "processor " + std::to_string(p) + " out of range");
        auto k = static_cast<std::size_t>(pos - md.md_tasks.begin());
        alloc.processor_of[k] = static_cast<ProcessorIndex>(p - 1);
        seen[k] = true;
    }
    for (std::size_t k = 0; k < seen.size(); ++k)
        if (!seen[k])
            fail(at, "task '" + system.task(md.md_tasks[k]).id + "' is not placed");
    return alloc;
}

json allocation_to_json(const ModeSystem& system, const Allocation& allocation)
{
    json out = json::object();
    const Mode& md = system.mode(allocation.mode);
    for (std::size_t k = 0; k < md.md_tasks.size(); ++k)
        out[system.task(md.md_tasks[k]).id] = allocation.processor_of[k] + 1;
    return out;
}

ScenarioFile parse_scenario(const ModeSystem& system, const json& doc)
{
    ScenarioFile file;
    Scenario& sc = file.scenario;
    sc.initial_mode = mode_ref(system, require(doc, "initial_mode", "/"), "/initial_mode");
    sc.horizon = number(require(doc, "horizon", "/"), "/horizon");

    if (auto it = doc.find("mcrs"); it != doc.end()) {
        if (!it->is_array())
            fail("/mcrs", "expected an array");
        for (std::size_t k = 0; k < it->size(); ++k) {
            std::string at = "/mcrs/" + std::to_string(k);
            const json& m = (*it)[k];
            sc.mcrs.push_back({number(require(m, "time", at), at + "/time"), mode_ref(system, require(m, "to", at), at + "/to")});
        }
    }

    const json alloc = doc.contains("allocation") ? doc["allocation"] : json("offline-table");
    if (alloc.is_string()) {
        auto policy = alloc.get<std::string>();
        if (policy == "online-ffd") {
            sc.policy = AllocationPolicy::OnlineFfd;
        } else if (policy == "offline-table") {
            sc.policy = AllocationPolicy::StaticTables;
            sc.tables = optimal_tables(system);
        } else {
            fail("/allocation", "expected \"offline-table\", \"online-ffd\" or an explicit table");
        }
    } else if (alloc.is_object()) {
        sc.policy = AllocationPolicy::StaticTables;
        for (const auto& [mode_id, table] : alloc.items()) {
            ModeIndex m = mode_ref(system, json(mode_id), "/allocation/" + mode_id);
            sc.tables.emplace(m, parse_allocation(system, m, table));
        }
    } else {
        fail("/allocation", "expected a string or an object");
    }

    if (auto it = doc.find("release_delays"); it != doc.end()) {
        if (!it->is_object())
            fail("/release_delays", "expected an object {task: [delays]}");
        for (const auto& [task_id, delays] : it->items()) {
            std::string at = "/release_delays/" + task_id;
            TaskIndex t;
            try {
                t = system.task_index(task_id);
            } catch (const ModelError& e) {
                fail(at, e.what());
            }
            if (!delays.is_array())
                fail(at, "expected an array");
            auto& out = sc.release_delays[t];
            for (std::size_t k = 0; k < delays.size(); ++k)
                out.push_back(number(delays[k], at + "/" + std::to_string(k)));
        }
    }

    if (auto it = doc.find("sweep"); it != doc.end()) {
        SweepDirective sw;
        sw.from = mode_ref(system, require(*it, "from_mode", "/sweep"), "/sweep/from_mode");
        sw.to = mode_ref(system, require(*it, "to_mode", "/sweep"), "/sweep/to_mode");
        sw.step = number(require(*it, "step", "/sweep"), "/sweep/step");
        if (sw.step <= 0)
            fail("/sweep/step", "must be positive");
        file.sweep = sw;
    }

    try {
        if (!file.sweep)
            validate_scenario(system, sc);
    } catch (const ScenarioError& e) {
        throw InputError(std::string("invalid scenario: ") + e.what());
    }
    return file;
}

} // namespace mmpart
