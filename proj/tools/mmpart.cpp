// mmpart: design-stage analysis of multimode partitioned EDF systems.
//
// Exit status: 0 global pass, 1 analysis failure, 2 input error.

#include "mmpart/offline_allocator.hpp"
#include "mmpart/report.hpp"
#include "mmpart/simulator.hpp"
#include "mmpart/system_io.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kInputError = 2;

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw mmpart::InputError(path + ": cannot open for writing");
    out << text;
    if (!out)
        throw mmpart::InputError(path + ": write failed");
}

int analyze_offline(const std::string& system_path, const std::string& report_path)
{
    auto system = mmpart::load_system(system_path);
    auto report = mmpart::analyze_offline(system);
    std::cout << mmpart::render_table(system, report);
    if (!report_path.empty())
        write_file(report_path, mmpart::to_json(system, report).dump(2) + "\n");
    return report.pass ? kPass : kFail;
}

int analyze_online(const std::string& system_path, const std::string& report_path)
{
    auto system = mmpart::load_system(system_path);
    auto report = mmpart::analyze_online(system);
    std::cout << mmpart::render_table(system, report);
    if (!report_path.empty())
        write_file(report_path, mmpart::to_json(system, report).dump(2) + "\n");
    return report.pass ? kPass : kFail;
}

int simulate(const std::string& system_path, const std::string& scenario_path, const std::string& trace_path)
{
    auto system = mmpart::load_system(system_path);
    mmpart::ScenarioFile file;
    try {
        file = mmpart::parse_scenario(system, mmpart::read_json_file(scenario_path));
    } catch (const mmpart::InputError& e) {
        throw mmpart::InputError(scenario_path + ": " + e.what());
    }

    if (file.sweep) {
        const auto& sw = *file.sweep;
        if (!system.graph().has_edge(sw.from, sw.to))
            throw mmpart::InputError(scenario_path + ": sweep: no transition from '" + system.mode(sw.from).id
                                     + "' to '" + system.mode(sw.to).id + "'");
        auto grid = mmpart::time_grid(mmpart::hyperperiod(system, sw.from), sw.step);
        auto result = mmpart::sweep_mcr(system, file.scenario.policy, file.scenario.tables, sw.from, sw.to, grid);
        std::cout << "sweep " << system.mode(sw.from).id << " -> " << system.mode(sw.to).id << ": " << result.runs
                  << " runs, max-latency "
                  << (result.max_latency ? mmpart::to_fraction(*result.max_latency) : std::string("unbounded"))
                  << " at MCR time " << mmpart::to_fraction(result.argmax) << ", deadline-misses "
                  << result.deadline_misses << "\n";
        if (!trace_path.empty()) {
            mmpart::Scenario worst = file.scenario;
            worst.initial_mode = sw.from;
            worst.mcrs = {{result.argmax, sw.to}};
            worst.horizon = result.argmax + mmpart::sweep_tail(system);
            write_file(trace_path, mmpart::format_trace(system, mmpart::run(system, worst)));
        }
        return result.deadline_misses == 0 && result.all_transitions_ended ? kPass : kFail;
    }

    auto trace = mmpart::run(system, file.scenario);
    auto text = mmpart::format_trace(system, trace);
    if (trace_path.empty())
        std::cout << text;
    else
        write_file(trace_path, text);
    for (const auto& l : trace.latencies)
        std::cout << "# observed latency after MCR at " << mmpart::to_fraction(l.mcr_time) << ": "
                  << (l.latency ? mmpart::to_fraction(*l.latency) : std::string("transition not finished"))
                  << "\n";
    if (!trace_path.empty())
        std::cout << "# deadline-misses\t" << trace.deadline_misses << "\n";
    return trace.deadline_misses == 0 ? kPass : kFail;
}

int export_milp(const std::string& system_path, const std::string& mode_id, const std::string& hv,
                const std::string& out_path)
{
    auto system = mmpart::load_system(system_path);
    mmpart::ModeIndex mode;
    try {
        mode = system.mode_index(mode_id);
    } catch (const mmpart::ModelError& e) {
        throw mmpart::InputError(e.what());
    }
    std::optional<mmpart::Time> big_m;
    if (!hv.empty()) {
        try {
            big_m = mmpart::parse_rational(hv);
        } catch (const std::invalid_argument& e) {
            throw mmpart::InputError(std::string("--hv: ") + e.what());
        }
    }
    mmpart::MilpDocument doc;
    try {
        doc = mmpart::export_milp(system, mode, big_m);
    } catch (const mmpart::ModelError& e) {
        throw mmpart::InputError(e.what());
    }
    write_file(out_path, mmpart::to_lp(doc, system));
    std::cout << "wrote " << out_path << ": " << doc.rows.size() << " constraints, " << doc.binaries.size()
              << " binaries, " << doc.integers.size() << " integers, HV = " << mmpart::to_fraction(doc.big_m) << "\n";
    return kPass;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Transition-latency analysis for multimode partitioned EDF systems"};
    app.require_subcommand(1);

    std::string system_path, scenario_path, report_path, trace_path, mode_id, hv, out_path;

    auto* offline = app.add_subcommand("analyze-offline", "Latency-optimal static allocation per mode");
    offline->add_option("system", system_path, "System file")->required();
    offline->add_option("--report", report_path, "Write the JSON report here");

    auto* online = app.add_subcommand("analyze-online", "FFD certification and worst-case latency bounds");
    online->add_option("system", system_path, "System file")->required();
    online->add_option("--report", report_path, "Write the JSON report here");

    auto* sim = app.add_subcommand("simulate", "Replay a mode-change scenario");
    sim->add_option("system", system_path, "System file")->required();
    sim->add_option("scenario", scenario_path, "Scenario file")->required();
    sim->add_option("--trace", trace_path, "Write the trace here instead of stdout");

    auto* milp = app.add_subcommand("export-milp", "Write the allocation program of one mode in LP format");
    milp->add_option("system", system_path, "System file")->required();
    milp->add_option("--mode", mode_id, "Mode id")->required();
    milp->add_option("--hv", hv, "Big-M constant (integer, decimal or p/q)");
    milp->add_option("-o,--output", out_path, "LP file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    try {
        if (*offline)
            return analyze_offline(system_path, report_path);
        if (*online)
            return analyze_online(system_path, report_path);
        if (*sim)
            return simulate(system_path, scenario_path, trace_path);
        return export_milp(system_path, mode_id, hv, out_path);
    } catch (const mmpart::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const mmpart::ScenarioError& e) {
        std::cerr << "error: invalid scenario: " << e.what() << "\n";
        return kInputError;
    } catch (const mmpart::ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
}
