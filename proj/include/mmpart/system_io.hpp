#ifndef MMPART_SYSTEM_IO_HPP
#define MMPART_SYSTEM_IO_HPP

#include "mmpart/simulator.hpp"
#include "mmpart/task_model.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace mmpart {

// Malformed or invalid input documents. The message carries the JSON path
// (or line/column for syntax errors).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// System document:
//   { "processors": m,
//     "tasks": [ {"id", "kind": "MI"|"MD", "wcet", "period",
//                 "transition_deadline"?, "processor"?}, ... ],
//     "modes": [ {"id", "md_tasks": [ids]}, ... ],
//     "transitions": [ [from, to], ... ] }
// Numbers are JSON integers or strings ("0.175", "7/40"); JSON floats are
// rejected because they cannot be read exactly.
RawSystem parse_raw_system(const nlohmann::json& doc);
ModeSystem parse_system(const nlohmann::json& doc);
ModeSystem load_system(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

// {"task id": processor (1-based), ...} for one mode.
Allocation parse_allocation(const ModeSystem& system, ModeIndex mode, const nlohmann::json& doc);
nlohmann::json allocation_to_json(const ModeSystem& system, const Allocation& allocation);

struct SweepDirective {
    ModeIndex from = 0;
    ModeIndex to = 0;
    Time step;
};

struct ScenarioFile {
    Scenario scenario;
    std::optional<SweepDirective> sweep;
};

// Scenario document:
//   { "initial_mode", "horizon", "mcrs": [{"time", "to"}],
//     "allocation": "offline-table" | "online-ffd" | {mode: {task: processor}},
//     "release_delays"?: {task: [delay of job 0, job 1, ...]},
//     "sweep"?: {"from_mode", "to_mode", "step"} }
ScenarioFile parse_scenario(const ModeSystem& system, const nlohmann::json& doc);

} // namespace mmpart

#endif
