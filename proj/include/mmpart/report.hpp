#ifndef MMPART_REPORT_HPP
#define MMPART_REPORT_HPP

#include "mmpart/latency_analysis.hpp"
#include "mmpart/offline_allocator.hpp"
#include "mmpart/online_allocator.hpp"
#include "mmpart/task_model.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mmpart {

struct OfflineModeSection {
    ModeIndex mode = 0;
    UtilizationSummary utilization;
    std::optional<OptimizationResult> optimum;
    std::optional<LatencyReport> latency;
    std::optional<std::string> error; // infeasible mode
    std::optional<Time> entry_latency; // absent if a predecessor is infeasible
    std::vector<DeadlineVerdict> deadlines;
    bool pass = false;
};

struct OfflineReport {
    std::vector<OfflineModeSection> modes;
    bool pass = false;
};

// Optimal allocation per mode, its latency bounds, and the transition
// deadlines of each mode checked against the worst predecessor optimum.
OfflineReport analyze_offline(const ModeSystem& system);

struct OnlineModeSection {
    ModeIndex mode = 0;
    FeasibilityVerdict lopez;
    FfdOutcome ffd;
    std::optional<LatencyReport> ffd_latency;
    std::optional<OnlineLatencyBound> exit_bound; // this mode as the source
    std::optional<std::string> error;
    std::optional<Time> entry_latency;
    std::vector<DeadlineVerdict> deadlines;
    bool pass = false;
};

struct OnlineReport {
    std::vector<OnlineModeSection> modes;
    bool pass = false;
};

OnlineReport analyze_online(const ModeSystem& system);

// Exact value plus a clearly labelled decimal approximation.
nlohmann::json rational_json(const Rational& value);

nlohmann::json to_json(const ModeSystem& system, const OfflineReport& report);
nlohmann::json to_json(const ModeSystem& system, const OnlineReport& report);

std::string render_table(const ModeSystem& system, const OfflineReport& report);
std::string render_table(const ModeSystem& system, const OnlineReport& report);

} // namespace mmpart

#endif
