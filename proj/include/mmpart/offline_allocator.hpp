#ifndef MMPART_OFFLINE_ALLOCATOR_HPP
#define MMPART_OFFLINE_ALLOCATOR_HPP

#include "mmpart/latency_analysis.hpp"
#include "mmpart/task_model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmpart {

class InfeasibleModeError : public std::runtime_error {
public:
    InfeasibleModeError(ModeIndex mode, TaskIndex task, const std::string& what)
        : std::runtime_error(what), mode(mode), task(task) {}
    ModeIndex mode;
    TaskIndex task;
};

struct OptimizationResult {
    ModeIndex mode = 0;
    Allocation best_allocation;
    Time optimal_latency;
    std::uint64_t explored_nodes = 0;
    bool proof_of_optimality = true;
};

// Latency-optimal static allocation of one mode's MD tasks: minimizes the
// platform bound max_i min(UB1_i, UB2_i) over all utilization-feasible
// assignments. Exact depth-first branch and bound; among optimal allocations
// the assignment vector (MD tasks in declaration order, processors ascending)
// is lexicographically smallest.
//
// Throws InfeasibleModeError when no feasible allocation exists.
OptimizationResult solve_optimal(const ModeSystem& system, ModeIndex mode);

// --- MILP export ---------------------------------------------------------

enum class RowSense { LessEqual, Equal };

struct LinearTerm {
    Rational coefficient;
    std::string variable;
};

struct MilpRow {
    std::string name;
    std::vector<LinearTerm> terms;
    RowSense sense = RowSense::LessEqual;
    Rational rhs;
};

struct VariableBound {
    std::string variable;
    Rational lower;
    Rational upper;
};

// The mixed-integer program whose optimum equals solve_optimal's latency:
//   min L
//   sum_i y_i_j = 1                                     j in M
//   sum_l U_l y_i_l + sum_{I_i} U_l <= 1                 each i
//   sum_l C_l y_i_l + sum_{I_i} C_l x_l <= T_j x_j       each i, j in I_i
//   sum_l C_l y_i_l + sum_{I_i} C_l x_l <= L + (1-p_i) HV each i
//   T_j y_i_j <= L + p_i HV                              each i, j in M
struct MilpDocument {
    ModeIndex mode = 0;
    std::string objective = "L";
    std::vector<MilpRow> rows;
    std::vector<std::string> binaries;
    std::vector<std::string> integers;
    std::vector<std::string> continuous;
    std::vector<VariableBound> bounds;
    Time big_m;
};

// Smallest value the big-M constant must strictly exceed: every period of
// the mode and every attainable busy period.
Time big_m_threshold(const ModeSystem& system, ModeIndex mode);

// Sum of all mode task WCETs plus the largest period, raised above the
// threshold when that sum does not dominate it.
Time default_big_m(const ModeSystem& system, ModeIndex mode);

// Throws ModelError if big_m does not strictly exceed big_m_threshold.
MilpDocument export_milp(const ModeSystem& system, ModeIndex mode, std::optional<Time> big_m = std::nullopt);

// CPLEX-LP rendering. Rationals are written as decimals with at most 12
// significant digits; a comment flags the file when any value was rounded.
std::string to_lp(const MilpDocument& doc, const ModeSystem& system);

// Variable assignment that realizes an allocation in the program: y from the
// placement, x_j = ceil(L_i / T_j) from the busy-period fixed point, p_i = 1
// exactly where the busy-period bound is the smaller one, L = platform bound.
std::map<std::string, Rational> incumbent_values(const ModeSystem& system, const Allocation& allocation);

// Exact row check; returns the names of violated rows.
std::vector<std::string> violated_rows(const MilpDocument& doc, const std::map<std::string, Rational>& values);

// LP variable names for tasks and processors (1-based).
std::string lp_name(std::string_view id);
std::string y_var(ProcessorIndex processor, const Task& task);
std::string p_var(ProcessorIndex processor);
std::string x_var(const Task& task);

} // namespace mmpart

#endif
