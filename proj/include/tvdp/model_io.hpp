#pragma once

// On-disk formats.
//
// Model document (JSON):
//   states         array of state labels
//   actions        object: state -> array of action labels
//   kernel         object: state -> action -> array of probabilities (ordered as `states`)
//   cost           object: state -> action -> number f(x,u) or array c(x,u,.) over next states
//   terminal_cost  optional array over states
//   discount       number in (0, 1]
//   radius         number, or array R_0..R_n when a horizon is given
//   horizon        optional positive integer
//   initial        optional array over states (nominal initial distribution)
//   description    optional free text, ignored
//
// Solution CSV: stage,state,action,value (stage -1 for a stationary solution).
// Sweep CSV:    radius,state,value,action.
// Numbers are written with 12 significant digits.

#include "tvdp/finite_horizon.hpp"
#include "tvdp/infinite_horizon.hpp"
#include "tvdp/model.hpp"

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tvdp {

/// Malformed or invalid model/solution document. `where` names the offending
/// field path (e.g. "kernel.R.m") or the line/column of a syntax error.
class ModelError : public std::runtime_error {
public:
    ModelError(std::string where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
    [[nodiscard]] const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

/// Kernel rows off by more than this from unit mass are rejected; smaller
/// deviations are renormalized.
inline constexpr double kRowSumTolerance = 1e-6;

RobustMdpModel parse_model(std::string_view text);
RobustMdpModel load_model(const std::filesystem::path& path);
std::string serialize_model(const RobustMdpModel& model);

struct SolutionStage {
    int stage = -1;
    std::vector<double> values;
    std::vector<std::string> policy;                  ///< empty for a terminal stage
    std::vector<std::vector<double>> worst_kernel;   ///< empty for a terminal stage
};

struct SolutionRecord {
    enum class Kind { finite, infinite };
    Kind kind = Kind::finite;
    std::vector<std::string> states;
    std::vector<SolutionStage> stages;
    std::vector<double> radius;
    double discount = 1.0;
    int iterations = 0;
    double residual = 0.0;
    bool converged = true;
};

SolutionRecord make_record(const RobustMdpModel& model, std::span<const StagePlan> plans);
SolutionRecord make_record(const RobustMdpModel& model, const StationarySolution& solution);

/// Checks policy feasibility and that every worst kernel is a distribution
/// inside the radius ball around the nominal kernel. Throws ModelError.
void validate_record(const RobustMdpModel& model, const SolutionRecord& record);

/// Deterministic JSON (sorted keys, 12 significant digits).
std::string serialize_solution(const SolutionRecord& record);
SolutionRecord parse_solution(std::string_view text);

std::string solution_csv(const SolutionRecord& record);

struct SolutionCsvRow {
    int stage = -1;
    std::string state;
    std::string action;
    double value = 0.0;
};
std::vector<SolutionCsvRow> parse_solution_csv(std::string_view text);

std::string sweep_csv(const RobustMdpModel& model, std::span<const SweepRow> rows);

struct SweepCsvRow {
    double radius = 0.0;
    std::string state;
    double value = 0.0;
    std::string action;
};
std::vector<SweepCsvRow> parse_sweep_csv(std::string_view text);

/// Number formatting used by every writer ("%.12g").
std::string format_number(double v);

}  // namespace tvdp
