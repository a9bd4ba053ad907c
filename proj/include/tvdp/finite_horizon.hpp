#pragma once

// Backward robust dynamic programming over a finite horizon.
//
// Values are kept in time-to-go form: W_n = h and
//   W_j(x) = min_u { f(x,u) + max_{nu in B(Q(.|x,u), R_{j+1})} sum_z nu(z) (c(x,u,z) + a W_{j+1}(z)) }
// with a the discount. The discounted-from-time-zero value is a^j W_j
// (see discounted_values); the two coincide when a = 1.

#include "tvdp/kernels.hpp"
#include "tvdp/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace tvdp {

struct SolveOptions {
    kernels::Execution execution = kernels::Execution::parallel;
    int jobs = 0;
    double tie_tol = kDefaultTieTolerance;
};

struct StagePlan {
    int stage = 0;
    std::vector<double> values;
    /// Empty for the terminal stage.
    StationaryPolicy policy;
    /// Maximizing kernel Q*_{j+1}(.|x, policy[x]); empty for the terminal stage.
    std::vector<FiniteDistribution> worst_kernel;
    /// Radius of the ball the worst kernel was drawn from.
    double radius = 0.0;
};

/// One backward step from `next_values` (stage j + 1) to stage j.
StagePlan stage_backup(const RobustMdpModel& model, std::span<const double> next_values,
                       double stage_radius, const SolveOptions& opts = {});

/// Plans for stages 0..n, indexed by stage; plans[n] carries the terminal cost.
std::vector<StagePlan> solve_finite(const RobustMdpModel& model, const SolveOptions& opts = {});

/// Worst-case value of a fixed Markov policy; result[j] is W_j, j = 0..n.
std::vector<std::vector<double>> evaluate_policy_finite(const RobustMdpModel& model,
                                                        const MarkovPolicy& policy,
                                                        const SolveOptions& opts = {});

/// a^j W_j: the plan's values weighted as seen from time zero.
std::vector<double> discounted_values(const StagePlan& plan, double discount);

struct InitialWorstCase {
    double value = 0.0;
    FiniteDistribution distribution;
};

/// Optional last step: the adversary also perturbs the initial distribution
/// within radius R_0. Requires model.initial.
InitialWorstCase initial_worst_case(const RobustMdpModel& model, const StagePlan& stage0,
                                    double tie_tol = kDefaultTieTolerance);

struct SweepRow {
    double radius = 0.0;
    std::size_t state = 0;
    double value = 0.0;
    ActionIndex action = 0;
};

/// Stage-0 values and actions for each radius (applied to every stage).
/// Radii are solved concurrently when opts.execution is parallel.
std::vector<SweepRow> sweep_radius_finite(const RobustMdpModel& model, std::span<const double> radii,
                                          const SolveOptions& opts = {});

/// Copy of `model` with one radius for every stage.
RobustMdpModel with_radius(const RobustMdpModel& model, double radius);

}  // namespace tvdp
