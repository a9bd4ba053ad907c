#pragma once

// Discounted infinite-horizon robust control.
//
// The robust Bellman operator is
//   (T v)(x) = min_u { f(x,u) + max_{nu in B(Q(.|x,u), R)} sum_z nu(z) (c(x,u,z) + a v(z)) },
// a contraction with modulus a in the sup norm. The inner maximum is the
// clamped water-fill, which equals f + a <Q, v> + a (R/2) osc(v) when no
// probability hits 0 or 1.

#include "tvdp/finite_horizon.hpp"
#include "tvdp/kernels.hpp"
#include "tvdp/model.hpp"
#include "tvdp/tv_oracle.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace tvdp {

/// Iterative solve failed to settle (iteration cap or policy cycle).
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StationarySolution {
    std::vector<double> values;
    StationaryPolicy policy;
    /// Q*(.|x, policy[x]) for each state.
    std::vector<FiniteDistribution> worst_kernel;
    /// ||T v - v||_inf at the returned values.
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// One application of T; also returns the greedy policy and its maximizers.
kernels::BackupOutput apply_T(const RobustMdpModel& model, std::span<const double> v,
                              const SolveOptions& opts = {});

struct ValueIterationResult {
    StationarySolution solution;
    /// ||v_{k+1} - v_k||_inf per sweep.
    std::vector<double> step_sizes;
};

/**
 * v <- T v from v = 0 until ||v_{k+1} - v_k|| <= tol (1 - a) / (2 a). The
 * returned values are then within tol of the fixed point. If max_iter sweeps
 * pass first, the last iterate is returned with converged = false.
 */
ValueIterationResult value_iteration(const RobustMdpModel& model, double tol = 1e-9,
                                     int max_iter = 1'000'000, const SolveOptions& opts = {});

/// Upper bound on the sweeps value_iteration needs for `tol`.
int value_iteration_bound(const RobustMdpModel& model, double tol);

/// Expected one-step cost of a policy under its nominal kernels.
std::vector<double> nominal_stage_cost(const RobustMdpModel& model,
                                       std::span<const ActionIndex> policy);

/// Solves (I - a Q(g)) V = f(g) for the nominal kernels.
std::vector<double> policy_evaluation_nominal(const RobustMdpModel& model,
                                              std::span<const ActionIndex> policy);

/// worst[x][u] = maximizer of the action's pay-off c(x,u,.) + a reference.
using WorstMatrix = std::vector<std::vector<FiniteDistribution>>;

/// Water-fills every (state, action) row against `reference_values`.
WorstMatrix build_worst_matrix(const RobustMdpModel& model,
                               std::span<const double> reference_values,
                               double tie_tol = kDefaultTieTolerance);

struct RobustEvaluation {
    std::vector<double> values;
    std::vector<FiniteDistribution> kernel;
    /// Number of linear solves until the supports stopped moving.
    int solves = 0;
};

/// Fixed point of V = f(g) + a max_{Q in ball} Q V for a fixed policy,
/// starting from the supports of `start_reference`.
RobustEvaluation robust_policy_evaluation(const RobustMdpModel& model,
                                          std::span<const ActionIndex> policy,
                                          std::span<const double> start_reference,
                                          double tie_tol = kDefaultTieTolerance,
                                          int max_solves = 200);

enum class PiMode {
    /// Supports are identified once per iteration from the nominal evaluation.
    paper,
    /// Supports are re-identified from the robust evaluation until stable.
    fixed_point,
};

struct PolicyIterationStep {
    int index = 0;
    StationaryPolicy policy;
    std::vector<double> nominal_values;
    /// Level sets of the values the worst-case rows were built from.
    SupportPartition supports;
    std::vector<FiniteDistribution> worst_kernel;
    std::vector<double> robust_values;
};

struct PolicyIterationTrace {
    std::vector<PolicyIterationStep> steps;
    /// Improvement passes run, including the final one that changed nothing.
    int improvement_steps = 0;
    /// Improvement passes that changed the policy.
    int policy_changes = 0;
    /// PiMode::paper only: the final robust values have different supports from
    /// the nominal ones the worst-case rows were built on.
    bool support_mismatch = false;
};

struct PolicyIterationResult {
    StationarySolution solution;
    PolicyIterationTrace trace;
};

struct PolicyIterationOptions {
    int max_iter = 1000;
    /// An action replaces the incumbent only if better by more than this.
    double improvement_tol = 1e-12;
    double tie_tol = kDefaultTieTolerance;
};

/// Throws ConvergenceError on a revisited policy or when max_iter passes run.
PolicyIterationResult policy_iteration(const RobustMdpModel& model, StationaryPolicy initial,
                                       PiMode mode = PiMode::fixed_point,
                                       const PolicyIterationOptions& opts = {});

/// Optimal stationary values and actions for each radius.
std::vector<SweepRow> sweep_radius_infinite(const RobustMdpModel& model,
                                            std::span<const double> radii,
                                            const SolveOptions& opts = {});

}  // namespace tvdp
