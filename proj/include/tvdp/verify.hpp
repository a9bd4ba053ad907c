#pragma once

// Independent checks on the solvers. Nothing here calls the water-fill to
// decide whether the water-fill is right: optimality is certified against
// random feasible perturbations and simplex grids, and the dynamic
// programming recursions are checked against exhaustive policy enumeration.

#include "tvdp/finite_horizon.hpp"
#include "tvdp/model.hpp"
#include "tvdp/tv_oracle.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvdp::verify {

/// Enumeration would exceed its policy budget.
class BudgetError : public std::length_error {
public:
    using std::length_error::length_error;
};

struct CheckReport {
    std::string check;
    std::size_t instances = 0;
    std::size_t failures = 0;
    /// Candidates that were not themselves feasible (counted in failures too).
    std::size_t infeasible = 0;
    double max_violation = 0.0;
    std::uint64_t seed = 0;

    [[nodiscard]] bool passed() const noexcept { return failures == 0; }
    /// {"check", "instances", "failures", "max_violation", "seed", "infeasible"}
    [[nodiscard]] std::string to_json() const;
};

inline constexpr double kOptimalityTolerance = 1e-9;

/**
 * Certifies that `candidate` maximizes <l, nu> over the radius ball around
 * mu. Compares against `trials` random feasible points (random pairwise mass
 * transfers out of mu, shrunk back into the ball), the candidate's own
 * maximizer, and for |alphabet| <= 3 a simplex grid of step 1/200.
 */
CheckReport certify_waterfill(const FiniteDistribution& mu, std::span<const double> l,
                              double radius, const WaterfillResult& candidate, int trials,
                              std::uint64_t seed);

/// Runs certify_waterfill on `instances` random (mu, l, R) with alphabets of
/// size 1..max_alphabet and aggregates the result.
CheckReport certify_waterfill_fuzz(std::size_t instances, std::size_t max_alphabet,
                                   int trials_per_instance, std::uint64_t seed);

/// Closed-form maximum for a two-letter alphabet:
/// <l, mu> + min(R/2, mu(argmin l), 1 - mu(argmax l)) osc(l).
double two_point_max(const FiniteDistribution& mu, std::span<const double> l, double radius);

/// Number of deterministic Markov policies of a finite-horizon model.
double markov_policy_count(const RobustMdpModel& model);

/// Componentwise minimum over every deterministic Markov policy of its
/// worst-case stage-0 value.
std::vector<double> brute_force_finite(const RobustMdpModel& model, double budget = 1e6);

struct SufficiencyResult {
    bool passed = false;
    std::vector<double> history_minimum;
    std::vector<double> markov_minimum;
    double max_gap = 0.0;
    double history_policies = 0.0;
};

/// Enumerates every deterministic history-dependent policy (action may depend
/// on the whole state path) against a per-stage adversary, and compares the
/// best of them with the best Markov policy.
SufficiencyResult markov_sufficiency_check(const RobustMdpModel& model, double budget = 1e6);

enum class KernelChoice { nominal, worst, custom };

struct RolloutConfig {
    std::size_t episodes = 10000;
    /// 0 picks the cap from the discounted tail bound.
    int horizon_cap = 0;
    std::uint64_t seed = 0;
    KernelChoice kernel = KernelChoice::nominal;
    /// The truncated tail is kept below stat_tolerance / 10.
    double stat_tolerance = 1e-3;
    int jobs = 0;
};

struct RolloutEstimate {
    std::vector<double> mean;       ///< per start state
    std::vector<double> std_error;  ///< per start state
    int horizon_cap = 0;
};

/// Smallest cap with a^cap f_max / (1 - a) <= stat_tolerance / 10.
int auto_horizon_cap(const RobustMdpModel& model, double stat_tolerance);

/**
 * Simulates `episodes` truncated trajectories from every start state under a
 * stationary policy. `kernels` supplies the per-state next-state distribution
 * for KernelChoice::worst (a solved Q*) and ::custom; it is ignored for
 * ::nominal. Each episode draws from its own stream derived from
 * (seed, start, episode), so results do not depend on the thread count.
 */
RolloutEstimate monte_carlo_rollout(const RobustMdpModel& model,
                                    std::span<const ActionIndex> policy, const RolloutConfig& cfg,
                                    std::span<const FiniteDistribution> kernels = {});

}  // namespace tvdp::verify
