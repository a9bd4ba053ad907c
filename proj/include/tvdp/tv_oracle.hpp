#pragma once

// Worst-case (maximizing) distributions over a total-variation ball.
//
// Throughout the library the total-variation distance is the UNhalved l1
// distance, so radii live in [0, 2]. A radius of 2 lets the adversary move
// all of the nominal mass.

#include "tvdp/distribution.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace tvdp {

/// Relative tolerance used to merge nearly equal pay-off levels.
inline constexpr double kDefaultTieTolerance = 1e-9;

/**
 * Level sets of a pay-off vector.
 *
 * `sigma_max` holds the indices attaining the maximum. `sigma_levels` holds
 * the remaining indices grouped by value in ascending order, so
 * `sigma_levels.front()` is the set of minimizers whenever the vector is not
 * constant. For a constant vector every index is in `sigma_max` and
 * `sigma_levels` is empty.
 */
struct SupportPartition {
    std::vector<std::size_t> sigma_max;
    double max_level = 0.0;
    std::vector<std::vector<std::size_t>> sigma_levels;
    std::vector<double> levels;

    [[nodiscard]] bool degenerate() const noexcept { return sigma_levels.empty(); }

    friend bool operator==(const SupportPartition& a, const SupportPartition& b) {
        return a.sigma_max == b.sigma_max && a.sigma_levels == b.sigma_levels;
    }
};

struct WaterfillResult {
    FiniteDistribution maximizer;
    double value = 0.0;
    /// min(radius, r_max); the distance the maximizer actually sits from mu.
    double effective_radius = 0.0;
    /// 2 (1 - mu(sigma_max)): the radius beyond which nothing more can move.
    double r_max = 0.0;
};

/// sup l - inf l. Throws on an empty vector.
double oscillation(std::span<const double> l);

/// Groups indices whose values differ by at most tie_tol * max(1, |level|).
SupportPartition partition_levels(std::span<const double> l,
                                  double tie_tol = kDefaultTieTolerance);

/**
 * Maximizes <l, nu> over {nu : ||nu - mu||_TV <= radius}.
 *
 * Mass alpha/2 (alpha = min(radius, r_max)) is added to the maximizing set and
 * removed from the lowest levels upward, emptying each in turn. Added mass is
 * spread proportionally to mu on the maximizing set (uniformly if mu gives it
 * no mass); removed mass is taken proportionally to mu within each set.
 */
WaterfillResult waterfill_maximize(const FiniteDistribution& mu, std::span<const double> l,
                                   double radius, double tie_tol = kDefaultTieTolerance);

/// Same as above with a precomputed partition of `l`.
WaterfillResult waterfill_maximize(const FiniteDistribution& mu, std::span<const double> l,
                                   const SupportPartition& partition, double radius);

/// <l, mu> + (radius / 2) osc(l). Agrees with waterfill_maximize only when no
/// clamping happens (radius <= r_max and radius / 2 <= mu(argmin l)).
double unclamped_value(const FiniteDistribution& mu, std::span<const double> l, double radius);

/// Throws std::invalid_argument unless radius is in [0, 2].
void check_radius(double radius);

}  // namespace tvdp
