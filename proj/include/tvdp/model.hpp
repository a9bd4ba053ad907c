#pragma once

#include "tvdp/distribution.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tvdp {

/// Index of an action within its state's feasible set.
using ActionIndex = std::size_t;

/// One action per state.
using StationaryPolicy = std::vector<ActionIndex>;

/// policy[j][x] is the action taken in state x at stage j.
using MarkovPolicy = std::vector<StationaryPolicy>;

/**
 * Cost charged for taking an action.
 *
 * Either a scalar f(x,u), or a vector c(x,u,z) over next states, or both (the
 * scalar is then added on top of the next-state term).
 */
struct StageCost {
    double fixed = 0.0;
    std::vector<double> per_next_state;

    [[nodiscard]] bool depends_on_next_state() const noexcept { return !per_next_state.empty(); }
    /// Largest cost this term can charge.
    [[nodiscard]] double max_value() const;
    /// fixed + c(z), or fixed when there is no next-state term.
    [[nodiscard]] double at(std::size_t next_state) const {
        return per_next_state.empty() ? fixed : fixed + per_next_state[next_state];
    }
};

struct ActionSpec {
    std::string label;
    FiniteDistribution kernel;  ///< nominal next-state distribution
    StageCost cost;
};

/**
 * Finite robust MDP: nominal kernels, costs, discount and total-variation
 * radii.
 *
 * `radius` holds either a single entry (one radius for every stage) or, for a
 * finite horizon n, n + 1 entries R_0..R_n where R_{j+1} bounds the kernel
 * that moves the state from stage j to stage j + 1.
 */
struct RobustMdpModel {
    std::vector<std::string> states;
    std::vector<std::vector<ActionSpec>> actions;  ///< indexed by state
    std::vector<double> terminal_cost;             ///< empty means zero
    double discount = 1.0;
    std::vector<double> radius{0.0};
    bool scalar_radius = true;
    std::optional<int> horizon;
    /// Nominal initial distribution; only used by the optional initial-state
    /// worst case of the finite-horizon solver.
    std::optional<FiniteDistribution> initial;

    [[nodiscard]] std::size_t num_states() const noexcept { return states.size(); }
    [[nodiscard]] const ActionSpec& action(std::size_t x, ActionIndex u) const {
        return actions.at(x).at(u);
    }

    /// Radius of the ball around the kernel applied after stage j.
    [[nodiscard]] double transition_radius(std::size_t stage) const;
    /// The single radius; throws if radii vary across stages.
    [[nodiscard]] double uniform_radius() const;

    [[nodiscard]] double terminal(std::size_t x) const {
        return terminal_cost.empty() ? 0.0 : terminal_cost[x];
    }
    /// max over (x, u, z) of the stage cost.
    [[nodiscard]] double max_stage_cost() const;

    [[nodiscard]] std::optional<std::size_t> state_index(const std::string& label) const;
    [[nodiscard]] std::optional<ActionIndex> action_index(std::size_t x,
                                                          const std::string& label) const;

    /// Throws std::invalid_argument if a policy action is outside its feasible set.
    void check_policy(std::span<const ActionIndex> policy) const;

    /// Semantic validation (shapes, kernels, cost signs, radius and discount ranges).
    void validate() const;
};

}  // namespace tvdp
