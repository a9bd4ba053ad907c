#include "tvdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tvdp {

double StageCost::max_value() const {
    if (per_next_state.empty()) return fixed;
    return fixed + *std::max_element(per_next_state.begin(), per_next_state.end());
}

double RobustMdpModel::transition_radius(std::size_t stage) const {
    if (radius.empty()) throw std::logic_error("model has no radius");
    if (radius.size() == 1) return radius.front();
    if (stage + 1 >= radius.size()) throw std::out_of_range("no radius for this stage");
    return radius[stage + 1];
}

double RobustMdpModel::uniform_radius() const {
    if (radius.empty()) throw std::logic_error("model has no radius");
    const double r = radius.front();
    if (std::any_of(radius.begin(), radius.end(), [r](double v) { return v != r; })) {
        throw std::invalid_argument("infinite-horizon solves require a single radius");
    }
    return r;
}

double RobustMdpModel::max_stage_cost() const {
    double m = 0.0;
    for (const auto& acts : actions) {
        for (const auto& a : acts) m = std::max(m, a.cost.max_value());
    }
    return m;
}

std::optional<std::size_t> RobustMdpModel::state_index(const std::string& label) const {
    auto it = std::find(states.begin(), states.end(), label);
    if (it == states.end()) return std::nullopt;
    return static_cast<std::size_t>(it - states.begin());
}

std::optional<ActionIndex> RobustMdpModel::action_index(std::size_t x,
                                                        const std::string& label) const {
    const auto& acts = actions.at(x);
    for (std::size_t u = 0; u < acts.size(); ++u) {
        if (acts[u].label == label) return u;
    }
    return std::nullopt;
}

void RobustMdpModel::check_policy(std::span<const ActionIndex> policy) const {
    if (policy.size() != num_states()) {
        throw std::invalid_argument("policy does not cover every state");
    }
    for (std::size_t x = 0; x < policy.size(); ++x) {
        if (policy[x] >= actions[x].size()) {
            throw std::invalid_argument("infeasible action in state " + states[x]);
        }
    }
}

void RobustMdpModel::validate() const {
    const std::size_t n = num_states();
    if (n == 0) throw std::invalid_argument("model has no states");
    if (actions.size() != n) throw std::invalid_argument("actions not given for every state");
    for (std::size_t x = 0; x < n; ++x) {
        for (const auto& a : actions[x]) {
            if (a.kernel.size() != n) {
                throw std::invalid_argument("kernel of " + states[x] + "/" + a.label +
                                            " has the wrong length");
            }
            if (!std::isfinite(a.cost.fixed) || a.cost.fixed < 0.0) {
                throw std::invalid_argument("negative cost at " + states[x] + "/" + a.label);
            }
            if (a.cost.depends_on_next_state()) {
                if (a.cost.per_next_state.size() != n) {
                    throw std::invalid_argument("cost vector of " + states[x] + "/" + a.label +
                                                " has the wrong length");
                }
                for (double c : a.cost.per_next_state) {
                    if (!std::isfinite(c) || c < 0.0) {
                        throw std::invalid_argument("negative cost at " + states[x] + "/" +
                                                    a.label);
                    }
                }
            }
        }
    }
    if (!terminal_cost.empty()) {
        if (terminal_cost.size() != n) throw std::invalid_argument("terminal_cost length");
        for (double h : terminal_cost) {
            if (!std::isfinite(h) || h < 0.0) throw std::invalid_argument("negative terminal cost");
        }
    }
    if (!(discount > 0.0 && discount <= 1.0)) {
        throw std::invalid_argument("discount must lie in (0, 1]");
    }
    if (radius.empty()) throw std::invalid_argument("radius missing");
    for (double r : radius) {
        if (!(r >= 0.0 && r <= 2.0)) throw std::invalid_argument("radius outside [0, 2]");
    }
    if (horizon) {
        if (*horizon < 1) throw std::invalid_argument("horizon must be a positive integer");
        if (radius.size() != 1 && radius.size() != static_cast<std::size_t>(*horizon) + 1) {
            throw std::invalid_argument("per-stage radius list must have horizon + 1 entries");
        }
    } else if (radius.size() != 1) {
        throw std::invalid_argument("a radius list requires a horizon");
    }
    if (initial && initial->size() != n) {
        throw std::invalid_argument("initial distribution has the wrong length");
    }
}

}  // namespace tvdp
