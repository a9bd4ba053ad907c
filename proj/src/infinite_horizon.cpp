#include "tvdp/infinite_horizon.hpp"

#include "tvdp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <string>

namespace tvdp {

namespace {

double require_discounted(const RobustMdpModel& model) {
    if (!(model.discount > 0.0 && model.discount < 1.0)) {
        throw std::invalid_argument("infinite-horizon solves need a discount in (0, 1)");
    }
    return model.uniform_radius();
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// fixed + sum_z row(z) c(z): one-step cost of an action under a given kernel row.
double expected_cost(const ActionSpec& a, const FiniteDistribution& row) {
    if (!a.cost.depends_on_next_state()) return a.cost.fixed;
    return a.cost.fixed + row.expectation(a.cost.per_next_state);
}

std::vector<double> payoff(const ActionSpec& a, std::span<const double> v, double discount) {
    std::vector<double> l(v.size());
    for (std::size_t z = 0; z < v.size(); ++z) {
        l[z] = (a.cost.depends_on_next_state() ? a.cost.per_next_state[z] : 0.0) + discount * v[z];
    }
    return l;
}

std::vector<double> evaluate_rows(const RobustMdpModel& model, std::span<const ActionIndex> policy,
                                  std::span<const FiniteDistribution> rows) {
    std::vector<double> cost(model.num_states());
    for (std::size_t x = 0; x < cost.size(); ++x) {
        cost[x] = expected_cost(model.action(x, policy[x]), rows[x]);
    }
    return solve_discounted_evaluation(rows, cost, model.discount);
}

// Worst-case rows for the policy's actions against `reference`, with the
// partitions they were built from.
void worst_rows(const RobustMdpModel& model, std::span<const ActionIndex> policy,
                std::span<const double> reference, double radius, double tie_tol,
                std::vector<FiniteDistribution>& rows, std::vector<SupportPartition>& parts) {
    const std::size_t n = model.num_states();
    rows.resize(n);
    parts.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
        const ActionSpec& a = model.action(x, policy[x]);
        const auto l = payoff(a, reference, model.discount);
        parts[x] = partition_levels(l, tie_tol);
        rows[x] = waterfill_maximize(a.kernel, l, parts[x], radius).maximizer;
    }
}

SolveOptions solve_opts(double tie_tol) {
    SolveOptions o;
    o.tie_tol = tie_tol;
    return o;
}

}  // namespace

kernels::BackupOutput apply_T(const RobustMdpModel& model, std::span<const double> v,
                              const SolveOptions& opts) {
    const double radius = require_discounted(model);
    const kernels::BackupParams params{
        .continuation_weight = model.discount, .radius = radius, .tie_tol = opts.tie_tol};
    return kernels::robust_backup(model, v, params, opts.execution, opts.jobs);
}

int value_iteration_bound(const RobustMdpModel& model, double tol) {
    const double a = model.discount;
    const double fmax = model.max_stage_cost();
    if (fmax <= 0.0) return 1;
    const double target = tol * (1.0 - a) * (1.0 - a) / (2.0 * a);
    const double k = std::ceil(std::log(fmax / target) / std::log(1.0 / a));
    return std::max(1, static_cast<int>(k) + 1);
}

ValueIterationResult value_iteration(const RobustMdpModel& model, double tol, int max_iter,
                                     const SolveOptions& opts) {
    require_discounted(model);
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
    const double a = model.discount;
    const double threshold = tol * (1.0 - a) / (2.0 * a);

    ValueIterationResult res;
    std::vector<double> v(model.num_states(), 0.0);
    bool converged = false;
    int k = 0;
    while (k < max_iter) {
        auto next = apply_T(model, v, opts);
        ++k;
        const double step = sup_distance(next.values, v);
        res.step_sizes.push_back(step);
        v = std::move(next.values);
        if (step <= threshold) {
            converged = true;
            break;
        }
    }

    auto greedy = apply_T(model, v, opts);
    StationarySolution& s = res.solution;
    s.residual = sup_distance(greedy.values, v);
    s.values = std::move(v);
    s.policy = std::move(greedy.policy);
    s.worst_kernel = std::move(greedy.worst);
    s.iterations = k;
    s.converged = converged;
    return res;
}

std::vector<double> nominal_stage_cost(const RobustMdpModel& model,
                                       std::span<const ActionIndex> policy) {
    model.check_policy(policy);
    std::vector<double> cost(model.num_states());
    for (std::size_t x = 0; x < cost.size(); ++x) {
        const ActionSpec& a = model.action(x, policy[x]);
        cost[x] = expected_cost(a, a.kernel);
    }
    return cost;
}

std::vector<double> policy_evaluation_nominal(const RobustMdpModel& model,
                                              std::span<const ActionIndex> policy) {
    const auto cost = nominal_stage_cost(model, policy);
    std::vector<FiniteDistribution> rows(model.num_states());
    for (std::size_t x = 0; x < rows.size(); ++x) rows[x] = model.action(x, policy[x]).kernel;
    return solve_discounted_evaluation(rows, cost, model.discount);
}

WorstMatrix build_worst_matrix(const RobustMdpModel& model,
                               std::span<const double> reference_values, double tie_tol) {
    const double radius = require_discounted(model);
    if (reference_values.size() != model.num_states()) {
        throw DimensionError("build_worst_matrix: reference has the wrong length");
    }
    WorstMatrix out(model.num_states());
    for (std::size_t x = 0; x < model.num_states(); ++x) {
        for (const ActionSpec& a : model.actions[x]) {
            const auto l = payoff(a, reference_values, model.discount);
            out[x].push_back(waterfill_maximize(a.kernel, l, radius, tie_tol).maximizer);
        }
    }
    return out;
}

RobustEvaluation robust_policy_evaluation(const RobustMdpModel& model,
                                          std::span<const ActionIndex> policy,
                                          std::span<const double> start_reference, double tie_tol,
                                          int max_solves) {
    const double radius = require_discounted(model);
    model.check_policy(policy);
    if (start_reference.size() != model.num_states()) {
        throw DimensionError("robust_policy_evaluation: reference has the wrong length");
    }

    RobustEvaluation ev;
    std::vector<SupportPartition> parts;
    std::vector<FiniteDistribution> next_rows;
    std::vector<SupportPartition> next_parts;
    for (;;) {
        const std::span<const double> ref =
            ev.solves == 0 ? start_reference : std::span<const double>(ev.values);
        worst_rows(model, policy, ref, radius, tie_tol, next_rows, next_parts);
        if (ev.solves > 0 && next_parts == parts) return ev;
        if (ev.solves >= max_solves) {
            throw ConvergenceError("robust policy evaluation: supports did not settle after " +
                                   std::to_string(max_solves) + " solves");
        }
        parts = std::move(next_parts);
        ev.kernel = std::move(next_rows);
        ev.values = evaluate_rows(model, policy, ev.kernel);
        ++ev.solves;
    }
}

PolicyIterationResult policy_iteration(const RobustMdpModel& model, StationaryPolicy initial,
                                       PiMode mode, const PolicyIterationOptions& opts) {
    const double radius = require_discounted(model);
    model.check_policy(initial);
    const std::size_t n = model.num_states();
    const kernels::BackupParams params{
        .continuation_weight = model.discount, .radius = radius, .tie_tol = opts.tie_tol};

    PolicyIterationResult res;
    PolicyIterationTrace& trace = res.trace;
    WorstMatrix all_rows;  // PiMode::paper: Q*(u) for every action

    auto evaluate = [&](const StationaryPolicy& g, int index) {
        PolicyIterationStep step;
        step.index = index;
        step.policy = g;
        step.nominal_values = policy_evaluation_nominal(model, g);
        if (mode == PiMode::paper) {
            all_rows = build_worst_matrix(model, step.nominal_values, opts.tie_tol);
            step.worst_kernel.resize(n);
            for (std::size_t x = 0; x < n; ++x) step.worst_kernel[x] = all_rows[x][g[x]];
            step.robust_values = evaluate_rows(model, g, step.worst_kernel);
            step.supports = partition_levels(step.nominal_values, opts.tie_tol);
        } else {
            auto ev = robust_policy_evaluation(model, g, step.nominal_values, opts.tie_tol);
            step.worst_kernel = std::move(ev.kernel);
            step.robust_values = std::move(ev.values);
            step.supports = partition_levels(step.robust_values, opts.tie_tol);
        }
        trace.steps.push_back(std::move(step));
    };

    auto q_value = [&](std::size_t x, ActionIndex u, std::span<const double> v) {
        const ActionSpec& a = model.action(x, u);
        if (mode == PiMode::paper) {
            const auto l = payoff(a, v, model.discount);
            return a.cost.fixed + all_rows[x][u].expectation(l);
        }
        return kernels::robust_action_value(a, v, params);
    };

    StationaryPolicy g = std::move(initial);
    std::set<StationaryPolicy> visited{g};
    evaluate(g, 0);

    for (;;) {
        if (trace.improvement_steps >= opts.max_iter) {
            throw ConvergenceError("policy iteration: no convergence after " +
                                   std::to_string(opts.max_iter) + " improvement passes");
        }
        ++trace.improvement_steps;
        const std::vector<double> v = trace.steps.back().robust_values;
        StationaryPolicy next = g;
        bool changed = false;
        for (std::size_t x = 0; x < n; ++x) {
            const double incumbent = q_value(x, g[x], v);
            double best = 0.0;
            ActionIndex best_u = 0;
            for (ActionIndex u = 0; u < model.actions[x].size(); ++u) {
                const double q = q_value(x, u, v);
                if (u == 0 || q < best) {
                    best = q;
                    best_u = u;
                }
            }
            if (best < incumbent - opts.improvement_tol) {
                next[x] = best_u;
                changed = true;
            }
        }
        if (!changed) break;
        if (!visited.insert(next).second) {
            throw ConvergenceError("policy iteration: policy revisited (cycle)");
        }
        ++trace.policy_changes;
        g = std::move(next);
        evaluate(g, trace.improvement_steps);
    }

    const PolicyIterationStep& last = trace.steps.back();
    StationarySolution& s = res.solution;
    s.values = last.robust_values;
    s.policy = g;
    s.worst_kernel = last.worst_kernel;
    s.iterations = trace.improvement_steps;
    s.converged = true;
    const auto tv = apply_T(model, s.values, solve_opts(opts.tie_tol));
    s.residual = sup_distance(tv.values, s.values);

    if (mode == PiMode::paper) {
        std::vector<FiniteDistribution> rows_nominal, rows_robust;
        std::vector<SupportPartition> parts_nominal, parts_robust;
        worst_rows(model, g, last.nominal_values, radius, opts.tie_tol, rows_nominal,
                   parts_nominal);
        worst_rows(model, g, last.robust_values, radius, opts.tie_tol, rows_robust, parts_robust);
        trace.support_mismatch = parts_nominal != parts_robust;
    }
    return res;
}

std::vector<SweepRow> sweep_radius_infinite(const RobustMdpModel& model,
                                            std::span<const double> radii,
                                            const SolveOptions& opts) {
    for (double r : radii) check_radius(r);
    const std::size_t ns = model.num_states();
    std::vector<SweepRow> rows(radii.size() * ns);
    SolveOptions inner = opts;
    inner.execution = kernels::Execution::serial;
    RobustMdpModel stationary = model;
    stationary.horizon.reset();
    const auto count = static_cast<std::ptrdiff_t>(radii.size());
    const bool parallel = opts.execution == kernels::Execution::parallel;
    (void)parallel;
    std::exception_ptr error;
#ifdef TVDP_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(kernels::resolve_jobs(opts.jobs)) if (parallel)
#endif
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            const RobustMdpModel m = with_radius(stationary, radii[k]);
            // Value iteration finds the policy; policy iteration polishes the
            // values to linear-solve accuracy.
            const auto vi = value_iteration(m, 1e-8, 1'000'000, inner);
            PolicyIterationOptions pio;
            pio.tie_tol = opts.tie_tol;
            const auto pi = policy_iteration(m, vi.solution.policy, PiMode::fixed_point, pio);
            for (std::size_t x = 0; x < ns; ++x) {
                rows[k * ns + x] = {radii[k], x, pi.solution.values[x], pi.solution.policy[x]};
            }
        } catch (...) {
#ifdef TVDP_HAVE_OPENMP
#pragma omp critical(tvdp_sweep_error)
#endif
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return rows;
}

}  // namespace tvdp
