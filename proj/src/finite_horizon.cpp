#include "tvdp/finite_horizon.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

namespace tvdp {

namespace {

int require_horizon(const RobustMdpModel& model) {
    if (!model.horizon || *model.horizon < 1) {
        throw std::invalid_argument("finite-horizon solve needs a horizon >= 1");
    }
    return *model.horizon;
}

std::vector<double> terminal_values(const RobustMdpModel& model) {
    std::vector<double> h(model.num_states());
    for (std::size_t x = 0; x < h.size(); ++x) h[x] = model.terminal(x);
    return h;
}

kernels::BackupParams params_for(const RobustMdpModel& model, double radius,
                                 const SolveOptions& opts) {
    return {.continuation_weight = model.discount, .radius = radius, .tie_tol = opts.tie_tol};
}

StagePlan to_plan(kernels::BackupOutput&& out, int stage, double radius) {
    StagePlan plan;
    plan.stage = stage;
    plan.values = std::move(out.values);
    plan.policy = std::move(out.policy);
    plan.worst_kernel = std::move(out.worst);
    plan.radius = radius;
    return plan;
}

}  // namespace

StagePlan stage_backup(const RobustMdpModel& model, std::span<const double> next_values,
                       double stage_radius, const SolveOptions& opts) {
    for (double v : next_values) {
        if (!std::isfinite(v)) throw std::invalid_argument("stage_backup: non-finite value");
    }
    auto out = kernels::robust_backup(model, next_values, params_for(model, stage_radius, opts),
                                      opts.execution, opts.jobs);
    return to_plan(std::move(out), 0, stage_radius);
}

std::vector<StagePlan> solve_finite(const RobustMdpModel& model, const SolveOptions& opts) {
    const int n = require_horizon(model);
    std::vector<StagePlan> plans(static_cast<std::size_t>(n) + 1);
    plans[n].stage = n;
    plans[n].values = terminal_values(model);
    for (int j = n - 1; j >= 0; --j) {
        const double r = model.transition_radius(static_cast<std::size_t>(j));
        plans[j] = stage_backup(model, plans[j + 1].values, r, opts);
        plans[j].stage = j;
    }
    return plans;
}

std::vector<std::vector<double>> evaluate_policy_finite(const RobustMdpModel& model,
                                                        const MarkovPolicy& policy,
                                                        const SolveOptions& opts) {
    const int n = require_horizon(model);
    if (policy.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("policy must give one decision rule per stage");
    }
    std::vector<std::vector<double>> values(static_cast<std::size_t>(n) + 1);
    values[n] = terminal_values(model);
    for (int j = n - 1; j >= 0; --j) {
        const double r = model.transition_radius(static_cast<std::size_t>(j));
        values[j] = kernels::policy_backup(model, policy[j], values[j + 1],
                                           params_for(model, r, opts), opts.execution, opts.jobs)
                        .values;
    }
    return values;
}

std::vector<double> discounted_values(const StagePlan& plan, double discount) {
    const double w = std::pow(discount, plan.stage);
    std::vector<double> out(plan.values);
    for (double& v : out) v *= w;
    return out;
}

InitialWorstCase initial_worst_case(const RobustMdpModel& model, const StagePlan& stage0,
                                    double tie_tol) {
    if (!model.initial) throw std::invalid_argument("model has no initial distribution");
    const double r0 = model.radius.front();
    auto wf = waterfill_maximize(*model.initial, stage0.values, r0, tie_tol);
    return {wf.value, std::move(wf.maximizer)};
}

RobustMdpModel with_radius(const RobustMdpModel& model, double radius) {
    check_radius(radius);
    RobustMdpModel m = model;
    m.scalar_radius = true;
    const std::size_t len = m.horizon ? static_cast<std::size_t>(*m.horizon) + 1 : 1;
    m.radius.assign(len, radius);
    return m;
}

std::vector<SweepRow> sweep_radius_finite(const RobustMdpModel& model, std::span<const double> radii,
                                          const SolveOptions& opts) {
    require_horizon(model);
    for (double r : radii) check_radius(r);
    for (std::size_t x = 0; x < model.num_states(); ++x) {
        if (model.actions[x].empty()) {
            throw std::invalid_argument("state " + model.states[x] + " has no feasible action");
        }
    }
    const std::size_t ns = model.num_states();
    std::vector<SweepRow> rows(radii.size() * ns);
    SolveOptions inner = opts;
    inner.execution = kernels::Execution::serial;
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
            const auto plans = solve_finite(with_radius(model, radii[k]), inner);
            for (std::size_t x = 0; x < ns; ++x) {
                rows[k * ns + x] = {radii[k], x, plans[0].values[x], plans[0].policy[x]};
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
