#include "tvdp/kernels.hpp"

#include <stdexcept>

#ifdef TVDP_HAVE_OPENMP
#include <omp.h>
#endif

namespace tvdp::kernels {

namespace {

void check_inputs(const RobustMdpModel& model, std::span<const double> next,
                  const BackupParams& params) {
    if (next.size() != model.num_states()) {
        throw DimensionError("backup: value vector does not match the state count");
    }
    check_radius(params.radius);
    for (std::size_t x = 0; x < model.num_states(); ++x) {
        if (model.actions[x].empty()) {
            throw std::invalid_argument("state " + model.states[x] + " has no feasible action");
        }
    }
}

// l(z) = c(x,u,z) + w next(z); the fixed part of the cost is added afterwards.
void fill_payoff(const ActionSpec& action, std::span<const double> next, double weight,
                 std::vector<double>& payoff) {
    payoff.resize(next.size());
    if (action.cost.depends_on_next_state()) {
        for (std::size_t z = 0; z < next.size(); ++z) {
            payoff[z] = action.cost.per_next_state[z] + weight * next[z];
        }
    } else {
        for (std::size_t z = 0; z < next.size(); ++z) payoff[z] = weight * next[z];
    }
}

// State loop body shared by the serial and parallel drivers. `shared` is the
// partition of w * next, reused for actions without a next-state cost.
void backup_state(const RobustMdpModel& model, std::size_t x, std::span<const double> next,
                  const BackupParams& params, const SupportPartition& shared,
                  const ActionIndex* fixed_action, std::vector<double>& payoff,
                  BackupOutput& out) {
    const auto& acts = model.actions[x];
    const ActionIndex first = fixed_action ? *fixed_action : 0;
    const ActionIndex last = fixed_action ? *fixed_action + 1 : acts.size();

    double best = 0.0;
    ActionIndex best_u = first;
    WaterfillResult best_wf;
    for (ActionIndex u = first; u < last; ++u) {
        const ActionSpec& a = acts[u];
        fill_payoff(a, next, params.continuation_weight, payoff);
        WaterfillResult wf = a.cost.depends_on_next_state()
                                 ? waterfill_maximize(a.kernel, payoff, params.radius,
                                                      params.tie_tol)
                                 : waterfill_maximize(a.kernel, payoff, shared, params.radius);
        const double q = a.cost.fixed + wf.value;
        if (u == first || q < best) {
            best = q;
            best_u = u;
            best_wf = std::move(wf);
        }
    }
    out.values[x] = best;
    out.policy[x] = best_u;
    out.worst[x] = std::move(best_wf.maximizer);
}

BackupOutput make_output(std::size_t n) {
    BackupOutput out;
    out.values.assign(n, 0.0);
    out.policy.assign(n, 0);
    out.worst.resize(n);
    return out;
}

SupportPartition shared_partition(std::span<const double> next, const BackupParams& params) {
    std::vector<double> scaled(next.size());
    for (std::size_t z = 0; z < next.size(); ++z) scaled[z] = params.continuation_weight * next[z];
    return partition_levels(scaled, params.tie_tol);
}

BackupOutput run_serial(const RobustMdpModel& model, const ActionIndex* policy,
                        std::span<const double> next, const BackupParams& params) {
    check_inputs(model, next, params);
    const std::size_t n = model.num_states();
    const SupportPartition shared = shared_partition(next, params);
    BackupOutput out = make_output(n);
    std::vector<double> payoff;
    for (std::size_t x = 0; x < n; ++x) {
        backup_state(model, x, next, params, shared, policy ? policy + x : nullptr, payoff, out);
    }
    return out;
}

BackupOutput run_parallel(const RobustMdpModel& model, const ActionIndex* policy,
                          std::span<const double> next, const BackupParams& params, int jobs) {
    check_inputs(model, next, params);
    const std::size_t n = model.num_states();
    const SupportPartition shared = shared_partition(next, params);
    BackupOutput out = make_output(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#ifdef TVDP_HAVE_OPENMP
#pragma omp parallel num_threads(resolve_jobs(jobs))
#endif
    {
        std::vector<double> payoff;
#ifdef TVDP_HAVE_OPENMP
#pragma omp for schedule(static)
#endif
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            const auto x = static_cast<std::size_t>(i);
            backup_state(model, x, next, params, shared, policy ? policy + x : nullptr, payoff,
                         out);
        }
    }
    (void)jobs;
    return out;
}

}  // namespace

int resolve_jobs(int jobs) {
#ifdef TVDP_HAVE_OPENMP
    return jobs > 0 ? jobs : omp_get_max_threads();
#else
    (void)jobs;
    return 1;
#endif
}

double robust_action_value(const ActionSpec& action, std::span<const double> next,
                           const BackupParams& params, FiniteDistribution* worst) {
    std::vector<double> payoff;
    fill_payoff(action, next, params.continuation_weight, payoff);
    WaterfillResult wf = waterfill_maximize(action.kernel, payoff, params.radius, params.tie_tol);
    if (worst) *worst = std::move(wf.maximizer);
    return action.cost.fixed + wf.value;
}

BackupOutput robust_backup_serial(const RobustMdpModel& model, std::span<const double> next,
                                  const BackupParams& params) {
    return run_serial(model, nullptr, next, params);
}

BackupOutput robust_backup_parallel(const RobustMdpModel& model, std::span<const double> next,
                                    const BackupParams& params, int jobs) {
    return run_parallel(model, nullptr, next, params, jobs);
}

BackupOutput policy_backup_serial(const RobustMdpModel& model, std::span<const ActionIndex> policy,
                                  std::span<const double> next, const BackupParams& params) {
    model.check_policy(policy);
    return run_serial(model, policy.data(), next, params);
}

BackupOutput policy_backup_parallel(const RobustMdpModel& model,
                                    std::span<const ActionIndex> policy,
                                    std::span<const double> next, const BackupParams& params,
                                    int jobs) {
    model.check_policy(policy);
    return run_parallel(model, policy.data(), next, params, jobs);
}

}  // namespace tvdp::kernels
