#pragma once

// Per-state robust Bellman backups. Every state's backup is independent of
// the others, so the state loop is the parallel axis. The serial variants are
// kept as the reference the parallel ones are tested and benchmarked against.

#include "tvdp/model.hpp"
#include "tvdp/tv_oracle.hpp"

#include <span>
#include <vector>

namespace tvdp::kernels {

enum class Execution { serial, parallel };

struct BackupParams {
    /// Weight on the continuation value inside the adversary's pay-off:
    /// l(z) = c(x,u,z) + continuation_weight * next(z).
    double continuation_weight = 1.0;
    double radius = 0.0;
    double tie_tol = kDefaultTieTolerance;
};

struct BackupOutput {
    std::vector<double> values;
    StationaryPolicy policy;
    /// Maximizing next-state distribution for the chosen action of each state.
    std::vector<FiniteDistribution> worst;
};

/// Worst-case value of one action: fixed cost plus the water-filled maximum
/// of the next-state pay-off. Writes the maximizer to `worst` when non-null.
double robust_action_value(const ActionSpec& action, std::span<const double> next,
                           const BackupParams& params, FiniteDistribution* worst = nullptr);

/// min over actions of robust_action_value; ties go to the lowest index.
BackupOutput robust_backup_serial(const RobustMdpModel& model, std::span<const double> next,
                                  const BackupParams& params);
BackupOutput robust_backup_parallel(const RobustMdpModel& model, std::span<const double> next,
                                    const BackupParams& params, int jobs = 0);

/// Backup with the action fixed by `policy` (inner maximization only).
BackupOutput policy_backup_serial(const RobustMdpModel& model, std::span<const ActionIndex> policy,
                                  std::span<const double> next, const BackupParams& params);
BackupOutput policy_backup_parallel(const RobustMdpModel& model,
                                    std::span<const ActionIndex> policy,
                                    std::span<const double> next, const BackupParams& params,
                                    int jobs = 0);

inline BackupOutput robust_backup(const RobustMdpModel& model, std::span<const double> next,
                                  const BackupParams& params, Execution exec, int jobs = 0) {
    return exec == Execution::serial ? robust_backup_serial(model, next, params)
                                     : robust_backup_parallel(model, next, params, jobs);
}

inline BackupOutput policy_backup(const RobustMdpModel& model, std::span<const ActionIndex> policy,
                                  std::span<const double> next, const BackupParams& params,
                                  Execution exec, int jobs = 0) {
    return exec == Execution::serial ? policy_backup_serial(model, policy, next, params)
                                     : policy_backup_parallel(model, policy, next, params, jobs);
}

/// Number of OpenMP threads a `jobs` request resolves to (0 = runtime default).
int resolve_jobs(int jobs);

}  // namespace tvdp::kernels
