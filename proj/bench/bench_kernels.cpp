// Serial vs OpenMP robust backups and value iteration on a random model.

#include "tvdp/infinite_horizon.hpp"
#include "tvdp/kernels.hpp"
#include "tvdp/rng.hpp"

#include <benchmark/benchmark.h>

namespace {

tvdp::RobustMdpModel random_model(std::size_t states, std::size_t actions, std::uint64_t seed) {
    tvdp::SplitMix64 rng(seed);
    tvdp::RobustMdpModel m;
    m.discount = 0.95;
    m.radius = {0.4};
    m.actions.resize(states);
    for (std::size_t x = 0; x < states; ++x) {
        m.states.push_back("s" + std::to_string(x));
        for (std::size_t u = 0; u < actions; ++u) {
            std::vector<double> w(states);
            for (auto& v : w) v = rng.uniform() < 0.3 ? rng.uniform() : 0.0;
            w[rng.below(states)] += 1.0;
            tvdp::ActionSpec a{"a" + std::to_string(u), tvdp::FiniteDistribution::normalized(w),
                               {10.0 * rng.uniform(), {}}};
            m.actions[x].push_back(std::move(a));
        }
    }
    return m;
}

const tvdp::RobustMdpModel& model() {
    static const auto m = random_model(400, 6, 7);
    return m;
}

void BM_Backup(benchmark::State& state, tvdp::kernels::Execution exec) {
    const auto& m = model();
    std::vector<double> next(m.num_states());
    for (std::size_t x = 0; x < next.size(); ++x) next[x] = static_cast<double>(x % 17);
    tvdp::kernels::BackupParams p{m.discount, 0.4, tvdp::kDefaultTieTolerance};
    for (auto _ : state) {
        auto out = tvdp::kernels::robust_backup(m, next, p, exec);
        benchmark::DoNotOptimize(out.values.data());
    }
}

void BM_ValueIteration(benchmark::State& state, tvdp::kernels::Execution exec) {
    const auto& m = model();
    tvdp::SolveOptions o;
    o.execution = exec;
    for (auto _ : state) {
        auto r = tvdp::value_iteration(m, 1e-6, 100000, o);
        benchmark::DoNotOptimize(r.solution.values.data());
    }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Backup, serial, tvdp::kernels::Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Backup, parallel, tvdp::kernels::Execution::parallel)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ValueIteration, serial, tvdp::kernels::Execution::serial)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ValueIteration, parallel, tvdp::kernels::Execution::parallel)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
