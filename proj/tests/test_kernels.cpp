#include "test_support.hpp"
#include "tvdp/finite_horizon.hpp"
#include "tvdp/infinite_horizon.hpp"
#include "tvdp/kernels.hpp"

#include <doctest.h>

using namespace tvdp;

TEST_CASE("parallel backups match the serial reference exactly") {
    SplitMix64 rng(73);
    for (int t = 0; t < 50; ++t) {
        tvdp::testing::RandomModelSpec spec;
        spec.min_states = 20;
        spec.max_states = 120;
        spec.max_actions = 4;
        spec.radius = 2.0 * rng.uniform();
        const auto m = tvdp::testing::random_model(rng, spec);
        std::vector<double> next(m.num_states());
        for (auto& v : next) v = 50.0 * rng.uniform();
        const kernels::BackupParams p{0.9, spec.radius, kDefaultTieTolerance};
        const auto s = kernels::robust_backup_serial(m, next, p);
        for (int jobs : {1, 2, 4, 0}) {
            const auto par = kernels::robust_backup_parallel(m, next, p, jobs);
            CHECK(par.values == s.values);
            CHECK(par.policy == s.policy);
            CHECK(par.worst == s.worst);
        }
        StationaryPolicy g(m.num_states());
        for (std::size_t x = 0; x < g.size(); ++x) g[x] = rng.below(m.actions[x].size());
        const auto ps = kernels::policy_backup_serial(m, g, next, p);
        const auto pp = kernels::policy_backup_parallel(m, g, next, p, 3);
        CHECK(pp.values == ps.values);
        CHECK(pp.worst == ps.worst);
    }
}

TEST_CASE("solvers give identical results in both execution modes") {
    SplitMix64 rng(79);
    tvdp::testing::RandomModelSpec spec;
    spec.min_states = 30;
    spec.max_states = 60;
    spec.radius = 0.7;
    spec.horizon = 6;
    const auto fm = tvdp::testing::random_model(rng, spec);
    SolveOptions serial;
    serial.execution = kernels::Execution::serial;
    const auto a = solve_finite(fm, serial);
    const auto b = solve_finite(fm);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j].values == b[j].values);

    spec.horizon.reset();
    const auto im = tvdp::testing::random_model(rng, spec);
    const auto vs = value_iteration(im, 1e-9, 1'000'000, serial);
    const auto vp = value_iteration(im, 1e-9);
    CHECK(vs.solution.values == vp.solution.values);
    CHECK(vs.solution.iterations == vp.solution.iterations);

    std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 2.0};
    CHECK(sweep_radius_finite(fm, grid, serial).size() == sweep_radius_finite(fm, grid).size());
    const auto rs = sweep_radius_infinite(im, grid, serial);
    const auto rp = sweep_radius_infinite(im, grid);
    for (std::size_t i = 0; i < rs.size(); ++i) CHECK(rs[i].value == rp[i].value);
}

TEST_CASE("errors inside parallel regions propagate") {
    SplitMix64 rng(83);
    tvdp::testing::RandomModelSpec spec;
    spec.horizon = 2;
    const auto m = tvdp::testing::random_model(rng, spec);
    const std::vector<double> grid{0.1, 2.5, 0.3};
    CHECK_THROWS(sweep_radius_finite(m, grid));
}

TEST_CASE("resolve_jobs") {
    CHECK(kernels::resolve_jobs(3) == 3);
    CHECK(kernels::resolve_jobs(0) >= 1);
}
