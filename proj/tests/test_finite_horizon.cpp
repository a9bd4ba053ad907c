#include "test_support.hpp"
#include "tvdp/finite_horizon.hpp"
#include "tvdp/model_io.hpp"

#include <doctest.h>

using namespace tvdp;
using tvdp::testing::max_abs_diff;

namespace {

RobustMdpModel machine(double radius) {
    return with_radius(load_model(tvdp::testing::data_path("machine.json")), radius);
}

std::vector<std::string> labels(const RobustMdpModel& m, const StationaryPolicy& g) {
    std::vector<std::string> out;
    for (std::size_t x = 0; x < g.size(); ++x) out.push_back(m.action(x, g[x]).label);
    return out;
}

using L = std::vector<std::string>;

}  // namespace

TEST_CASE("last-stage backup of the machine model") {
    const std::vector<double> zero{0.0, 0.0};
    const auto m0 = machine(0.0);
    const auto p0 = stage_backup(m0, zero, 0.0);
    CHECK(p0.values[0] == doctest::Approx(60.0));
    CHECK(p0.values[1] == doctest::Approx(80.0));
    CHECK(labels(m0, p0.policy) == L{"m", "r"});

    const auto p1 = stage_backup(m0, zero, 0.85);
    CHECK(p1.values[0] == doctest::Approx(100.0));
    CHECK(p1.values[1] == doctest::Approx(122.5));
    CHECK(labels(m0, p1.policy) == L{"nm", "r"});
}

TEST_CASE("machine model, zero radius") {
    const auto m = machine(0.0);
    const auto plans = solve_finite(m);
    REQUIRE(plans.size() == 4);
    const double expect[3][2] = {{196, 216}, {128, 148}, {60, 80}};
    for (int j = 0; j < 3; ++j) {
        CHECK(plans[j].stage == j);
        CHECK(plans[j].values[0] == doctest::Approx(expect[j][0]).epsilon(1e-14));
        CHECK(plans[j].values[1] == doctest::Approx(expect[j][1]).epsilon(1e-14));
        CHECK(labels(m, plans[j].policy) == L{"m", "r"});
    }
    CHECK(plans[3].values == std::vector{0.0, 0.0});
}

TEST_CASE("machine model, radius 0.85") {
    const auto m = machine(0.85);
    const auto plans = solve_finite(m);
    const double table[3][2] = {{340, 360}, {221, 241}, {100, 122}};
    const double exact[3][2] = {{340.0625, 360.0625}, {221.0625, 241.0625}, {100, 122.5}};
    const L pol[3] = {{"m", "r"}, {"m", "r"}, {"nm", "r"}};
    for (int j = 0; j < 3; ++j) {
        for (int x = 0; x < 2; ++x) {
            CHECK(std::abs(plans[j].values[x] - table[j][x]) <= 0.6);
            CHECK(plans[j].values[x] == doctest::Approx(exact[j][x]).epsilon(1e-13));
        }
        CHECK(labels(m, plans[j].policy) == pol[j]);
    }
    for (int j = 0; j < 3; ++j) {
        for (std::size_t x = 0; x < 2; ++x) {
            const auto& nominal = m.action(x, plans[j].policy[x]).kernel;
            CHECK(tv_distance(plans[j].worst_kernel[x], nominal) <= 0.85 + 1e-12);
        }
    }
}

TEST_CASE("zero cost gives zero values and lowest-index actions") {
    SplitMix64 rng(3);
    tvdp::testing::RandomModelSpec spec;
    spec.horizon = 1;
    spec.max_cost = 0.0;
    spec.radius = 1.0;
    const auto m = tvdp::testing::random_model(rng, spec);
    const auto plans = solve_finite(m);
    for (double v : plans[0].values) CHECK(v == 0.0);
    for (auto u : plans[0].policy) CHECK(u == 0);
}

TEST_CASE("zero radius equals classical backward induction") {
    SplitMix64 rng(17);
    for (int t = 0; t < 100; ++t) {
        tvdp::testing::RandomModelSpec spec;
        spec.horizon = 1 + static_cast<int>(rng.below(5));
        spec.discount = t % 3 == 0 ? 1.0 : 0.3 + 0.7 * rng.uniform();
        const auto m = tvdp::testing::random_model(rng, spec);
        const auto plans = solve_finite(m);
        const auto ref = tvdp::testing::classical_finite(m);
        for (int j = 0; j <= *spec.horizon; ++j) {
            CHECK(max_abs_diff(plans[j].values, ref[j]) <= 1e-12);
        }
    }
}

TEST_CASE("policy evaluation is consistent with the optimum") {
    SplitMix64 rng(23);
    for (int t = 0; t < 100; ++t) {
        tvdp::testing::RandomModelSpec spec;
        spec.horizon = 1 + static_cast<int>(rng.below(4));
        spec.radius = 2.0 * rng.uniform();
        const auto m = tvdp::testing::random_model(rng, spec);
        const auto plans = solve_finite(m);
        MarkovPolicy opt;
        for (int j = 0; j < *spec.horizon; ++j) opt.push_back(plans[j].policy);
        const auto ev = evaluate_policy_finite(m, opt);
        CHECK(max_abs_diff(ev[0], plans[0].values) <= 1e-12);

        MarkovPolicy last;
        for (int j = 0; j < *spec.horizon; ++j) {
            StationaryPolicy g(m.num_states());
            for (std::size_t x = 0; x < g.size(); ++x) g[x] = m.actions[x].size() - 1;
            last.push_back(g);
        }
        const auto bad = evaluate_policy_finite(m, last);
        for (std::size_t x = 0; x < m.num_states(); ++x) CHECK(bad[0][x] >= plans[0].values[x] - 1e-12);
    }
}

TEST_CASE("always replacing is worse in the machine model") {
    const auto m = machine(0.85);
    const MarkovPolicy g(3, StationaryPolicy{0, 1});
    const auto bad = evaluate_policy_finite(m, g);
    const auto opt = solve_finite(m);
    CHECK(bad[0][0] >= opt[0].values[0]);
    CHECK(bad[0][1] >= opt[0].values[1]);
    MarkovPolicy best;
    for (int j = 0; j < 3; ++j) best.push_back(opt[j].policy);
    const auto ev = evaluate_policy_finite(m, best);
    CHECK(ev[0][0] == doctest::Approx(340.0625));
    CHECK(ev[0][1] == doctest::Approx(360.0625));
    CHECK_THROWS(evaluate_policy_finite(m, MarkovPolicy(3, StationaryPolicy{0, 2})));
}

TEST_CASE("worst kernels are valid and saturate the ball") {
    SplitMix64 rng(29);
    for (int t = 0; t < 100; ++t) {
        tvdp::testing::RandomModelSpec spec;
        spec.horizon = 1 + static_cast<int>(rng.below(4));
        spec.radius = 2.0 * rng.uniform();
        const auto m = tvdp::testing::random_model(rng, spec);
        const auto plans = solve_finite(m);
        for (int j = 0; j < *spec.horizon; ++j) {
            for (std::size_t x = 0; x < m.num_states(); ++x) {
                const auto& a = m.action(x, plans[j].policy[x]);
                std::vector<double> l(m.num_states());
                for (std::size_t z = 0; z < l.size(); ++z) {
                    l[z] = (a.cost.depends_on_next_state() ? a.cost.per_next_state[z] : 0.0) +
                           m.discount * plans[j + 1].values[z];
                }
                const double rmax = waterfill_maximize(a.kernel, l, 0.0).r_max;
                const double d = tv_distance(plans[j].worst_kernel[x], a.kernel);
                CHECK(d <= spec.radius + 1e-12);
                CHECK(std::abs(d - std::min(spec.radius, rmax)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("radius follows the perturbed kernel") {
    auto m = machine(0.0);
    m.radius = {0.0, 0.0, 0.0, 0.85};
    m.scalar_radius = false;
    const auto plans = solve_finite(m);
    // only the kernel into the last stage is perturbed, so only stage 2 differs
    CHECK(plans[2].values[0] == doctest::Approx(100.0));
    CHECK(plans[2].values[1] == doctest::Approx(122.5));
    CHECK(plans[2].radius == 0.85);
    CHECK(plans[0].radius == 0.0);
}

TEST_CASE("discounted reporting") {
    SplitMix64 rng(31);
    tvdp::testing::RandomModelSpec spec;
    spec.horizon = 3;
    spec.discount = 0.5;
    const auto m = tvdp::testing::random_model(rng, spec);
    const auto plans = solve_finite(m);
    const auto d = discounted_values(plans[2], 0.5);
    for (std::size_t x = 0; x < d.size(); ++x) CHECK(d[x] == doctest::Approx(0.25 * plans[2].values[x]));
}

TEST_CASE("initial distribution worst case") {
    auto m = machine(0.85);
    m.initial = FiniteDistribution({1.0, 0.0});
    const auto plans = solve_finite(m);
    const auto w = initial_worst_case(m, plans[0]);
    // 0.425 of the mass moves onto the broken state
    CHECK(w.value == doctest::Approx(0.575 * 340.0625 + 0.425 * 360.0625));
    auto no_initial = machine(0.85);
    CHECK_THROWS(initial_worst_case(no_initial, plans[0]));
}

TEST_CASE("finite sweeps") {
    const auto m = machine(0.85);
    const std::vector<double> two{0.0, 0.85};
    const auto rows = sweep_radius_finite(m, two);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].value == doctest::Approx(196.0));
    CHECK(rows[1].value == doctest::Approx(216.0));
    CHECK(rows[2].value == doctest::Approx(340.0625));
    CHECK(rows[3].value == doctest::Approx(360.0625));

    const std::vector<double> one{0.0};
    CHECK(sweep_radius_finite(m, one).size() == 2);

    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(0.05 * k);
    const auto curve = sweep_radius_finite(m, grid);
    for (std::size_t x = 0; x < 2; ++x) {
        std::vector<double> v;
        for (const auto& r : curve) if (r.state == x) v.push_back(r.value);
        for (std::size_t k = 1; k < v.size(); ++k) CHECK(v[k] >= v[k - 1] - 1e-12);
    }
}

TEST_CASE("machine model curve is not concave between 0.9 and 1.2") {
    // Reference values from a separate linear-programming solve of each
    // inner maximization. The stage-0 running-state increments grow again
    // after R = 0.95, so the curve has a convex stretch.
    const double radii[] = {0.85, 0.9, 0.95, 1.0, 1.05, 1.1, 1.15, 1.2};
    const double running[] = {340.0625, 346.25, 351.5625, 357.0, 362.5625, 368.25, 374.0625, 380.0};
    const double broken[] = {360.0625, 368.0625, 376.0546875, 384.3, 392.8078125,
                             401.5875, 410.6484375, 420.0};
    std::vector<double> v;
    for (int i = 0; i < 8; ++i) {
        const auto m = machine(radii[i]);
        const auto dp = solve_finite(m).front().values;
        CHECK(dp[0] == doctest::Approx(running[i]).epsilon(1e-13));
        CHECK(dp[1] == doctest::Approx(broken[i]).epsilon(1e-13));
        v.push_back(dp[0]);
    }
    CHECK(v[3] - 2 * v[2] + v[1] == doctest::Approx(0.125));
}

TEST_CASE("monotone in the radius on random models, concave for one stage") {
    SplitMix64 rng(37);
    for (int t = 0; t < 100; ++t) {
        tvdp::testing::RandomModelSpec spec;
        spec.horizon = t < 50 ? 1 : 2 + static_cast<int>(rng.below(3));
        const auto m = tvdp::testing::random_model(rng, spec);
        std::vector<double> grid;
        for (int k = 0; k <= 40; ++k) grid.push_back(0.05 * k);
        const auto rows = sweep_radius_finite(m, grid);
        for (std::size_t x = 0; x < m.num_states(); ++x) {
            std::vector<double> v;
            for (const auto& r : rows) if (r.state == x) v.push_back(r.value);
            for (std::size_t k = 1; k < v.size(); ++k) CHECK(v[k] >= v[k - 1] - 1e-12);
            if (*spec.horizon == 1) {
                for (std::size_t k = 2; k < v.size(); ++k) CHECK(v[k] - 2 * v[k - 1] + v[k - 2] <= 1e-9);
            }
        }
    }
}
