#include "test_support.hpp"
#include "tvdp/tv_oracle.hpp"
#include "tvdp/verify.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace tvdp;
using tvdp::testing::max_abs_diff;

namespace {

struct Instance {
    FiniteDistribution mu;
    std::vector<double> l;
    double radius;
};

Instance random_instance(SplitMix64& rng, std::size_t max_alphabet) {
    const std::size_t n = 1 + rng.below(max_alphabet);
    Instance in{tvdp::testing::random_distribution(rng, n, 0.25), std::vector<double>(n), 2.0 * rng.uniform()};
    for (auto& v : in.l) {
        // a few repeated levels so ties get exercised
        v = rng.uniform() < 0.2 ? 5.0 : std::floor(100.0 * rng.uniform()) / 4.0;
    }
    return in;
}

}  // namespace

TEST_CASE("tv_distance") {
    const auto a = FiniteDistribution({0.6, 0.4});
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(tv_distance(FiniteDistribution({1.0, 0.0}), FiniteDistribution({0.0, 1.0})) == 2.0);
    CHECK(tv_distance(a, FiniteDistribution({0.3, 0.7})) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK_THROWS_AS(tv_distance(a, FiniteDistribution::uniform(3)), DimensionError);
}

TEST_CASE("distribution construction") {
    CHECK_THROWS(FiniteDistribution({0.5, 0.6}));
    CHECK_THROWS(FiniteDistribution({-0.1, 1.1}));
    CHECK_THROWS(FiniteDistribution(std::vector<double>{}));
    CHECK(FiniteDistribution::normalized({1.0, 3.0})[1] == 0.75);
}

TEST_CASE("oscillation") {
    CHECK(oscillation(std::vector{7.0, 7.0, 7.0}) == 0.0);
    CHECK(oscillation(std::vector{0.0, 100.0}) == 100.0);
    CHECK(oscillation(std::vector{4.0, 1.0, 2.0}) == 3.0);
    CHECK_THROWS(oscillation(std::vector<double>{}));
}

TEST_CASE("partition_levels") {
    SUBCASE("distinct values") {
        const auto p = partition_levels(std::vector{1.0, 2.0, 3.0});
        CHECK(p.sigma_max == std::vector<std::size_t>{2});
        REQUIRE(p.sigma_levels.size() == 2);
        CHECK(p.sigma_levels[0] == std::vector<std::size_t>{0});
        CHECK(p.sigma_levels[1] == std::vector<std::size_t>{1});
        CHECK(p.levels == std::vector{1.0, 2.0});
        CHECK(p.max_level == 3.0);
    }
    SUBCASE("constant vector is all maximizers") {
        const auto p = partition_levels(std::vector{5.0, 5.0, 5.0});
        CHECK(p.sigma_max.size() == 3);
        CHECK(p.degenerate());
    }
    SUBCASE("three-state nominal evaluation levels") {
        const auto p = partition_levels(std::vector{3.46, 4.10, 2.99});
        CHECK(p.sigma_max == std::vector<std::size_t>{1});
        CHECK(p.sigma_levels[0] == std::vector<std::size_t>{2});
        CHECK(p.sigma_levels[1] == std::vector<std::size_t>{0});
    }
    SUBCASE("relative tie tolerance") {
        const auto p = partition_levels(std::vector{1e6, 1e6 + 1e-4, 2.0});
        CHECK(p.sigma_max.size() == 2);
        const auto strict = partition_levels(std::vector{1e6, 1e6 + 1e-4, 2.0}, 0.0);
        CHECK(strict.sigma_max.size() == 1);
    }
    SUBCASE("sets cover the alphabet and levels increase") {
        SplitMix64 rng(11);
        for (int t = 0; t < 500; ++t) {
            const auto in = random_instance(rng, 8);
            const auto p = partition_levels(in.l);
            std::vector<std::size_t> all = p.sigma_max;
            for (const auto& s : p.sigma_levels) all.insert(all.end(), s.begin(), s.end());
            std::sort(all.begin(), all.end());
            std::vector<std::size_t> expect(in.l.size());
            std::iota(expect.begin(), expect.end(), 0);
            CHECK(all == expect);
            CHECK(std::is_sorted(p.levels.begin(), p.levels.end(), std::less_equal<>()));
            for (double lv : p.levels) CHECK(lv < p.max_level);
        }
    }
}

TEST_CASE("waterfill examples") {
    SUBCASE("zero radius returns the nominal") {
        const auto r = waterfill_maximize(FiniteDistribution({0.5, 0.5}), std::vector{1.0, 2.0}, 0.0);
        CHECK(r.maximizer == FiniteDistribution({0.5, 0.5}));
        CHECK(r.value == doctest::Approx(1.5).epsilon(1e-15));
        CHECK(r.effective_radius == 0.0);
    }
    SUBCASE("machine no-maintenance branch clamps at R_max") {
        const auto r = waterfill_maximize(FiniteDistribution({0.3, 0.7}), std::vector{0.0, 100.0}, 0.85);
        CHECK(r.r_max == doctest::Approx(0.6).epsilon(1e-14));
        CHECK(r.effective_radius == doctest::Approx(0.6).epsilon(1e-14));
        CHECK(r.maximizer[0] == doctest::Approx(0.0));
        CHECK(r.maximizer[1] == doctest::Approx(1.0));
        CHECK(r.value == doctest::Approx(100.0).epsilon(1e-14));
    }
    SUBCASE("three letters, both lower sets emptied") {
        const auto r = waterfill_maximize(FiniteDistribution({0.1, 0.2, 0.7}), std::vector{1.0, 2.0, 3.0}, 1.0);
        CHECK(r.effective_radius == doctest::Approx(0.6));
        CHECK(r.maximizer[0] == doctest::Approx(0.0));
        CHECK(r.maximizer[1] == doctest::Approx(0.0));
        CHECK(r.maximizer[2] == doctest::Approx(1.0));
        CHECK(r.value == doctest::Approx(3.0));
    }
    SUBCASE("partial depletion of the second level") {
        // mass 0.25 leaves: 0.1 from the lowest set, 0.15 from the next
        const auto r = waterfill_maximize(FiniteDistribution({0.1, 0.4, 0.5}), std::vector{1.0, 2.0, 3.0}, 0.5);
        CHECK(r.maximizer[0] == doctest::Approx(0.0));
        CHECK(r.maximizer[1] == doctest::Approx(0.25));
        CHECK(r.maximizer[2] == doctest::Approx(0.75));
    }
    SUBCASE("empty top set receives mass uniformly") {
        const auto r = waterfill_maximize(FiniteDistribution({1.0, 0.0, 0.0}), std::vector{0.0, 4.0, 4.0}, 0.4);
        CHECK(r.maximizer[1] == doctest::Approx(0.1));
        CHECK(r.maximizer[2] == doctest::Approx(0.1));
        CHECK(r.value == doctest::Approx(0.8));
    }
    SUBCASE("constant pay-off leaves the nominal unchanged") {
        const auto mu = FiniteDistribution({0.2, 0.3, 0.5});
        const auto r = waterfill_maximize(mu, std::vector{2.0, 2.0, 2.0}, 1.5);
        CHECK(r.maximizer == mu);
        CHECK(r.r_max == 0.0);
        CHECK(r.value == doctest::Approx(2.0));
    }
    SUBCASE("argument errors") {
        const auto mu = FiniteDistribution({0.5, 0.5});
        CHECK_THROWS(waterfill_maximize(mu, std::vector{1.0, 2.0}, -0.1));
        CHECK_THROWS(waterfill_maximize(mu, std::vector{1.0, 2.0}, 2.1));
        CHECK_THROWS_AS(waterfill_maximize(mu, std::vector{1.0, 2.0, 3.0}, 0.5), DimensionError);
    }
}

TEST_CASE("unclamped_value") {
    const auto mu = FiniteDistribution({0.5, 0.5});
    CHECK(unclamped_value(mu, std::vector{1.0, 2.0}, 0.4) == doctest::Approx(1.7));
    CHECK(waterfill_maximize(mu, std::vector{1.0, 2.0}, 0.4).value == doctest::Approx(1.7));
    CHECK(unclamped_value(FiniteDistribution({0.1, 0.9}), std::vector{3.0, 3.0}, 1.2) == doctest::Approx(3.0));
    const auto m = FiniteDistribution({0.3, 0.7});
    CHECK(unclamped_value(m, std::vector{0.0, 100.0}, 0.85) == doctest::Approx(112.5));
    CHECK(waterfill_maximize(m, std::vector{0.0, 100.0}, 0.85).value < 112.5 - 1.0);
}

TEST_CASE("waterfill invariants on fuzzed instances") {
    SplitMix64 rng(2024);
    for (int t = 0; t < 10000; ++t) {
        const auto in = random_instance(rng, 8);
        const auto r = waterfill_maximize(in.mu, in.l, in.radius);
        double sum = 0.0;
        for (double p : r.maximizer.probs()) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        CHECK(std::abs(tv_distance(r.maximizer, in.mu) - std::min(in.radius, r.r_max)) <= 1e-12);
        CHECK(r.value >= in.mu.expectation(in.l) - 1e-12);
        CHECK(std::abs(r.value - r.maximizer.expectation(in.l)) <= 1e-9);

        // no clamping while the removed mass fits inside the minimum set
        const auto part = partition_levels(in.l);
        double bottom = 0.0;
        if (!part.degenerate()) {
            for (auto i : part.sigma_levels.front()) bottom += in.mu[i];
        }
        if (!part.degenerate() && in.radius <= r.r_max && in.radius / 2.0 <= bottom) {
            CHECK(std::abs(unclamped_value(in.mu, in.l, in.radius) - r.value) <= 1e-12 * std::max(1.0, r.value));
        }
    }
}

TEST_CASE("waterfill optimality against random feasible points") {
    const auto rep = verify::certify_waterfill_fuzz(2000, 8, 1000, 77);
    CHECK(rep.failures == 0);
    CHECK(rep.max_violation <= 1e-9);
}

TEST_CASE("value is non-decreasing and concave in the radius") {
    SplitMix64 rng(5);
    for (int t = 0; t < 300; ++t) {
        const auto in = random_instance(rng, 8);
        std::vector<double> v;
        for (int k = 0; k <= 40; ++k) v.push_back(waterfill_maximize(in.mu, in.l, 0.05 * k).value);
        for (std::size_t k = 1; k < v.size(); ++k) CHECK(v[k] - v[k - 1] >= -1e-12);
        for (std::size_t k = 2; k < v.size(); ++k) CHECK(v[k] - 2 * v[k - 1] + v[k - 2] <= 1e-9);
    }
}

TEST_CASE("shift, scale and permutation equivariance") {
    SplitMix64 rng(99);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + rng.below(8);
        const auto mu = tvdp::testing::random_distribution(rng, n, 0.25);
        std::vector<double> l(n);
        for (auto& v : l) v = 10.0 * rng.uniform();
        const double radius = 2.0 * rng.uniform();
        const auto base = waterfill_maximize(mu, l, radius);

        std::vector<double> shifted = l;
        for (auto& v : shifted) v += 3.25;
        const auto s = waterfill_maximize(mu, shifted, radius);
        CHECK(s.maximizer == base.maximizer);
        CHECK(s.value == doctest::Approx(base.value + 3.25).epsilon(1e-12));

        std::vector<double> scaled = l;
        for (auto& v : scaled) v *= 2.5;
        const auto sc = waterfill_maximize(mu, scaled, radius);
        CHECK(max_abs_diff(sc.maximizer.vector(), base.maximizer.vector()) <= 1e-15);
        CHECK(sc.value == doctest::Approx(2.5 * base.value).epsilon(1e-12));

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        std::vector<double> pmu(n), pl(n);
        for (std::size_t i = 0; i < n; ++i) {
            pmu[i] = mu[perm[i]];
            pl[i] = l[perm[i]];
        }
        const auto p = waterfill_maximize(FiniteDistribution(pmu), pl, radius);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(p.maximizer[i] - base.maximizer[perm[i]]) <= 1e-15);
        }
    }
}
