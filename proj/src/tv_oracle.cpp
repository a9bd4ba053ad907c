#include "tvdp/tv_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tvdp {

namespace {

bool within_tie(double level, double value, double tie_tol) {
    return std::abs(value - level) <= tie_tol * std::max(1.0, std::abs(level));
}

double mass_on(std::span<const double> p, const std::vector<std::size_t>& set) {
    double m = 0.0;
    for (std::size_t i : set) m += p[i];
    return m;
}

}  // namespace

void check_radius(double radius) {
    if (!(radius >= 0.0 && radius <= 2.0)) {
        throw std::invalid_argument("radius " + std::to_string(radius) + " outside [0, 2]");
    }
}

double oscillation(std::span<const double> l) {
    if (l.empty()) throw std::invalid_argument("oscillation of an empty vector");
    auto [lo, hi] = std::minmax_element(l.begin(), l.end());
    return *hi - *lo;
}

SupportPartition partition_levels(std::span<const double> l, double tie_tol) {
    if (l.empty()) throw std::invalid_argument("partition of an empty vector");
    if (tie_tol < 0.0) throw std::invalid_argument("negative tie tolerance");
    for (double v : l) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite pay-off value");
    }

    std::vector<std::size_t> order(l.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return l[a] < l[b]; });

    SupportPartition part;
    part.max_level = l[order.back()];

    // Top set first, so that everything tied with the maximum lands in it.
    std::size_t rest = order.size();
    while (rest > 0 && within_tie(part.max_level, l[order[rest - 1]], tie_tol)) --rest;
    part.sigma_max.assign(order.begin() + static_cast<std::ptrdiff_t>(rest), order.end());
    std::sort(part.sigma_max.begin(), part.sigma_max.end());

    std::size_t i = 0;
    while (i < rest) {
        const double level = l[order[i]];
        std::vector<std::size_t> set;
        while (i < rest && within_tie(level, l[order[i]], tie_tol)) set.push_back(order[i++]);
        std::sort(set.begin(), set.end());
        part.sigma_levels.push_back(std::move(set));
        part.levels.push_back(level);
    }
    return part;
}

WaterfillResult waterfill_maximize(const FiniteDistribution& mu, std::span<const double> l,
                                   const SupportPartition& partition, double radius) {
    check_radius(radius);
    if (mu.size() != l.size()) throw DimensionError("waterfill: mu and l sizes differ");

    const auto p = mu.probs();
    std::vector<double> nu(p.begin(), p.end());

    const double top_mass = mass_on(p, partition.sigma_max);
    const double r_max = partition.degenerate() ? 0.0 : std::max(0.0, 2.0 * (1.0 - top_mass));
    const double alpha = std::min(radius, r_max);
    const double half = alpha / 2.0;

    if (half > 0.0) {
        if (top_mass > 0.0) {
            for (std::size_t i : partition.sigma_max) nu[i] += half * p[i] / top_mass;
        } else {
            const double share = half / static_cast<double>(partition.sigma_max.size());
            for (std::size_t i : partition.sigma_max) nu[i] += share;
        }

        double remaining = half;
        for (const auto& set : partition.sigma_levels) {
            if (remaining <= 0.0) break;
            const double set_mass = mass_on(p, set);
            if (set_mass <= 0.0) continue;
            if (remaining >= set_mass) {
                for (std::size_t i : set) nu[i] = 0.0;
                remaining -= set_mass;
            } else {
                const double keep = 1.0 - remaining / set_mass;
                for (std::size_t i : set) nu[i] = p[i] * keep;
                remaining = 0.0;
            }
        }
        for (double& v : nu) v = std::clamp(v, 0.0, 1.0);
    }

    WaterfillResult out;
    out.maximizer = FiniteDistribution(std::move(nu));
    out.value = out.maximizer.expectation(l);
    out.effective_radius = alpha;
    out.r_max = r_max;
    return out;
}

WaterfillResult waterfill_maximize(const FiniteDistribution& mu, std::span<const double> l,
                                   double radius, double tie_tol) {
    check_radius(radius);
    if (mu.size() != l.size()) throw DimensionError("waterfill: mu and l sizes differ");
    return waterfill_maximize(mu, l, partition_levels(l, tie_tol), radius);
}

double unclamped_value(const FiniteDistribution& mu, std::span<const double> l, double radius) {
    check_radius(radius);
    if (mu.size() != l.size()) throw DimensionError("unclamped_value: mu and l sizes differ");
    return mu.expectation(l) + 0.5 * radius * oscillation(l);
}

}  // namespace tvdp
