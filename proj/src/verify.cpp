#include "tvdp/verify.hpp"

#include "tvdp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace tvdp::verify {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

bool on_simplex(std::span<const double> p) {
    double total = 0.0;
    for (double v : p) {
        if (!(v >= -kProbabilityTolerance && v <= 1.0 + kProbabilityTolerance)) return false;
        total += v;
    }
    return std::abs(total - 1.0) <= kProbabilityTolerance;
}

// Random feasible point of the ball: a few pairwise transfers out of mu, then
// shrunk toward mu until the l1 budget holds. Half the transfers target the
// best letter so the samples reach the boundary where the optimum lives.
std::vector<double> random_feasible(std::span<const double> mu, std::span<const double> l,
                                    double radius, SplitMix64& rng) {
    const std::size_t n = mu.size();
    std::vector<double> nu(mu.begin(), mu.end());
    if (n < 2) return nu;
    const auto best = static_cast<std::size_t>(std::max_element(l.begin(), l.end()) - l.begin());
    const std::size_t transfers = 1 + rng.below(2 * n);
    for (std::size_t t = 0; t < transfers; ++t) {
        const std::size_t from = rng.below(n);
        std::size_t to = rng.uniform() < 0.5 ? best : rng.below(n);
        if (to == from) to = (from + 1 + rng.below(n - 1)) % n;
        const double amount = (rng.uniform() < 0.3 ? 1.0 : rng.uniform()) * nu[from];
        nu[from] -= amount;
        nu[to] += amount;
    }
    double dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) dist += std::abs(nu[i] - mu[i]);
    if (dist > radius) {
        const double s = dist > 0.0 ? radius / dist : 0.0;
        for (std::size_t i = 0; i < n; ++i) nu[i] = mu[i] + s * (nu[i] - mu[i]);
    }
    return nu;
}

// Every point of the simplex with coordinates in multiples of 1/steps.
void for_each_grid_point(std::size_t n, int steps,
                         const std::function<void(const std::vector<double>&)>& visit) {
    std::vector<double> p(n, 0.0);
    if (n == 1) {
        p[0] = 1.0;
        visit(p);
        return;
    }
    for (int i = 0; i <= steps; ++i) {
        if (n == 2) {
            p[0] = static_cast<double>(i) / steps;
            p[1] = static_cast<double>(steps - i) / steps;
            visit(p);
            continue;
        }
        for (int j = 0; i + j <= steps; ++j) {
            p[0] = static_cast<double>(i) / steps;
            p[1] = static_cast<double>(j) / steps;
            p[2] = static_cast<double>(steps - i - j) / steps;
            visit(p);
        }
    }
}

void merge(CheckReport& into, const CheckReport& r) {
    into.instances += r.instances;
    into.failures += r.failures;
    into.infeasible += r.infeasible;
    into.max_violation = std::max(into.max_violation, r.max_violation);
}

// Pairwise summation keeps the aggregate independent of how episodes were
// scheduled and tight in rounding error.
double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) return std::accumulate(v.begin(), v.end(), 0.0);
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void require_horizon(const RobustMdpModel& model) {
    if (!model.horizon || *model.horizon < 1) {
        throw std::invalid_argument("enumeration needs a finite horizon >= 1");
    }
}

}  // namespace

std::string CheckReport::to_json() const {
    nlohmann::json j;
    j["check"] = check;
    j["instances"] = instances;
    j["failures"] = failures;
    j["infeasible"] = infeasible;
    j["max_violation"] = max_violation;
    j["seed"] = seed;
    return j.dump();
}

CheckReport certify_waterfill(const FiniteDistribution& mu, std::span<const double> l,
                              double radius, const WaterfillResult& candidate, int trials,
                              std::uint64_t seed) {
    CheckReport rep;
    rep.check = "certify_waterfill";
    rep.instances = 1;
    rep.seed = seed;

    const auto cand = candidate.maximizer.probs();
    if (cand.size() != mu.size() || !on_simplex(cand) ||
        tv_distance(cand, mu.probs()) > radius + 1e-12) {
        rep.failures = 1;
        rep.infeasible = 1;
        rep.max_violation = std::numeric_limits<double>::infinity();
        return rep;
    }

    double worst_gap = -std::numeric_limits<double>::infinity();
    auto probe = [&](std::span<const double> nu) {
        worst_gap = std::max(worst_gap, dot(l, nu) - candidate.value);
    };

    probe(cand);
    probe(mu.probs());
    SplitMix64 rng(seed);
    for (int t = 0; t < trials; ++t) probe(random_feasible(mu.probs(), l, radius, rng));
    if (mu.size() <= 3) {
        for_each_grid_point(mu.size(), 200, [&](const std::vector<double>& p) {
            if (tv_distance(p, mu.probs()) <= radius + 1e-12) probe(p);
        });
    }

    rep.max_violation = std::max(0.0, worst_gap);
    if (worst_gap > kOptimalityTolerance) rep.failures = 1;
    return rep;
}

CheckReport certify_waterfill_fuzz(std::size_t instances, std::size_t max_alphabet,
                                   int trials_per_instance, std::uint64_t seed) {
    CheckReport total;
    total.check = "certify_waterfill_fuzz";
    total.seed = seed;
    SplitMix64 rng(seed);
    for (std::size_t k = 0; k < instances; ++k) {
        const std::size_t n = 1 + rng.below(max_alphabet);
        std::vector<double> w(n), l(n);
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
            // Small integer levels produce ties; real levels exercise the generic case.
            l[i] = (k % 2 == 0) ? static_cast<double>(rng.below(5)) : 100.0 * rng.uniform();
        }
        if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w[rng.below(n)] = 1;
        const auto mu = FiniteDistribution::normalized(std::move(w));
        const double pick = rng.uniform();
        const double radius = pick < 0.05 ? 0.0 : pick < 0.1 ? 2.0 : 2.0 * rng.uniform();
        const auto candidate = waterfill_maximize(mu, l, radius);
        merge(total, certify_waterfill(mu, l, radius, candidate, trials_per_instance,
                                       SplitMix64::derive(seed, k, 0)));
    }
    return total;
}

double two_point_max(const FiniteDistribution& mu, std::span<const double> l, double radius) {
    if (mu.size() != 2 || l.size() != 2) throw DimensionError("two_point_max needs two letters");
    check_radius(radius);
    const std::size_t lo = l[0] <= l[1] ? 0 : 1;
    const std::size_t hi = 1 - lo;
    const double osc = l[hi] - l[lo];
    const double moved = std::min({radius / 2.0, mu[lo], 1.0 - mu[hi]});
    return mu[0] * l[0] + mu[1] * l[1] + moved * osc;
}

double markov_policy_count(const RobustMdpModel& model) {
    require_horizon(model);
    double count = 1.0;
    for (const auto& acts : model.actions) {
        count *= std::pow(static_cast<double>(acts.size()), *model.horizon);
    }
    return count;
}

std::vector<double> brute_force_finite(const RobustMdpModel& model, double budget) {
    require_horizon(model);
    const double count = markov_policy_count(model);
    if (count > budget) throw BudgetError("Markov policy enumeration exceeds the budget");
    const auto n = static_cast<std::size_t>(*model.horizon);
    const std::size_t ns = model.num_states();
    for (const auto& acts : model.actions) {
        if (acts.empty()) throw std::invalid_argument("state without feasible actions");
    }

    SolveOptions serial;
    serial.execution = kernels::Execution::serial;
    MarkovPolicy policy(n, StationaryPolicy(ns, 0));
    std::vector<double> best(ns, std::numeric_limits<double>::infinity());
    for (;;) {
        const auto values = evaluate_policy_finite(model, policy, serial);
        for (std::size_t x = 0; x < ns; ++x) best[x] = std::min(best[x], values[0][x]);
        // Odometer increment over (stage, state) digits.
        std::size_t j = 0, x = 0;
        for (;;) {
            if (++policy[j][x] < model.actions[x].size()) break;
            policy[j][x] = 0;
            if (++x == ns) {
                x = 0;
                if (++j == n) return best;
            }
        }
    }
}

SufficiencyResult markov_sufficiency_check(const RobustMdpModel& model, double budget) {
    require_horizon(model);
    const int n = *model.horizon;
    const std::size_t ns = model.num_states();
    for (const auto& acts : model.actions) {
        if (acts.empty()) throw std::invalid_argument("state without feasible actions");
    }

    // Decision nodes are state paths (x_0..x_j), j < n. Nodes of stage j start
    // at offset[j]; a path's code is its digits read base |X|.
    std::vector<std::size_t> offset(static_cast<std::size_t>(n) + 1, 0);
    std::size_t width = ns;
    for (int j = 0; j < n; ++j) {
        offset[j + 1] = offset[j] + width;
        width *= ns;
    }
    const std::size_t nodes = offset[n];
    std::vector<std::size_t> last_state(nodes), choices(nodes);
    double count = 1.0;
    for (int j = 0; j < n; ++j) {
        const std::size_t len = offset[j + 1] - offset[j];
        for (std::size_t code = 0; code < len; ++code) {
            const std::size_t node = offset[j] + code;
            last_state[node] = code % ns;
            choices[node] = model.actions[last_state[node]].size();
            count *= static_cast<double>(choices[node]);
        }
    }
    if (count > budget) throw BudgetError("history policy enumeration exceeds the budget");

    std::vector<ActionIndex> policy(nodes, 0);

    // Worst-case cost-to-go of the node at (stage, code) under `policy`.
    std::function<double(int, std::size_t)> value = [&](int stage, std::size_t code) -> double {
        const std::size_t x = code % ns;
        if (stage == n) return model.terminal(x);
        const ActionSpec& a = model.action(x, policy[offset[stage] + code]);
        std::vector<double> l(ns);
        for (std::size_t z = 0; z < ns; ++z) {
            const double c = a.cost.depends_on_next_state() ? a.cost.per_next_state[z] : 0.0;
            l[z] = c + model.discount * value(stage + 1, code * ns + z);
        }
        const double r = model.transition_radius(static_cast<std::size_t>(stage));
        return a.cost.fixed + waterfill_maximize(a.kernel, l, r).value;
    };

    SufficiencyResult res;
    res.history_policies = count;
    res.history_minimum.assign(ns, std::numeric_limits<double>::infinity());
    for (;;) {
        for (std::size_t x = 0; x < ns; ++x) {
            res.history_minimum[x] = std::min(res.history_minimum[x], value(0, x));
        }
        std::size_t k = 0;
        while (k < nodes && ++policy[k] == choices[k]) policy[k++] = 0;
        if (k == nodes) break;
    }

    res.markov_minimum = brute_force_finite(model, budget);
    for (std::size_t x = 0; x < ns; ++x) {
        res.max_gap = std::max(res.max_gap,
                               std::abs(res.history_minimum[x] - res.markov_minimum[x]));
    }
    res.passed = res.max_gap <= kOptimalityTolerance;
    return res;
}

int auto_horizon_cap(const RobustMdpModel& model, double stat_tolerance) {
    const double a = model.discount;
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("rollouts need a discount in (0, 1)");
    if (!(stat_tolerance > 0.0)) throw std::invalid_argument("stat_tolerance must be positive");
    const double fmax = model.max_stage_cost();
    if (fmax <= 0.0) return 1;
    const double target = stat_tolerance / 10.0;
    const double cap = std::ceil(std::log(target * (1.0 - a) / fmax) / std::log(a));
    return std::max(1, static_cast<int>(cap));
}

RolloutEstimate monte_carlo_rollout(const RobustMdpModel& model,
                                    std::span<const ActionIndex> policy, const RolloutConfig& cfg,
                                    std::span<const FiniteDistribution> kernels) {
    model.check_policy(policy);
    if (cfg.episodes < 1) throw std::invalid_argument("rollout needs at least one episode");
    const std::size_t ns = model.num_states();
    if (cfg.kernel != KernelChoice::nominal) {
        if (kernels.size() != ns) {
            throw std::invalid_argument(cfg.kernel == KernelChoice::worst
                                            ? "worst-case rollout needs a solved worst kernel"
                                            : "custom rollout needs one kernel row per state");
        }
        for (const auto& row : kernels) {
            if (row.size() != ns) throw DimensionError("rollout kernel row has the wrong length");
        }
    }
    const int cap = cfg.horizon_cap > 0 ? cfg.horizon_cap : auto_horizon_cap(model, cfg.stat_tolerance);

    // Cumulative rows for inverse-CDF sampling.
    std::vector<std::vector<double>> cdf(ns, std::vector<double>(ns));
    for (std::size_t x = 0; x < ns; ++x) {
        const FiniteDistribution& row =
            cfg.kernel == KernelChoice::nominal ? model.action(x, policy[x]).kernel : kernels[x];
        std::partial_sum(row.probs().begin(), row.probs().end(), cdf[x].begin());
    }

    RolloutEstimate est;
    est.horizon_cap = cap;
    est.mean.resize(ns);
    est.std_error.resize(ns);
    std::vector<double> returns(cfg.episodes), squares(cfg.episodes);
    const auto episodes = static_cast<std::ptrdiff_t>(cfg.episodes);
    for (std::size_t start = 0; start < ns; ++start) {
#ifdef TVDP_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(kernels::resolve_jobs(cfg.jobs))
#endif
        for (std::ptrdiff_t e = 0; e < episodes; ++e) {
            SplitMix64 rng(SplitMix64::derive(cfg.seed, start, static_cast<std::uint64_t>(e)));
            std::size_t x = start;
            double total = 0.0, weight = 1.0;
            for (int t = 0; t < cap; ++t) {
                const ActionSpec& a = model.action(x, policy[x]);
                const auto& c = cdf[x];
                const double u = rng.uniform() * c.back();
                std::size_t z = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), u) -
                                                         c.begin());
                if (z >= ns) z = ns - 1;
                total += weight * a.cost.at(z);
                weight *= model.discount;
                x = z;
            }
            returns[static_cast<std::size_t>(e)] = total;
        }
        const double mean = pairwise_sum(returns) / static_cast<double>(cfg.episodes);
        for (std::size_t e = 0; e < cfg.episodes; ++e) {
            squares[e] = (returns[e] - mean) * (returns[e] - mean);
        }
        const double var = cfg.episodes > 1
                               ? pairwise_sum(squares) / static_cast<double>(cfg.episodes - 1)
                               : 0.0;
        est.mean[start] = mean;
        est.std_error[start] = std::sqrt(var / static_cast<double>(cfg.episodes));
    }
    return est;
}

}  // namespace tvdp::verify
