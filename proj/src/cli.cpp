#include "tvdp/cli.hpp"

#include "tvdp/finite_horizon.hpp"
#include "tvdp/infinite_horizon.hpp"
#include "tvdp/model_io.hpp"
#include "tvdp/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace tvdp::cli {

namespace {

enum class LogLevel { quiet, info, debug };

LogLevel log_level() {
    const char* env = std::getenv("TVDP_LOG");
    if (!env) return LogLevel::quiet;
    const std::string_view v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    return LogLevel::quiet;
}

class Logger {
public:
    explicit Logger(std::ostream& err) : err_(err), level_(log_level()) {}
    void info(const std::string& msg) const {
        if (level_ != LogLevel::quiet) err_ << "[info] " << msg << '\n';
    }
    void debug(const std::string& msg) const {
        if (level_ == LogLevel::debug) err_ << "[debug] " << msg << '\n';
    }
    void warn(const std::string& msg) const { err_ << "warning: " << msg << '\n'; }

private:
    std::ostream& err_;
    LogLevel level_;
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size()) {
            throw std::invalid_argument("bad number in list: '" + cell + "'");
        }
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> split_labels(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
    return s;
}

// Shared flag values; each subcommand reads the ones it registered.
struct Flags {
    std::string model_path;
    std::string out_path;
    std::optional<double> radius;
    std::string radius_grid;
    std::optional<int> horizon;
    double tol = 1e-9;
    int max_iter = 1'000'000;
    std::string method = "vi";
    std::string pi_mode = "fixed_point";
    std::string init;
    std::size_t episodes = 100000;
    std::uint64_t seed = 20240101;
    int jobs = 0;
    std::string format = "csv";
    std::string kernel = "worst";
    int horizon_cap = 0;
    std::string mu;
    std::string values;
    std::size_t instances = 10000;
    std::size_t max_alphabet = 8;
    int trials = 1000;
};

RobustMdpModel load_with_overrides(const Flags& f) {
    RobustMdpModel m = load_model(f.model_path);
    if (f.horizon) {
        if (*f.horizon < 1) throw std::invalid_argument("--horizon must be >= 1");
        m.horizon = *f.horizon;
        if (!f.radius && !m.scalar_radius) {
            throw std::invalid_argument("--horizon conflicts with the model's per-stage radius list");
        }
        m = with_radius(m, m.radius.front());
    }
    if (f.radius) m = with_radius(m, *f.radius);
    m.validate();
    return m;
}

void emit(const Flags& f, std::ostream& out, const std::string& text) {
    if (f.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(f.out_path, std::ios::binary);
    if (!file) throw std::invalid_argument("cannot write " + f.out_path);
    file << text;
}

StationaryPolicy parse_policy(const RobustMdpModel& m, const std::string& text) {
    const auto labels = split_labels(text);
    if (labels.size() != m.num_states()) {
        throw std::invalid_argument("--init needs one action label per state");
    }
    StationaryPolicy g(labels.size());
    for (std::size_t x = 0; x < labels.size(); ++x) {
        const auto u = m.action_index(x, labels[x]);
        if (!u) throw std::invalid_argument("--init: '" + labels[x] + "' is not an action of " +
                                            m.states[x]);
        g[x] = *u;
    }
    return g;
}

SolveOptions solve_options(const Flags& f) {
    SolveOptions o;
    o.jobs = f.jobs;
    return o;
}

int cmd_oracle(const Flags& f, std::ostream& out) {
    const auto mu = FiniteDistribution(parse_list(f.mu));
    const auto l = parse_list(f.values);
    const auto wf = waterfill_maximize(mu, l, f.radius.value_or(0.0));
    nlohmann::json j;
    j["maximizer"] = wf.maximizer.vector();
    j["value"] = wf.value;
    j["effective_radius"] = wf.effective_radius;
    j["r_max"] = wf.r_max;
    j["unclamped_value"] = unclamped_value(mu, l, f.radius.value_or(0.0));
    out << j.dump(2) << '\n';
    return kOk;
}

int cmd_solve_finite(const Flags& f, std::ostream& out, const Logger& log) {
    const RobustMdpModel m = load_with_overrides(f);
    const auto plans = solve_finite(m, solve_options(f));
    log.info("solved " + std::to_string(*m.horizon) + " stages");
    if (m.initial) {
        const auto w = initial_worst_case(m, plans.front());
        log.info("worst-case initial value " + format_number(w.value));
    }
    const auto record = make_record(m, plans);
    emit(f, out, f.format == "json" ? serialize_solution(record) : solution_csv(record));
    return kOk;
}

int cmd_solve_infinite(const Flags& f, std::ostream& out, std::ostream& err, const Logger& log) {
    RobustMdpModel m = load_with_overrides(f);
    m.horizon.reset();
    StationarySolution sol;
    if (f.method == "vi") {
        auto vi = value_iteration(m, f.tol, f.max_iter, solve_options(f));
        sol = std::move(vi.solution);
        log.info("value iteration: " + std::to_string(sol.iterations) + " sweeps, residual " +
                 format_number(sol.residual));
    } else {
        const StationaryPolicy g0 =
            f.init.empty() ? StationaryPolicy(m.num_states(), 0) : parse_policy(m, f.init);
        const PiMode mode = f.pi_mode == "paper" ? PiMode::paper : PiMode::fixed_point;
        PolicyIterationOptions pio;
        pio.max_iter = f.max_iter;
        auto pi = policy_iteration(m, g0, mode, pio);
        for (const auto& step : pi.trace.steps) {
            std::string pol;
            for (std::size_t x = 0; x < step.policy.size(); ++x) {
                pol += (x ? "," : "") + m.action(x, step.policy[x]).label;
            }
            log.debug("pi step " + std::to_string(step.index) + ": policy " + pol + " nominal " +
                      join(step.nominal_values) + " robust " + join(step.robust_values));
        }
        log.info("policy iteration: " + std::to_string(pi.trace.improvement_steps) +
                 " improvement passes, " + std::to_string(pi.trace.policy_changes) +
                 " policy changes");
        if (pi.trace.support_mismatch) {
            Logger(err).warn("supports frozen from the nominal evaluation differ from those of "
                             "the robust values; rerun with --pi-mode fixed_point");
        }
        sol = std::move(pi.solution);
    }
    const auto record = make_record(m, sol);
    emit(f, out, f.format == "json" ? serialize_solution(record) : solution_csv(record));
    if (!sol.converged) {
        err << "error: value iteration did not converge within --max-iter\n";
        return kNotConverged;
    }
    return kOk;
}

int cmd_sweep(const Flags& f, std::ostream& out) {
    RobustMdpModel m = load_with_overrides(f);
    const auto grid = parse_grid(f.radius_grid);
    const auto rows = m.horizon ? sweep_radius_finite(m, grid, solve_options(f))
                                : sweep_radius_infinite(m, grid, solve_options(f));
    emit(f, out, sweep_csv(m, rows));
    return kOk;
}

int cmd_certify(const Flags& f, std::ostream& out) {
    std::vector<verify::CheckReport> reports;
    reports.push_back(verify::certify_waterfill_fuzz(f.instances, f.max_alphabet, f.trials, f.seed));
    if (!f.model_path.empty()) {
        const RobustMdpModel m = load_with_overrides(f);
        if (!m.horizon) throw std::invalid_argument("certify --model needs a finite horizon");
        SolveOptions serial;
        serial.execution = kernels::Execution::serial;
        const auto dp = solve_finite(m, serial).front().values;
        const auto brute = verify::brute_force_finite(m);
        verify::CheckReport r;
        r.check = "brute_force_finite";
        r.instances = 1;
        r.seed = f.seed;
        for (std::size_t x = 0; x < dp.size(); ++x) {
            r.max_violation = std::max(r.max_violation, std::abs(dp[x] - brute[x]));
        }
        r.failures = r.max_violation > verify::kOptimalityTolerance ? 1 : 0;
        reports.push_back(r);
    }
    std::string text;
    bool ok = true;
    for (const auto& r : reports) {
        text += r.to_json() + "\n";
        ok = ok && r.passed();
    }
    emit(f, out, text);
    return ok ? kOk : kValidationError;
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream& err) {
    RobustMdpModel m = load_with_overrides(f);
    m.horizon.reset();
    auto vi = value_iteration(m, 1e-10, 1'000'000, solve_options(f));
    if (!vi.solution.converged) {
        err << "error: value iteration did not converge\n";
        return kNotConverged;
    }
    const auto pi = policy_iteration(m, vi.solution.policy, PiMode::fixed_point);
    const StationarySolution& sol = pi.solution;

    verify::RolloutConfig cfg;
    cfg.episodes = f.episodes;
    cfg.seed = f.seed;
    cfg.jobs = f.jobs;
    cfg.horizon_cap = f.horizon_cap;
    if (f.kernel == "nominal") {
        cfg.kernel = verify::KernelChoice::nominal;
    } else {
        cfg.kernel = verify::KernelChoice::worst;
    }
    const auto est = verify::monte_carlo_rollout(m, sol.policy, cfg, sol.worst_kernel);
    std::string text = "state,action,mean,std_error,robust_value\n";
    for (std::size_t x = 0; x < m.num_states(); ++x) {
        text += m.states[x] + "," + m.action(x, sol.policy[x]).label + "," +
                format_number(est.mean[x]) + "," + format_number(est.std_error[x]) + "," +
                format_number(sol.values[x]) + "\n";
    }
    emit(f, out, text);
    return kOk;
}

}  // namespace

std::vector<double> parse_grid(std::string_view spec) {
    std::vector<std::string> fields;
    {
        std::stringstream ss{std::string(spec)};
        std::string cell;
        while (std::getline(ss, cell, ':')) fields.push_back(cell);
    }
    if (fields.size() != 3) throw std::invalid_argument("radius grid must be start:stop:step");
    const auto nums = parse_list(fields[0] + "," + fields[1] + "," + fields[2]);
    const double start = nums[0], stop = nums[1], step = nums[2];
    if (!(step > 0.0) || stop < start) {
        throw std::invalid_argument("radius grid needs step > 0 and stop >= start");
    }
    constexpr double kEndpointTol = 1e-12;
    const auto count = static_cast<long>(std::floor((stop - start + kEndpointTol) / step));
    std::vector<double> grid;
    for (long k = 0; k <= count; ++k) {
        grid.push_back(std::min(start + static_cast<double>(k) * step, stop));
    }
    if (stop - grid.back() > kEndpointTol &&
        std::abs(stop - grid.back() - step) <= kEndpointTol) {
        grid.push_back(stop);
    }
    return grid;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Flags f;
    CLI::App app{"Robust dynamic programming under total-variation ambiguity", "tvdp"};
    app.require_subcommand(1, 1);

    auto add_model = [&](CLI::App* c) {
        c->add_option("--model", f.model_path, "Model document (JSON)")->required();
    };
    auto add_out = [&](CLI::App* c) {
        c->add_option("--out", f.out_path, "Write results here instead of standard output");
    };
    auto add_jobs = [&](CLI::App* c) {
        c->add_option("--jobs", f.jobs, "Worker threads (0 = OpenMP default)")
            ->check(CLI::NonNegativeNumber);
    };
    auto add_radius = [&](CLI::App* c, const char* help) {
        c->add_option("--radius", f.radius, help)->check(CLI::Range(0.0, 2.0));
    };
    auto add_format = [&](CLI::App* c) {
        c->add_option("--format", f.format, "Output format")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* oracle = app.add_subcommand("oracle", "Worst-case distribution in a TV ball");
    oracle->add_option("--mu", f.mu, "Nominal distribution, comma separated")->required();
    oracle->add_option("--values", f.values, "Pay-off per letter, comma separated")->required();
    add_radius(oracle, "Ball radius in [0, 2] (unhalved l1)");

    auto* finite = app.add_subcommand("solve-finite", "Finite-horizon robust dynamic programming");
    add_model(finite);
    add_radius(finite, "Override the model radius (all stages)");
    finite->add_option("--horizon", f.horizon, "Override the model horizon");
    add_format(finite);
    add_out(finite);
    add_jobs(finite);

    auto* infinite = app.add_subcommand("solve-infinite", "Discounted infinite-horizon solve");
    add_model(infinite);
    add_radius(infinite, "Override the model radius");
    infinite->add_option("--method", f.method, "vi or pi")->check(CLI::IsMember({"vi", "pi"}));
    infinite->add_option("--pi-mode", f.pi_mode, "Support identification for --method pi")
        ->check(CLI::IsMember({"paper", "fixed_point"}));
    infinite->add_option("--init", f.init, "Initial policy for pi: action labels, comma separated");
    infinite->add_option("--tol", f.tol, "Value-iteration tolerance on the fixed point")
        ->check(CLI::PositiveNumber);
    infinite->add_option("--max-iter", f.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
    add_format(infinite);
    add_out(infinite);
    add_jobs(infinite);

    auto* sweep = app.add_subcommand("sweep", "Optimal values over a grid of radii (CSV)");
    add_model(sweep);
    sweep->add_option("--radius-grid", f.radius_grid, "start:stop:step, endpoints inclusive")
        ->required();
    sweep->add_option("--horizon", f.horizon, "Override the model horizon");
    add_out(sweep);
    add_jobs(sweep);

    auto* certify = app.add_subcommand("certify", "Run the independent optimality checks");
    certify->add_option("--model", f.model_path, "Also brute-force this finite-horizon model");
    certify->add_option("--horizon", f.horizon, "Override the model horizon");
    certify->add_option("--instances", f.instances, "Fuzzed oracle instances");
    certify->add_option("--max-alphabet", f.max_alphabet, "Largest fuzzed alphabet")
        ->check(CLI::PositiveNumber);
    certify->add_option("--trials", f.trials, "Random feasible points per instance");
    certify->add_option("--seed", f.seed, "Random seed");
    add_out(certify);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo rollouts of the optimal policy");
    add_model(simulate);
    add_radius(simulate, "Override the model radius");
    simulate->add_option("--episodes", f.episodes, "Episodes per start state")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", f.seed, "Random seed");
    simulate->add_option("--kernel", f.kernel, "worst or nominal transition kernel")
        ->check(CLI::IsMember({"worst", "nominal"}));
    simulate->add_option("--horizon-cap", f.horizon_cap, "Truncation (0 = automatic)");
    add_out(simulate);
    add_jobs(simulate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidationError;
    }

    const Logger log(err);
    try {
        if (*oracle) return cmd_oracle(f, out);
        if (*finite) return cmd_solve_finite(f, out, log);
        if (*infinite) return cmd_solve_infinite(f, out, err, log);
        if (*sweep) return cmd_sweep(f, out);
        if (*certify) return cmd_certify(f, out);
        if (*simulate) return cmd_simulate(f, out, err);
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kNotConverged;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    }
    return kValidationError;
}

}  // namespace tvdp::cli
