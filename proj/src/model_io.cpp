#include "tvdp/model_io.hpp"

#include "tvdp/tv_oracle.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace tvdp {

using nlohmann::json;

namespace {

std::string line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double rounded(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

// Shortest round-trip representation; used for model documents so that
// parse and serialize compose to the identity.
json exact_array(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

json number_array(std::span<const double> v) {
    json a = json::array();
    for (double x : v) a.push_back(rounded(x));
    return a;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) throw ModelError(path, "missing key '" + key + "'");
    return obj.at(key);
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ModelError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ModelError(path, "non-finite number");
    return v;
}

std::vector<double> as_numbers(const json& j, std::size_t expected, const std::string& path) {
    if (!j.is_array()) throw ModelError(path, "expected an array of numbers");
    if (expected != 0 && j.size() != expected) {
        throw ModelError(path, "expected " + std::to_string(expected) + " entries, got " +
                                   std::to_string(j.size()));
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::string as_label(const json& j, const std::string& path) {
    if (!j.is_string()) throw ModelError(path, "expected a string label");
    auto s = j.get<std::string>();
    if (s.empty()) throw ModelError(path, "empty label");
    if (s.find_first_of(",\"\r\n") != std::string::npos) {
        throw ModelError(path, "labels may not contain commas, quotes or line breaks");
    }
    return s;
}

FiniteDistribution as_row(const json& j, std::size_t n, const std::string& path) {
    auto p = as_numbers(j, n, path);
    double total = 0.0;
    for (double v : p) {
        if (v < 0.0) throw ModelError(path, "negative probability");
        total += v;
    }
    if (std::abs(total - 1.0) > kRowSumTolerance) {
        throw ModelError(path, "row sums to " + format_number(total) + ", not 1");
    }
    if (std::abs(total - 1.0) <= kProbabilityTolerance) return FiniteDistribution(std::move(p));
    return FiniteDistribution::normalized(std::move(p));
}

void check_nonnegative(std::span<const double> v, const std::string& path) {
    for (double x : v) {
        if (x < 0.0) throw ModelError(path, "negative cost");
    }
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::vector<std::string>> read_csv(std::string_view text, std::string_view header) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw ModelError("line 1", "expected header '" + std::string(header) + "'");
    }
    const auto width = split(header, ',').size();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != width) {
            throw ModelError("line " + std::to_string(lineno), "wrong number of columns");
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

double parse_double(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ModelError(where, "bad number '" + s + "'");
    return v;
}

}  // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
    return buf;
}

RobustMdpModel parse_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError(line_col(text, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON");
    }
    if (!doc.is_object()) throw ModelError("", "model document must be a JSON object");

    static const std::set<std::string> known{"states", "actions",  "kernel",  "cost",
                                             "terminal_cost", "discount", "radius", "horizon",
                                             "initial", "description"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.contains(key)) throw ModelError(key, "unknown key");
    }

    RobustMdpModel m;
    const json& states = require(doc, "states", "");
    if (!states.is_array() || states.empty()) {
        throw ModelError("states", "expected a non-empty array of labels");
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
        auto label = as_label(states[i], "states[" + std::to_string(i) + "]");
        if (m.state_index(label)) throw ModelError("states", "duplicate state '" + label + "'");
        m.states.push_back(std::move(label));
    }
    const std::size_t n = m.states.size();

    const json& actions = require(doc, "actions", "");
    const json& kernel = require(doc, "kernel", "");
    const json& cost = require(doc, "cost", "");
    for (const auto* obj : {&actions, &kernel, &cost}) {
        if (!obj->is_object()) throw ModelError("", "actions, kernel and cost must be objects");
    }
    for (const auto& [name, obj] : {std::pair{"actions", &actions}, std::pair{"kernel", &kernel},
                                    std::pair{"cost", &cost}}) {
        for (const auto& [key, _] : obj->items()) {
            if (!m.state_index(key)) {
                throw ModelError(std::string(name) + "." + key, "unknown state");
            }
        }
    }

    m.actions.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
        const std::string& s = m.states[x];
        const std::string apath = "actions." + s;
        const json& labels = require(actions, s, "actions");
        if (!labels.is_array()) throw ModelError(apath, "expected an array of action labels");
        const json& krow = require(kernel, s, "kernel");
        const json& crow = require(cost, s, "cost");
        if (!krow.is_object() || !crow.is_object()) {
            throw ModelError("kernel." + s, "expected an object keyed by action");
        }
        std::set<std::string> seen;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            ActionSpec a;
            a.label = as_label(labels[i], apath + "[" + std::to_string(i) + "]");
            if (!seen.insert(a.label).second) {
                throw ModelError(apath, "duplicate action '" + a.label + "'");
            }
            const std::string kpath = "kernel." + s + "." + a.label;
            a.kernel = as_row(require(krow, a.label, "kernel." + s), n, kpath);
            const std::string cpath = "cost." + s + "." + a.label;
            const json& c = require(crow, a.label, "cost." + s);
            if (c.is_array()) {
                a.cost.per_next_state = as_numbers(c, n, cpath);
                check_nonnegative(a.cost.per_next_state, cpath);
            } else {
                a.cost.fixed = as_number(c, cpath);
                if (a.cost.fixed < 0.0) throw ModelError(cpath, "negative cost");
            }
            m.actions[x].push_back(std::move(a));
        }
        for (const auto* obj : {&krow, &crow}) {
            for (const auto& [key, _] : obj->items()) {
                if (!seen.contains(key)) {
                    throw ModelError((obj == &krow ? "kernel." : "cost.") + s + "." + key,
                                     "unknown action");
                }
            }
        }
    }

    if (doc.contains("terminal_cost")) {
        m.terminal_cost = as_numbers(doc["terminal_cost"], n, "terminal_cost");
        check_nonnegative(m.terminal_cost, "terminal_cost");
    }

    m.discount = as_number(require(doc, "discount", ""), "discount");
    if (!(m.discount > 0.0 && m.discount <= 1.0)) {
        throw ModelError("discount", "must lie in (0, 1]");
    }

    if (doc.contains("horizon")) {
        const json& h = doc["horizon"];
        if (!h.is_number_integer() || h.get<long long>() < 1) {
            throw ModelError("horizon", "must be a positive integer");
        }
        m.horizon = static_cast<int>(h.get<long long>());
    }

    const json& radius = require(doc, "radius", "");
    if (radius.is_array()) {
        m.scalar_radius = false;
        if (!m.horizon) throw ModelError("radius", "a radius list requires a horizon");
        m.radius = as_numbers(radius, static_cast<std::size_t>(*m.horizon) + 1, "radius");
    } else {
        const double r = as_number(radius, "radius");
        m.scalar_radius = true;
        m.radius.assign(m.horizon ? static_cast<std::size_t>(*m.horizon) + 1 : 1, r);
    }
    for (double r : m.radius) {
        if (!(r >= 0.0 && r <= 2.0)) throw ModelError("radius", "must lie in [0, 2]");
    }

    if (doc.contains("initial")) m.initial = as_row(doc["initial"], n, "initial");

    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw ModelError("model", e.what());
    }
    return m;
}

RobustMdpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError(path.string(), "cannot open model file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string serialize_model(const RobustMdpModel& model) {
    json doc;
    doc["states"] = model.states;
    json actions = json::object(), kernel = json::object(), cost = json::object();
    for (std::size_t x = 0; x < model.num_states(); ++x) {
        const std::string& s = model.states[x];
        actions[s] = json::array();
        kernel[s] = json::object();
        cost[s] = json::object();
        for (const ActionSpec& a : model.actions[x]) {
            actions[s].push_back(a.label);
            kernel[s][a.label] = exact_array(a.kernel.probs());
            if (a.cost.depends_on_next_state()) {
                std::vector<double> c = a.cost.per_next_state;
                for (double& v : c) v += a.cost.fixed;
                cost[s][a.label] = exact_array(c);
            } else {
                cost[s][a.label] = a.cost.fixed;
            }
        }
    }
    doc["actions"] = std::move(actions);
    doc["kernel"] = std::move(kernel);
    doc["cost"] = std::move(cost);
    if (!model.terminal_cost.empty()) doc["terminal_cost"] = exact_array(model.terminal_cost);
    doc["discount"] = model.discount;
    if (model.scalar_radius) {
        doc["radius"] = model.radius.front();
    } else {
        doc["radius"] = exact_array(model.radius);
    }
    if (model.horizon) doc["horizon"] = *model.horizon;
    if (model.initial) doc["initial"] = exact_array(model.initial->probs());
    return doc.dump(2) + "\n";
}

SolutionRecord make_record(const RobustMdpModel& model, std::span<const StagePlan> plans) {
    SolutionRecord r;
    r.kind = SolutionRecord::Kind::finite;
    r.states = model.states;
    r.radius = model.radius;
    r.discount = model.discount;
    r.iterations = static_cast<int>(plans.size()) - 1;
    for (const StagePlan& p : plans) {
        SolutionStage st;
        st.stage = p.stage;
        st.values = p.values;
        for (std::size_t x = 0; x < p.policy.size(); ++x) {
            st.policy.push_back(model.action(x, p.policy[x]).label);
        }
        for (const auto& k : p.worst_kernel) st.worst_kernel.push_back(k.vector());
        r.stages.push_back(std::move(st));
    }
    return r;
}

SolutionRecord make_record(const RobustMdpModel& model, const StationarySolution& solution) {
    SolutionRecord r;
    r.kind = SolutionRecord::Kind::infinite;
    r.states = model.states;
    r.radius = {model.uniform_radius()};
    r.discount = model.discount;
    r.iterations = solution.iterations;
    r.residual = solution.residual;
    r.converged = solution.converged;
    SolutionStage st;
    st.stage = -1;
    st.values = solution.values;
    for (std::size_t x = 0; x < solution.policy.size(); ++x) {
        st.policy.push_back(model.action(x, solution.policy[x]).label);
    }
    for (const auto& k : solution.worst_kernel) st.worst_kernel.push_back(k.vector());
    r.stages.push_back(std::move(st));
    return r;
}

void validate_record(const RobustMdpModel& model, const SolutionRecord& record) {
    if (record.states != model.states) throw ModelError("states", "state labels differ from model");
    for (const SolutionStage& st : record.stages) {
        const std::string where = "stages[" + std::to_string(st.stage) + "]";
        if (st.values.size() != model.num_states()) throw ModelError(where, "values length");
        if (st.policy.empty()) continue;
        if (st.policy.size() != model.num_states()) throw ModelError(where, "policy length");
        double radius = model.radius.front();
        if (record.kind == SolutionRecord::Kind::finite) {
            radius = model.transition_radius(static_cast<std::size_t>(st.stage));
        }
        for (std::size_t x = 0; x < model.num_states(); ++x) {
            const auto u = model.action_index(x, st.policy[x]);
            if (!u) throw ModelError(where, "infeasible action '" + st.policy[x] + "'");
            if (st.worst_kernel.size() != model.num_states()) {
                throw ModelError(where, "worst kernel missing");
            }
            try {
                const FiniteDistribution q(st.worst_kernel[x]);
                if (tv_distance(q, model.action(x, *u).kernel) > radius + 1e-9) {
                    throw ModelError(where, "worst kernel outside the ball for " + model.states[x]);
                }
            } catch (const std::invalid_argument& e) {
                throw ModelError(where, e.what());
            }
        }
    }
}

std::string serialize_solution(const SolutionRecord& record) {
    json doc;
    doc["kind"] = record.kind == SolutionRecord::Kind::finite ? "finite" : "infinite";
    doc["states"] = record.states;
    json stages = json::array();
    for (const SolutionStage& st : record.stages) {
        json s;
        s["stage"] = st.stage;
        s["values"] = number_array(st.values);
        s["policy"] = st.policy;
        json wk = json::array();
        for (const auto& row : st.worst_kernel) wk.push_back(number_array(row));
        s["worst_kernel"] = std::move(wk);
        stages.push_back(std::move(s));
    }
    doc["stages"] = std::move(stages);
    json meta;
    meta["radius"] = number_array(record.radius);
    meta["discount"] = rounded(record.discount);
    meta["iterations"] = record.iterations;
    meta["residual"] = rounded(record.residual);
    meta["converged"] = record.converged;
    doc["metadata"] = std::move(meta);
    return doc.dump(2) + "\n";
}

SolutionRecord parse_solution(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError(line_col(text, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON");
    }
    try {
        SolutionRecord r;
        const auto kind = doc.at("kind").get<std::string>();
        if (kind != "finite" && kind != "infinite") throw ModelError("kind", "unknown kind");
        r.kind = kind == "finite" ? SolutionRecord::Kind::finite : SolutionRecord::Kind::infinite;
        r.states = doc.at("states").get<std::vector<std::string>>();
        for (const json& s : doc.at("stages")) {
            SolutionStage st;
            st.stage = s.at("stage").get<int>();
            st.values = s.at("values").get<std::vector<double>>();
            st.policy = s.at("policy").get<std::vector<std::string>>();
            st.worst_kernel = s.at("worst_kernel").get<std::vector<std::vector<double>>>();
            r.stages.push_back(std::move(st));
        }
        const json& meta = doc.at("metadata");
        r.radius = meta.at("radius").get<std::vector<double>>();
        r.discount = meta.at("discount").get<double>();
        r.iterations = meta.at("iterations").get<int>();
        r.residual = meta.at("residual").get<double>();
        r.converged = meta.at("converged").get<bool>();
        return r;
    } catch (const json::exception& e) {
        throw ModelError("solution", e.what());
    }
}

std::string solution_csv(const SolutionRecord& record) {
    std::string out = "stage,state,action,value\n";
    for (const SolutionStage& st : record.stages) {
        for (std::size_t x = 0; x < st.values.size(); ++x) {
            out += std::to_string(st.stage) + "," + record.states[x] + "," +
                   (st.policy.empty() ? std::string() : st.policy[x]) + "," +
                   format_number(st.values[x]) + "\n";
        }
    }
    return out;
}

std::vector<SolutionCsvRow> parse_solution_csv(std::string_view text) {
    std::vector<SolutionCsvRow> rows;
    for (const auto& cells : read_csv(text, "stage,state,action,value")) {
        SolutionCsvRow r;
        r.stage = static_cast<int>(parse_double(cells[0], "stage"));
        r.state = cells[1];
        r.action = cells[2];
        r.value = parse_double(cells[3], "value");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string sweep_csv(const RobustMdpModel& model, std::span<const SweepRow> rows) {
    std::string out = "radius,state,value,action\n";
    for (const SweepRow& r : rows) {
        out += format_number(r.radius) + "," + model.states[r.state] + "," +
               format_number(r.value) + "," + model.action(r.state, r.action).label + "\n";
    }
    return out;
}

std::vector<SweepCsvRow> parse_sweep_csv(std::string_view text) {
    std::vector<SweepCsvRow> rows;
    for (const auto& cells : read_csv(text, "radius,state,value,action")) {
        rows.push_back({parse_double(cells[0], "radius"), cells[1], parse_double(cells[2], "value"),
                        cells[3]});
    }
    return rows;
}

}  // namespace tvdp
