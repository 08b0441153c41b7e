#include "wf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace wf {

std::string policy_name(Policy p) { return p == Policy::Unitary ? "unitary" : "collapse"; }

Policy parse_policy(const std::string& name) {
    if (name == "unitary") return Policy::Unitary;
    if (name == "collapse") return Policy::Collapse;
    throw ValidationError("unknown policy '" + name + "'");
}

std::string derive_until(const std::string& time) {
    if (!time.empty() && time.back() >= '0' && time.back() <= '8') {
        std::string u = time;
        u.back() = static_cast<char>(u.back() + 1);
        return u;
    }
    return time;
}

std::size_t Scenario::step_index_by_agent(const std::string& agent) const {
    for (std::size_t i = 0; i < steps.size(); ++i)
        if (steps[i].measurement.agent == agent) return i;
    throw LayoutError("no step by agent '" + agent + "'");
}

std::size_t Scenario::step_index_by_time(const std::string& time) const {
    for (std::size_t i = 0; i < steps.size(); ++i)
        if (steps[i].time == time || steps[i].until == time) return i;
    throw LayoutError("halt time '" + time + "' not in schedule");
}

void Scenario::validate() const {
    std::set<std::string> agents;
    std::string prev_time;
    for (const auto& step : steps) {
        if (!prev_time.empty() && step.time <= prev_time)
            throw ValidationError("step times not strictly increasing at '" + step.time + "'");
        prev_time = step.time;
        if (!agents.insert(step.measurement.agent).second)
            throw ValidationError("agent '" + step.measurement.agent + "' measures twice");
        for (const auto& prep : step.preps) {
            if (!layout.has_register(prep.target_register))
                throw ValidationError("prep targets unknown register '" + prep.target_register +
                                      "'");
            step.measurement.outcome_index(prep.outcome);  // throws if unknown
            if (std::abs(prep.state.norm() - 1.0) > kInputNormTol)
                throw ValidationError("prep state '" + prep.state_name + "' not normalized");
        }
    }
    for (const auto& c : comms) {
        if (!agents.count(c.from) || !agents.count(c.to))
            throw ValidationError("comm references unknown agent");
    }
    if (std::abs(initial.norm() - 1.0) > kInputNormTol)
        throw ValidationError("initial state not normalized");
}

namespace {

// The unique label the register carries in the initial state, if the state is
// a basis state on that register.
std::string definite_initial_label(const StateVector& initial, const std::string& reg_name) {
    const std::size_t pos = initial.layout.register_index(reg_name);
    const Register& r = initial.layout.reg(pos);
    std::optional<std::size_t> found;
    for (std::size_t idx = 0; idx < initial.dim(); ++idx) {
        if (std::norm(initial.amps[idx]) <= kTol) continue;
        const std::size_t digit = (idx / initial.layout.stride(pos)) % r.dim();
        if (found && *found != digit)
            throw ValidationError("prep target register '" + reg_name +
                                  "' has no definite initial label");
        found = digit;
    }
    if (!found) throw ValidationError("initial state is zero");
    return r.labels[*found];
}

// Unitary on a single register mapping |src> to phi, completed
// deterministically from the standard basis.
LinearMap reset_unitary(const Register& r, const std::string& src_label,
                        const StateVector& phi) {
    const std::size_t d = r.dim();
    const std::size_t src = r.label_index(src_label);
    // drop the standard basis vector most parallel to phi
    std::size_t skip = 0;
    double best = -1.0;
    for (std::size_t j = 0; j < d; ++j) {
        if (std::abs(phi.amps[j]) > best) {
            best = std::abs(phi.amps[j]);
            skip = j;
        }
    }
    std::vector<std::vector<cnum>> cols;
    cols.push_back(phi.amps);
    for (std::size_t j = 0; j < d; ++j) {
        if (j == skip) continue;
        std::vector<cnum> v(d, cnum(0));
        v[j] = cnum(1);
        for (const auto& c : cols) {
            cnum ov(0);
            for (std::size_t i = 0; i < d; ++i) ov += std::conj(c[i]) * v[i];
            for (std::size_t i = 0; i < d; ++i) v[i] -= ov * c[i];
        }
        double n = 0.0;
        for (const auto& x : v) n += std::norm(x);
        n = std::sqrt(n);
        if (n < 1e-8) throw ValidationError("reset_unitary: degenerate completion");
        for (auto& x : v) x /= n;
        cols.push_back(std::move(v));
    }
    // column order: src gets phi, the rest fill remaining slots in order
    SpaceLayout rl(std::vector<Register>{r});
    LinearMap u{rl, rl, std::vector<cnum>(d * d, cnum(0))};
    std::size_t next = 1;
    for (std::size_t col = 0; col < d; ++col) {
        const auto& v = (col == src) ? cols[0] : cols[next++];
        for (std::size_t row = 0; row < d; ++row) u.at(row, col) = v[row];
    }
    if (!is_isometry(u, 1e-10)) throw ValidationError("reset_unitary: not unitary");
    return u;
}

// Controlled preparation keyed on the step's memory record: on the branch
// where memory reads `outcome`, the target register's initial basis state is
// rotated into the prepared state.
void apply_preps(StateVector& state, const Scenario& sc, const Step& step,
                 const Register& memory) {
    std::set<std::string> targets;
    for (const auto& prep : step.preps) targets.insert(prep.target_register);
    for (const auto& target_name : targets) {
        const Register& target = state.layout.reg(target_name);
        const std::string src = definite_initial_label(sc.initial, target_name);
        SpaceLayout pair_layout(std::vector<Register>{memory, target});
        const std::size_t md = memory.dim();
        const std::size_t td = target.dim();
        LinearMap ctrl{pair_layout, pair_layout,
                       std::vector<cnum>(md * td * md * td, cnum(0))};
        for (std::size_t a = 0; a < md; ++a) {
            const PrepRule* rule = nullptr;
            for (const auto& prep : step.preps)
                if (prep.target_register == target_name &&
                    prep.outcome == memory.labels[a])
                    rule = &prep;
            if (rule) {
                const LinearMap u = reset_unitary(target, src, rule->state);
                for (std::size_t i = 0; i < td; ++i)
                    for (std::size_t j = 0; j < td; ++j)
                        ctrl.at(a * td + i, a * td + j) = u.at(i, j);
            } else {
                for (std::size_t i = 0; i < td; ++i) ctrl.at(a * td + i, a * td + i) = cnum(1);
            }
        }
        state = apply(embed(ctrl, {memory.name, target_name}, state.layout), state);
    }
}

}  // namespace

void execute_scenario_step(StateVector& state, const Scenario& sc, std::size_t step_index,
                           Policy policy, const std::string* choice) {
    const Step& step = sc.steps.at(step_index);
    const Measurement& m = step.measurement;
    Register memory{m.agent, m.outcome_labels()};
    if (policy == Policy::Unitary) {
        const DilationRecord d = dilate(m, state.layout, m.agent);
        state = apply(d.isometry, state);
    } else {
        if (!choice)
            throw ValidationError("collapse step '" + step.time + "' needs an outcome choice");
        state = collapse(state, m, *choice);
        auto [layout, recorded] = extend(state, memory, *choice);
        state = std::move(recorded);
    }
    if (!step.preps.empty()) apply_preps(state, sc, step, memory);
}

Trace run(const Scenario& sc, const RunOptions& opts) {
    sc.validate();
    std::optional<std::size_t> halt_index;
    if (opts.halt_at) halt_index = sc.step_index_by_time(*opts.halt_at);
    for (const auto& [time, policy] : opts.overrides) sc.step_index_by_time(time);

    Trace trace{sc.initial, {}};
    StateVector state = sc.initial;
    for (std::size_t i = 0; i < sc.steps.size(); ++i) {
        if (halt_index && i > *halt_index) break;
        const Step& step = sc.steps[i];
        Policy policy = step.policy;
        if (auto it = opts.overrides.find(step.time); it != opts.overrides.end())
            policy = it->second;
        const std::string* choice = nullptr;
        if (policy == Policy::Collapse) {
            auto it = opts.collapse_choices.find(step.time);
            if (it == opts.collapse_choices.end())
                throw ValidationError("no collapse choice given for step '" + step.time + "'");
            choice = &it->second;
        }
        execute_scenario_step(state, sc, i, policy, choice);
        trace.points.push_back({i, step.time, step.until, state});
    }
    return trace;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<std::string> sample_run(const Scenario& sc, std::uint64_t seed,
                                    std::uint64_t index) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(index + 1)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // Steps whose records a later step measures over must stay coherent, so
    // only the surviving records are sampled; everything else runs unitarily.
    const std::vector<std::string> sampled =
        default_branch_registers(sc, sc.steps.size());
    StateVector state = sc.initial;
    std::vector<std::string> outcomes;
    for (std::size_t si = 0; si < sc.steps.size(); ++si) {
        if (std::find(sampled.begin(), sampled.end(), sc.steps[si].measurement.agent) ==
            sampled.end()) {
            execute_scenario_step(state, sc, si, Policy::Unitary, nullptr);
            continue;
        }
        const OutcomeDistribution dist = born_distribution(state, sc.steps[si].measurement);
        const double u = unif(rng);
        double acc = 0.0;
        std::string choice = dist.entries.back().first;
        for (const auto& [label, p] : dist.entries) {
            acc += p;
            if (u < acc) {
                choice = label;
                break;
            }
        }
        execute_scenario_step(state, sc, si, Policy::Collapse, &choice);
        outcomes.push_back(choice);
    }
    return outcomes;
}

const std::string& Branch::label_of(const std::string& reg) const {
    for (const auto& [r, l] : labels)
        if (r == reg) return l;
    throw LayoutError("branch carries no label for register '" + reg + "'");
}

bool Branch::has_label(const std::string& reg) const {
    for (const auto& [r, l] : labels)
        if (r == reg) return true;
    return false;
}

std::vector<Branch> branches(const StateVector& state,
                             const std::vector<std::string>& memory_registers) {
    std::vector<std::size_t> pos;
    std::vector<std::size_t> dims;
    for (const auto& name : memory_registers) {
        pos.push_back(state.layout.register_index(name));
        dims.push_back(state.layout.reg(pos.back()).dim());
    }
    std::size_t combos = 1;
    for (const std::size_t d : dims) combos *= d;

    std::vector<Branch> out;
    std::vector<std::size_t> digits(pos.size(), 0);
    for (std::size_t c = 0; c < combos; ++c) {
        // component with the memory digits pinned
        std::vector<cnum> comp(state.dim(), cnum(0));
        double w = 0.0;
        for (std::size_t idx = 0; idx < state.dim(); ++idx) {
            bool match = true;
            for (std::size_t k = 0; k < pos.size(); ++k) {
                if ((idx / state.layout.stride(pos[k])) % dims[k] != digits[k]) {
                    match = false;
                    break;
                }
            }
            if (match) {
                comp[idx] = state.amps[idx];
                w += std::norm(state.amps[idx]);
            }
        }
        if (w > kPruneTol) {
            // phase convention: first clearly nonzero residual amplitude real positive
            const double floor = 1e-6 * std::sqrt(w);
            cnum phase(1);
            for (std::size_t idx = 0; idx < comp.size(); ++idx) {
                if (std::abs(comp[idx]) > floor) {
                    phase = comp[idx] / std::abs(comp[idx]);
                    break;
                }
            }
            Branch b;
            b.amplitude = phase * std::sqrt(w);
            for (std::size_t k = 0; k < pos.size(); ++k)
                b.labels.emplace_back(memory_registers[k],
                                      state.layout.reg(pos[k]).labels[digits[k]]);
            out.push_back(std::move(b));
        }
        // lexicographic in label order, last register fastest
        for (std::size_t k = pos.size(); k-- > 0;) {
            if (++digits[k] < dims[k]) break;
            digits[k] = 0;
        }
    }
    return out;
}

std::vector<std::string> default_branch_registers(const Scenario& sc, std::size_t executed) {
    std::vector<std::string> out;
    executed = std::min(executed, sc.steps.size());
    for (std::size_t i = 0; i < executed; ++i) {
        const std::string& mem = sc.steps[i].measurement.agent;
        bool remeasured = false;
        for (std::size_t j = i + 1; j < executed && !remeasured; ++j) {
            const auto& targets = sc.steps[j].measurement.targets;
            remeasured = std::find(targets.begin(), targets.end(), mem) != targets.end();
        }
        if (!remeasured) out.push_back(mem);
    }
    return out;
}

std::map<std::vector<std::string>, double> joint_memory_distribution(
    const StateVector& state, const std::vector<std::string>& regs) {
    std::vector<std::size_t> pos;
    std::vector<std::size_t> dims;
    for (const auto& name : regs) {
        pos.push_back(state.layout.register_index(name));
        dims.push_back(state.layout.reg(pos.back()).dim());
    }
    std::map<std::vector<std::string>, double> out;
    std::size_t combos = 1;
    for (const std::size_t d : dims) combos *= d;
    std::vector<std::size_t> digits(pos.size(), 0);
    for (std::size_t c = 0; c < combos; ++c) {
        std::vector<std::pair<std::string, std::string>> records;
        std::vector<std::string> key;
        for (std::size_t k = 0; k < pos.size(); ++k) {
            const std::string& label = state.layout.reg(pos[k]).labels[digits[k]];
            records.emplace_back(regs[k], label);
            key.push_back(label);
        }
        out[key] = rs_pointer_joint(state, records);
        for (std::size_t k = pos.size(); k-- > 0;) {
            if (++digits[k] < dims[k]) break;
            digits[k] = 0;
        }
    }
    return out;
}

Scenario build_fr() {
    const Register R{"R", {"h", "t"}};
    const Register S{"S", {"-1/2", "+1/2"}};
    SpaceLayout layout(std::vector<Register>{R, S});

    const double c_h = 1.0 / std::sqrt(3.0);
    const double c_t = std::sqrt(2.0 / 3.0);
    const StateVector initial = superpose(
        layout, {{c_h, {{"R", "h"}, {"S", "-1/2"}}}, {c_t, {{"R", "t"}, {"S", "-1/2"}}}});

    SpaceLayout s_only(std::vector<Register>{S});
    const StateVector down = basis_state(s_only, {{"S", "-1/2"}});
    const double r2 = 1.0 / std::sqrt(2.0);
    const StateVector right =
        superpose(s_only, {{r2, {{"S", "-1/2"}}}, {r2, {{"S", "+1/2"}}}});

    Scenario sc;
    sc.layout = layout;
    sc.initial = initial;

    // n:00  Fbar tosses the biased coin and prepares S by outcome
    SpaceLayout r_only(std::vector<Register>{R});
    Step s00;
    s00.time = "n:00";
    s00.until = derive_until(s00.time);
    s00.measurement = pointer_measurement(r_only, "R", "Fbar");
    s00.preps.push_back({"h", "S", "down", down});
    s00.preps.push_back({"t", "S", "right", right});
    sc.steps.push_back(std::move(s00));

    // n:10  F measures the spin
    Step s10;
    s10.time = "n:10";
    s10.until = derive_until(s10.time);
    s10.measurement = pointer_measurement(s_only, "S", "F");
    sc.steps.push_back(std::move(s10));

    // n:20  Wbar measures the whole lab Lbar = (R, Fbar) in the ok/fail basis
    const Register Fbar_mem{"Fbar", {"h", "t"}};
    SpaceLayout lbar(std::vector<Register>{R, Fbar_mem});
    const StateVector okbar = superpose(
        lbar, {{r2, {{"R", "h"}, {"Fbar", "h"}}}, {-r2, {{"R", "t"}, {"Fbar", "t"}}}});
    const StateVector failbar = superpose(
        lbar, {{r2, {{"R", "h"}, {"Fbar", "h"}}}, {r2, {{"R", "t"}, {"Fbar", "t"}}}});
    Step s20;
    s20.time = "n:20";
    s20.until = derive_until(s20.time);
    s20.measurement = make_completed_measurement(
        "Wbar", {{"ok", {okbar}}, {"fail", {failbar}}});
    sc.steps.push_back(std::move(s20));

    // n:30  W measures the lab L = (S, F)
    const Register F_mem{"F", {"-1/2", "+1/2"}};
    SpaceLayout l(std::vector<Register>{S, F_mem});
    const StateVector ok = superpose(
        l, {{r2, {{"S", "-1/2"}, {"F", "-1/2"}}}, {-r2, {{"S", "+1/2"}, {"F", "+1/2"}}}});
    const StateVector fail = superpose(
        l, {{r2, {{"S", "-1/2"}, {"F", "-1/2"}}}, {r2, {{"S", "+1/2"}, {"F", "+1/2"}}}});
    Step s30;
    s30.time = "n:30";
    s30.until = derive_until(s30.time);
    s30.measurement = make_completed_measurement("W", {{"ok", {ok}}, {"fail", {fail}}});
    sc.steps.push_back(std::move(s30));

    sc.comms.push_back({"n:21", "Wbar", "W"});
    sc.validate();
    return sc;
}

}  // namespace wf
