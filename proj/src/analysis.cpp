#include "wf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace wf {

namespace {

std::vector<std::string> step_footprint(const Step& step) {
    std::vector<std::string> regs = step.measurement.targets;
    for (const auto& prep : step.preps) regs.push_back(prep.target_register);
    return regs;
}

// Steps whose measurement reads another step's record in a basis that is not
// aligned with that record's pointer states.
std::string encapsulation_note(const Scenario& sc) {
    std::string note;
    for (const auto& outer : sc.steps) {
        for (const auto& target : outer.measurement.targets) {
            for (const auto& inner : sc.steps) {
                if (inner.measurement.agent != target) continue;
                if (product_pointer_check(outer.measurement, inner.measurement, target))
                    continue;
                if (!note.empty()) note += "; ";
                note += outer.measurement.agent + " reads " + target +
                        "'s record in a non-pointer basis";
            }
        }
    }
    return note;
}

OutcomeDistribution collapse_conditional(const Scenario& sc, std::size_t cond_step,
                                         const std::string& outcome,
                                         std::size_t target_step) {
    StateVector state = sc.initial;
    if (target_step > cond_step) {
        for (std::size_t k = 0; k < target_step; ++k) {
            if (k == cond_step)
                execute_scenario_step(state, sc, k, Policy::Collapse, &outcome);
            else
                execute_scenario_step(state, sc, k, Policy::Unitary, nullptr);
        }
        return born_distribution(state, sc.steps[target_step].measurement);
    }
    for (std::size_t k = 0; k <= cond_step; ++k) {
        if (k == cond_step)
            execute_scenario_step(state, sc, k, Policy::Collapse, &outcome);
        else
            execute_scenario_step(state, sc, k, Policy::Unitary, nullptr);
    }
    return born_distribution(
        state, pointer_measurement(state.layout, sc.steps[target_step].measurement.agent));
}

}  // namespace

ComparisonReport compare_semantics(const Scenario& sc, const ConditioningSpec& spec) {
    const std::size_t cond_step = sc.step_index_by_agent(spec.agent);
    std::size_t target_step;
    if (spec.target_agent) {
        target_step = sc.step_index_by_agent(*spec.target_agent);
    } else {
        if (sc.steps.size() < 2)
            throw ValidationError("comparison needs a second step to predict");
        target_step = sc.steps.size() - 1;
        if (target_step == cond_step) --target_step;
    }
    if (target_step == cond_step)
        throw ValidationError("comparison target must differ from the conditioning step");

    const OutcomeDistribution p = collapse_conditional(sc, cond_step, spec.outcome, target_step);

    const Trace trace = run(sc);
    const StateVector& final_state = trace.final_state();
    const std::string& target_mem = sc.steps[target_step].measurement.agent;
    const std::string note = encapsulation_note(sc);

    ComparisonReport report;
    for (const auto& label : sc.steps[target_step].measurement.outcome_labels()) {
        ComparisonRow row;
        row.conditioning = spec.agent + "=" + spec.outcome;
        row.target = target_mem + "=" + label;
        row.p_collapse = p.at(label);
        row.q_relative_state =
            rs_conditional(final_state, {spec.agent, spec.outcome}, {target_mem, label});
        row.agree = std::abs(row.p_collapse - row.q_relative_state) <= kAgreeTol;
        row.note = note;
        report.rows.push_back(std::move(row));
    }
    return report;
}

ClarificationReport clarify_conditionals() {
    const Scenario sc = build_fr();
    const std::size_t w_step = sc.step_index_by_agent("W");

    ClarificationReport rep;

    // collapse route: condition Fbar's record on tails when it is made,
    // evolve, ask for W's distribution
    rep.p_ok_given_t = collapse_conditional(sc, sc.step_index_by_agent("Fbar"), "t", w_step)
                           .at("ok");

    // relative-state route: run through Wbar's measurement, then take the
    // joint of a heads/tails query on the whole lab (R, Fbar) with W's outcome
    RunOptions halt;
    halt.halt_at = "n:21";
    const StateVector phi = run(sc, halt).final_state();

    SpaceLayout lbar(std::vector<Register>{phi.layout.reg("R"), phi.layout.reg("Fbar")});
    const StateVector tt = basis_state(lbar, {{"R", "t"}, {"Fbar", "t"}});
    const ProjectorEvent lab_t{{"R", "Fbar"}, projector({tt})};

    const Measurement& w_meas = sc.steps[w_step].measurement;
    auto w_event = [&](const std::string& label) {
        const auto& vecs = w_meas.outcomes[w_meas.outcome_index(label)].vectors;
        return ProjectorEvent{w_meas.targets, projector(vecs)};
    };
    rep.q_joint_ok_t = rs_joint(phi, {lab_t, w_event("ok")});
    rep.q_joint_fail_t = rs_joint(phi, {lab_t, w_event("fail")});
    rep.t_mass = rep.q_joint_ok_t + rep.q_joint_fail_t;
    rep.q_ok_given_t = rep.q_joint_ok_t / rep.t_mass;

    // two-time joint: Fbar's record when made vs. the final lab re-query
    const StateVector hh = basis_state(lbar, {{"R", "h"}, {"Fbar", "h"}});
    const Measurement requery =
        make_completed_measurement("Lbar", {{"h", {hh}}, {"t", {tt}}});
    const OutcomeDistribution coin = born_distribution(sc.initial, sc.steps[0].measurement);
    for (const auto& [record, p_record] : coin.entries) {
        RunOptions opts;
        opts.halt_at = "n:21";
        opts.overrides["n:00"] = Policy::Collapse;
        opts.collapse_choices["n:00"] = record;
        const StateVector branch = run(sc, opts).final_state();
        const OutcomeDistribution redo = born_distribution(branch, requery);
        for (const auto& [again, p_again] : redo.entries)
            rep.record_vs_requery[{record, again}] = p_record * p_again;
    }

    rep.report.rows.push_back({"Fbar=t (record, at measurement time)", "W=ok",
                               rep.p_ok_given_t, rep.q_ok_given_t,
                               std::abs(rep.p_ok_given_t - rep.q_ok_given_t) <= kAgreeTol,
                               "relative-state side conditions a post-Wbar lab re-query"});
    return rep;
}

LabBasisExpansion lab_basis_expansion(const StateVector& phi) {
    for (const char* name : {"R", "S", "Fbar", "F", "Wbar"})
        if (!phi.layout.has_register(name))
            throw ValidationError(
                std::string("lab_basis_expansion: state lacks register '") + name + "'");
    if (phi.layout.registers().size() != 5)
        throw ValidationError("lab_basis_expansion: unexpected extra registers");

    const double r2 = 1.0 / std::sqrt(2.0);
    LabBasisExpansion out;
    std::vector<StateVector> basis;
    for (const std::string coin : {"h", "t"}) {
        for (const std::string wbar : {"ok", "fail"}) {
            for (const std::string lab : {"ok", "fail"}) {
                const double sign = lab == "ok" ? -1.0 : 1.0;
                const StateVector vec = superpose(
                    phi.layout,
                    {{r2,
                      {{"R", coin}, {"Fbar", coin}, {"S", "-1/2"}, {"F", "-1/2"},
                       {"Wbar", wbar}}},
                     {sign * r2,
                      {{"R", coin}, {"Fbar", coin}, {"S", "+1/2"}, {"F", "+1/2"},
                       {"Wbar", wbar}}}});
                out.terms.push_back({coin, wbar, lab, inner(vec, phi)});
                basis.push_back(vec);
            }
        }
    }

    double norm2 = 0.0;
    StateVector residual = phi;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        norm2 += std::norm(out.terms[i].coefficient);
        for (std::size_t k = 0; k < residual.amps.size(); ++k)
            residual.amps[k] -= out.terms[i].coefficient * basis[i].amps[k];
    }
    out.norm = std::sqrt(norm2);
    out.recontract_error = residual.norm();
    return out;
}

double order_invariance(const Scenario& sc, std::size_t step_a, std::size_t step_b) {
    if (step_a == step_b) return 0.0;
    const auto fa = step_footprint(sc.steps.at(step_a));
    const auto fb = step_footprint(sc.steps.at(step_b));
    for (const auto& r : fa)
        if (std::find(fb.begin(), fb.end(), r) != fb.end())
            throw ValidationError("order_invariance: steps share register '" + r + "'");

    Scenario swapped = sc;
    std::swap(swapped.steps[step_a], swapped.steps[step_b]);
    std::swap(swapped.steps[step_a].time, swapped.steps[step_b].time);
    std::swap(swapped.steps[step_a].until, swapped.steps[step_b].until);
    swapped.validate();

    RunOptions all_unitary;
    for (const auto& step : sc.steps) all_unitary.overrides[step.time] = Policy::Unitary;
    RunOptions all_unitary_swapped;
    for (const auto& step : swapped.steps)
        all_unitary_swapped.overrides[step.time] = Policy::Unitary;

    std::vector<std::string> memories;
    for (const auto& step : sc.steps) memories.push_back(step.measurement.agent);

    const auto d1 =
        joint_memory_distribution(run(sc, all_unitary).final_state(), memories);
    const auto d2 =
        joint_memory_distribution(run(swapped, all_unitary_swapped).final_state(), memories);

    double max_dev = 0.0;
    for (const auto& [key, p] : d1) {
        const auto it = d2.find(key);
        const double q = it == d2.end() ? 0.0 : it->second;
        max_dev = std::max(max_dev, std::abs(p - q));
    }
    for (const auto& [key, q] : d2)
        if (!d1.count(key)) max_dev = std::max(max_dev, std::abs(q));
    return max_dev;
}

EmpiricalDistribution mc_sample(const Scenario& sc, std::uint64_t n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("mc_sample: need at least one sample");
    EmpiricalDistribution dist;
    dist.n = n;
    dist.seed = seed;
    for (std::uint64_t i = 0; i < n; ++i) ++dist.counts[sample_run(sc, seed, i)];
    return dist;
}

}  // namespace wf
