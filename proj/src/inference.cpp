#include "wf/inference.hpp"

#include <algorithm>
#include <set>

namespace wf {

std::string polarity_name(Polarity p) {
    return p == Polarity::Certain ? "certain" : "certain-not";
}

std::string rule_name(Rule r) {
    switch (r) {
        case Rule::Q: return "Q";
        case Rule::C: return "C";
        case Rule::Observation: return "observation";
    }
    return "?";
}

namespace {

bool acts_on(const Step& step, const std::vector<std::string>& registers) {
    for (const auto& t : step.measurement.targets)
        if (std::find(registers.begin(), registers.end(), t) != registers.end()) return true;
    return false;
}

bool memory_within(const Step& step, const std::vector<std::string>& registers) {
    return std::find(registers.begin(), registers.end(), step.measurement.agent) !=
           registers.end();
}

}  // namespace

OutcomeDistribution q_halted_distribution(const Scenario& sc, std::size_t agent_step,
                                          const std::string& own_outcome,
                                          std::size_t target_step) {
    if (agent_step == target_step)
        throw ValidationError("certainty target must differ from the agent's own step");
    StateVector state = sc.initial;
    if (target_step > agent_step) {
        // prediction: collapse own outcome, run intermediate steps unitarily,
        // stop before any step that disturbs the target observable
        for (std::size_t k = 0; k < target_step; ++k) {
            if (k == agent_step) {
                execute_scenario_step(state, sc, k, Policy::Collapse, &own_outcome);
                continue;
            }
            if (k > agent_step) {
                const Step& step = sc.steps[k];
                const auto& target_regs = sc.steps[target_step].measurement.targets;
                if (acts_on(step, target_regs) && !memory_within(step, target_regs))
                    break;  // experiment stopped before the disturbing step
            }
            execute_scenario_step(state, sc, k, Policy::Unitary, nullptr);
        }
        return born_distribution(state, sc.steps[target_step].measurement);
    }
    // retrodiction: run through the agent's own step, read the target memory
    for (std::size_t k = 0; k <= agent_step; ++k) {
        if (k == agent_step)
            execute_scenario_step(state, sc, k, Policy::Collapse, &own_outcome);
        else
            execute_scenario_step(state, sc, k, Policy::Unitary, nullptr);
    }
    const Measurement readout =
        pointer_measurement(state.layout, sc.steps[target_step].measurement.agent);
    return born_distribution(state, readout);
}

OutcomeDistribution q_fullrun_distribution(const Scenario& sc, std::size_t agent_step,
                                           const std::string& own_outcome,
                                           std::size_t target_step) {
    const Trace trace = run(sc);
    const StateVector& final = trace.final_state();
    const std::string& own_mem = sc.steps[agent_step].measurement.agent;
    const std::string& target_mem = sc.steps[target_step].measurement.agent;
    OutcomeDistribution dist;
    for (const auto& label : final.layout.reg(target_mem).labels)
        dist.entries.emplace_back(
            label, rs_conditional(final, {own_mem, own_outcome}, {target_mem, label}));
    dist.validate();
    return dist;
}

std::optional<CertaintyStatement> certainty_Q(const Scenario& sc, std::size_t agent_step,
                                              const std::string& own_outcome,
                                              std::size_t target_step) {
    const OutcomeDistribution dist =
        q_halted_distribution(sc, agent_step, own_outcome, target_step);
    CertaintyStatement st;
    st.holder = sc.steps[agent_step].measurement.agent;
    st.time = sc.steps[agent_step].until;
    st.cond_register = st.holder;
    st.cond_label = own_outcome;
    st.target_step = target_step;
    st.provenance = Rule::Q;
    for (const auto& [label, p] : dist.entries) {
        if (p >= 1.0 - kTol) {
            st.target_outcome = label;
            st.polarity = Polarity::Certain;
            return st;
        }
    }
    for (const auto& [label, p] : dist.entries) {
        if (p <= kTol) {
            st.target_outcome = label;
            st.polarity = Polarity::CertainNot;
            return st;
        }
    }
    return std::nullopt;
}

Ledger build_q_ledger(const Scenario& sc) {
    const Trace trace = run(sc);
    const StateVector& final = trace.final_state();
    Ledger ledger;
    for (std::size_t i = 0; i < sc.steps.size(); ++i) {
        const std::string& agent = sc.steps[i].measurement.agent;
        for (const auto& outcome : sc.steps[i].measurement.outcome_labels()) {
            if (rs_pointer_joint(final, {{agent, outcome}}) <= kTol) continue;
            for (std::size_t j = 0; j < sc.steps.size(); ++j) {
                if (j == i) continue;
                try {
                    if (auto st = certainty_Q(sc, i, outcome, j))
                        ledger.statements.push_back(std::move(*st));
                } catch (const Error&) {
                    // target not evaluable from this vantage point
                }
            }
        }
    }
    return ledger;
}

Ledger chain_certainty(Ledger ledger, const Scenario& sc) {
    // provenance stays acyclic: parents always precede their derivations
    for (std::size_t i = 0; i < ledger.statements.size(); ++i)
        for (const std::size_t p : ledger.statements[i].parents)
            if (p >= i) throw ValidationError("chain_certainty: cycle in provenance");

    auto exists = [&](const CertaintyStatement& st) {
        for (const auto& s : ledger.statements)
            if (s.same_claim(st)) return true;
        return false;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        const std::size_t n = ledger.statements.size();
        // rule C: X certain that Y's outcome is v, and Y on outcome v is
        // certain of something, so X is certain of it too
        for (std::size_t i1 = 0; i1 < n; ++i1) {
            const CertaintyStatement s1 = ledger.statements[i1];
            if (s1.polarity != Polarity::Certain) continue;
            const std::string& y = sc.steps[s1.target_step].measurement.agent;
            for (std::size_t i2 = 0; i2 < n; ++i2) {
                const CertaintyStatement s2 = ledger.statements[i2];
                if (s2.holder != y || s2.cond_register != y) continue;
                if (s2.cond_label != s1.target_outcome) continue;
                CertaintyStatement derived;
                derived.holder = s1.holder;
                derived.time = std::max(s1.time, s2.time);
                derived.cond_register = s1.cond_register;
                derived.cond_label = s1.cond_label;
                derived.target_step = s2.target_step;
                derived.target_outcome = s2.target_outcome;
                derived.polarity = s2.polarity;
                derived.provenance = Rule::C;
                derived.parents = {i1, i2};
                if (!exists(derived)) {
                    ledger.statements.push_back(std::move(derived));
                    changed = true;
                }
            }
        }
        // communications: the receiver learns the sender's outcome-keyed
        // statements, still keyed on the sender's record
        for (const auto& comm : sc.comms) {
            const std::size_t n2 = ledger.statements.size();
            for (std::size_t i = 0; i < n2; ++i) {
                const CertaintyStatement s = ledger.statements[i];
                if (s.holder != comm.from || s.cond_register != comm.from) continue;
                CertaintyStatement derived = s;
                derived.holder = comm.to;
                derived.time = std::max(s.time, comm.time);
                derived.provenance = Rule::C;
                derived.parents = {i};
                if (!exists(derived)) {
                    ledger.statements.push_back(std::move(derived));
                    changed = true;
                }
            }
        }
    }
    return ledger;
}

namespace {

std::vector<const CertaintyStatement*> active_beliefs(const Branch& branch,
                                                      const Ledger& ledger,
                                                      const std::string& agent) {
    std::vector<const CertaintyStatement*> out;
    for (const auto& st : ledger.statements) {
        if (st.holder != agent) continue;
        if (!branch.has_label(st.cond_register)) continue;
        if (branch.label_of(st.cond_register) != st.cond_label) continue;
        out.push_back(&st);
    }
    return out;
}

}  // namespace

std::string describe_statement(const CertaintyStatement& st, const Scenario& sc) {
    const std::string& target_agent = sc.steps[st.target_step].measurement.agent;
    return st.holder + " | " + st.cond_register + "=" + st.cond_label + " => " +
           polarity_name(st.polarity) + " " + target_agent + " = " + st.target_outcome +
           " [" + rule_name(st.provenance) + ", " + st.time + "]";
}

std::vector<Violation> check_single_value(const std::vector<Branch>& branches,
                                          const Ledger& ledger, const Scenario& sc) {
    std::vector<Violation> out;
    std::set<std::string> agents;
    for (const auto& st : ledger.statements) agents.insert(st.holder);
    for (const auto& step : sc.steps) agents.insert(step.measurement.agent);

    for (std::size_t bi = 0; bi < branches.size(); ++bi) {
        const Branch& branch = branches[bi];
        for (const auto& agent : agents) {
            const auto beliefs = active_beliefs(branch, ledger, agent);
            auto desc = [&](const CertaintyStatement& st) {
                return polarity_name(st.polarity) + " " +
                       sc.steps[st.target_step].measurement.agent + " = " + st.target_outcome;
            };
            // pairwise certain / certain-not conflicts
            for (std::size_t a = 0; a < beliefs.size(); ++a) {
                for (std::size_t b = a + 1; b < beliefs.size(); ++b) {
                    const auto& s1 = *beliefs[a];
                    const auto& s2 = *beliefs[b];
                    if (s1.target_step == s2.target_step &&
                        s1.target_outcome == s2.target_outcome &&
                        s1.polarity != s2.polarity) {
                        out.push_back({bi, branch.labels, agent, desc(s1), desc(s2)});
                    }
                }
            }
            // certainty vs the agent's own recorded outcome
            if (!branch.has_label(agent)) continue;
            std::size_t own_step;
            try {
                own_step = sc.step_index_by_agent(agent);
            } catch (const LayoutError&) {
                continue;
            }
            const std::string& observed = branch.label_of(agent);
            for (const auto* st : beliefs) {
                if (st->target_step != own_step) continue;
                const bool conflict =
                    (st->polarity == Polarity::Certain && st->target_outcome != observed) ||
                    (st->polarity == Polarity::CertainNot && st->target_outcome == observed);
                if (conflict)
                    out.push_back({bi, branch.labels, agent, desc(*st),
                                   "observes " + agent + " = " + observed});
            }
        }
    }
    return out;
}

void annotate_branches(std::vector<Branch>& branches, const Ledger& ledger,
                       const Scenario& sc) {
    for (auto& branch : branches) {
        branch.annotations.clear();
        for (const auto& [reg, label] : branch.labels) {
            std::string text = label;
            std::vector<std::string> notes;
            for (const auto* st : active_beliefs(branch, ledger, reg)) {
                std::string note = polarity_name(st->polarity) + " " +
                                   sc.steps[st->target_step].measurement.agent + " = " +
                                   st->target_outcome;
                if (std::find(notes.begin(), notes.end(), note) == notes.end())
                    notes.push_back(std::move(note));
            }
            if (notes.empty()) {
                text += ", no conclusion";
            } else {
                for (const auto& note : notes) text += "; " + note;
            }
            branch.annotations[reg] = text;
        }
    }
}

}  // namespace wf
