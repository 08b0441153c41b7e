#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wf/scenario.hpp"

namespace wf {

enum class Polarity { Certain, CertainNot };
enum class Rule { Q, C, Observation };

std::string polarity_name(Polarity p);
std::string rule_name(Rule r);

// "Agent `holder`, on branches where `cond_register` reads `cond_label`, is
// certain (or certain-not) that step `target_step` has outcome
// `target_outcome`."
struct CertaintyStatement {
    std::string holder;
    std::string time;          // when the statement becomes held
    std::string cond_register; // memory register the belief keys on
    std::string cond_label;
    std::size_t target_step;
    std::string target_outcome;
    Polarity polarity;
    Rule provenance;
    std::vector<std::size_t> parents;  // indices into the ledger

    bool same_claim(const CertaintyStatement& o) const {
        return holder == o.holder && cond_register == o.cond_register &&
               cond_label == o.cond_label && target_step == o.target_step &&
               target_outcome == o.target_outcome && polarity == o.polarity;
    }
};

struct Ledger {
    std::vector<CertaintyStatement> statements;
};

// Outcome distribution for `target_step` predicted by `agent` after finding
// `own_outcome`, evaluated in the halted experiment: the agent's own step is
// collapsed on the outcome, every other relevant step runs unitarily, and the
// run stops before any step that would disturb the target observable (a step
// touching the target's registers whose own record is not part of them).
// For target steps earlier than the agent's, the target memory register is
// read out instead (retrodiction).
OutcomeDistribution q_halted_distribution(const Scenario& sc, std::size_t agent_step,
                                          const std::string& own_outcome,
                                          std::size_t target_step);

// The alternate evaluation: relative-state conditional on the full unitary
// run (the jointly observable statistics at the latest time). Reported next
// to the halted value, never substituted for it.
OutcomeDistribution q_fullrun_distribution(const Scenario& sc, std::size_t agent_step,
                                           const std::string& own_outcome,
                                           std::size_t target_step);

// Rule Q: certainty from probability 1, certainty-not from probability 0.
std::optional<CertaintyStatement> certainty_Q(const Scenario& sc, std::size_t agent_step,
                                              const std::string& own_outcome,
                                              std::size_t target_step);

// All rule-Q statements over outcome/target pairs with nonzero own-outcome
// probability.
Ledger build_q_ledger(const Scenario& sc);

// Closure under rule C (transitivity of certainty) plus communication
// transport. Idempotent at fixpoint.
Ledger chain_certainty(Ledger ledger, const Scenario& sc);

struct Violation {
    std::size_t branch_index;
    std::vector<std::pair<std::string, std::string>> branch_labels;
    std::string agent;
    std::string held;      // e.g. "certain W = fail"
    std::string conflict;  // e.g. "observes W = ok"
};

// Rule S check: per branch, per agent, reports {certain v, certain-not v}
// pairs and certainties contradicted by the agent's own recorded outcome.
std::vector<Violation> check_single_value(const std::vector<Branch>& branches,
                                          const Ledger& ledger, const Scenario& sc);

// Per-agent annotation text, derived purely from the branch's
// memory labels and the closed ledger.
void annotate_branches(std::vector<Branch>& branches, const Ledger& ledger,
                       const Scenario& sc);

std::string describe_statement(const CertaintyStatement& st, const Scenario& sc);

}  // namespace wf
