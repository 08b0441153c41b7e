#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wf/semantics.hpp"

namespace wf {

enum class Policy { Unitary, Collapse };

std::string policy_name(Policy p);
Policy parse_policy(const std::string& name);

// Outcome-conditioned preparation of another register. Realized as a
// controlled unitary mapping the register's initial basis state to `state`,
// keyed on the step's memory record.
struct PrepRule {
    std::string outcome;
    std::string target_register;
    std::string state_name;  // for reports/serialization
    StateVector state;       // on the target register alone
};

struct Step {
    std::string time;   // begin tag, e.g. "n:00"
    std::string until;  // end tag, e.g. "n:01"
    Measurement measurement;
    Policy policy = Policy::Unitary;
    std::vector<PrepRule> preps;
};

struct Comm {
    std::string time;
    std::string from;
    std::string to;
};

struct Scenario {
    SpaceLayout layout;      // declared system registers only
    StateVector initial;
    std::vector<Step> steps; // strictly increasing times
    std::vector<Comm> comms;

    std::size_t step_index_by_agent(const std::string& agent) const;
    std::size_t step_index_by_time(const std::string& time) const;  // begin or end tag
    void validate() const;
};

// End tag derived from a begin tag: trailing digit 0-8 incremented,
// otherwise the begin tag itself.
std::string derive_until(const std::string& time);

struct RunOptions {
    std::map<std::string, Policy> overrides;          // by step begin time
    std::optional<std::string> halt_at;               // begin or end tag; inclusive
    std::map<std::string, std::string> collapse_choices;  // by step begin time
};

struct TracePoint {
    std::size_t step_index;
    std::string time;
    std::string until;
    StateVector state;  // global state after the tick
};

struct Trace {
    StateVector initial;
    std::vector<TracePoint> points;

    const StateVector& final_state() const {
        return points.empty() ? initial : points.back().state;
    }
    std::size_t executed() const { return points.size(); }
};

Trace run(const Scenario& sc, const RunOptions& opts = {});

// Applies one step of the protocol to a global state: dilation under the
// unitary policy, projection plus memory record under collapse (choice
// required), then any outcome-conditioned preparations.
void execute_scenario_step(StateVector& state, const Scenario& sc, std::size_t step_index,
                           Policy policy, const std::string* choice);

// One sampled protocol run. Steps whose records a later step measures over
// are encapsulated and run unitarily; every other step samples its outcome
// from the Born distribution of the current state and collapses on it. The
// tuple lists sampled outcomes in step order. Randomness is derived from
// (seed, index) only.
std::vector<std::string> sample_run(const Scenario& sc, std::uint64_t seed,
                                    std::uint64_t index);

// One term of the global state expanded in the product of the given memory
// registers' outcome bases. The residual factor is normalized with its first
// nonzero amplitude real positive, so the branch amplitude carries the phase.
struct Branch {
    cnum amplitude;
    std::vector<std::pair<std::string, std::string>> labels;  // register -> label, in call order
    std::map<std::string, std::string> annotations;           // agent -> annotation text

    double weight() const { return std::norm(amplitude); }
    const std::string& label_of(const std::string& reg) const;
    bool has_label(const std::string& reg) const;
};

std::vector<Branch> branches(const StateVector& state,
                             const std::vector<std::string>& memory_registers);

// Memories of executed steps that were not later measured over: the registers
// whose records are still classically sharp.
std::vector<std::string> default_branch_registers(const Scenario& sc, std::size_t executed);

// Analytic joint distribution over the given memory registers, keyed by
// outcome labels in the given register order. Includes zero-weight entries.
std::map<std::vector<std::string>, double> joint_memory_distribution(
    const StateVector& state, const std::vector<std::string>& regs);

// The built-in extended Wigner's-friend protocol: biased coin R, spin S,
// friends Fbar/F inside their labs, outside observers Wbar/W measuring whole
// labs in ok/fail bases, one communication Wbar -> W.
Scenario build_fr();

}  // namespace wf
