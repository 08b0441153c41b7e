#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wf/scenario.hpp"

namespace wf {

// One p-vs-q row: the collapse-calculus conditional against the
// relative-state conditional for the same events.
struct ComparisonRow {
    std::string conditioning;  // e.g. "Fbar=t"
    std::string target;        // e.g. "W=ok"
    double p_collapse;
    double q_relative_state;
    bool agree;  // |p - q| <= kAgreeTol
    std::string note;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
};

inline constexpr double kAgreeTol = 1e-10;

struct ConditioningSpec {
    std::string agent;    // whose record conditions
    std::string outcome;  // its value
    std::optional<std::string> target_agent;  // defaults to the last other step
};

// Tabulates, for every outcome of the target step, the collapse conditional
// (condition at measurement time, evolve, Born rule) against the
// relative-state conditional on the records of the full unitary run. Notes
// flag measurements that read another agent's record in a non-pointer basis,
// which is exactly when the two calculi may part ways.
ComparisonReport compare_semantics(const Scenario& sc, const ConditioningSpec& spec);

// The two readings of "the probability of W seeing ok given tails", computed
// on the built-in protocol. The collapse route conditions Fbar's record at
// measurement time; the relative-state route asks a final heads/tails query
// of the whole lab (R, Fbar) after Wbar's unitary measurement.
struct ClarificationReport {
    double p_ok_given_t;       // collapse route: 0
    double q_joint_ok_t;       // q(W=ok, lab reads t): 1/12
    double q_joint_fail_t;     // q(W=fail, lab reads t): 5/12
    double q_ok_given_t;       // 1/6
    double t_mass;             // q_joint_ok_t + q_joint_fail_t = 1/2
    // Two-time joint of (Fbar's record at measurement time, final heads/tails
    // lab re-query), for inspecting how the re-query relates to the record.
    std::map<std::vector<std::string>, double> record_vs_requery;
    ComparisonReport report;   // the same numbers as labeled rows
};

ClarificationReport clarify_conditionals();

// Expansion of the post-Wbar state in the product of the coin-diagonal lab
// states |xx> on (R, Fbar), Wbar's record, and the ok/fail states on (S, F).
struct LabBasisTerm {
    std::string coin;   // h / t
    std::string wbar;   // ok / fail
    std::string lab;    // ok / fail
    cnum coefficient;
};

struct LabBasisExpansion {
    std::vector<LabBasisTerm> terms;  // 8 terms, fixed order
    double norm;                    // of the coefficient vector
    double recontract_error;        // || state - sum(c * basis) ||
};

// Requires the state produced by the built-in protocol halted after Wbar's
// step (registers R, S, Fbar, F, Wbar).
LabBasisExpansion lab_basis_expansion(const StateVector& phi);

// Runs the scenario all-unitary with the two steps in both orders (times
// stay attached to their slots) and returns the max absolute difference of
// the joint record distributions. The steps' register footprints (targets
// plus preparation targets) must be disjoint.
double order_invariance(const Scenario& sc, std::size_t step_a, std::size_t step_b);

struct EmpiricalDistribution {
    std::map<std::vector<std::string>, std::uint64_t> counts;  // outcome tuple, step order
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
};

// n independent sampled protocol runs (see sample_run); randomness is a pure
// function of (seed, sample index), so counts are schedule-independent.
EmpiricalDistribution mc_sample(const Scenario& sc, std::uint64_t n, std::uint64_t seed);

}  // namespace wf
