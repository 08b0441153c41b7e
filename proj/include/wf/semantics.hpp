#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wf/qcore.hpp"

namespace wf {

// One measurement outcome: a label plus the orthonormal vectors spanning its
// subspace on the target registers. Degenerate outcomes carry several vectors.
struct MeasurementOutcome {
    std::string label;
    std::vector<StateVector> vectors;
};

// A projective measurement by an agent on a set of target registers.
// Outcome subspaces are mutually orthonormal and jointly complete.
struct Measurement {
    std::string agent;
    std::vector<std::string> targets;
    std::vector<MeasurementOutcome> outcomes;

    const SpaceLayout& target_layout() const;
    std::size_t outcome_index(const std::string& label) const;
    std::vector<std::string> outcome_labels() const;
};

// Validates orthonormality and completeness (within tol) and returns the
// measurement. Throws ValidationError with the offending inner product.
Measurement make_measurement(std::string agent, std::vector<MeasurementOutcome> outcomes,
                             double tol = kTol);

// Same, but an incomplete outcome family is completed with the orthogonal
// complement under a single discard label (default "other").
Measurement make_completed_measurement(std::string agent,
                                       std::vector<MeasurementOutcome> outcomes,
                                       double tol = kTol,
                                       const std::string& discard_label = "other");

// Measurement of a register in its own label basis (pointer readout).
Measurement pointer_measurement(const SpaceLayout& layout, const std::string& reg_name,
                                const std::string& agent = "");

struct OutcomeDistribution {
    std::vector<std::pair<std::string, double>> entries;

    double at(const std::string& label) const;
    bool has(const std::string& label) const;
    // entries in [-kTol, 1+kTol], summing to 1 within kDistTol
    void validate() const;
};

struct DilationRecord {
    Measurement measurement;
    Register memory;      // labels = outcome labels
    LinearMap isometry;   // full space -> full space (+) memory
};

// Unnormalized projection of s onto one outcome subspace (identity on
// spectator registers). Direct contraction, no matrices.
StateVector project_outcome(const StateVector& s, const Measurement& m,
                            const std::string& outcome);

// Born rule: entry(label) = <s| P_label |s>.
OutcomeDistribution born_distribution(const StateVector& s, const Measurement& m);

// State update rule: projection then renormalization. Conditionalization on
// the recorded outcome; throws ZeroProbabilityError below kTol.
StateVector collapse(const StateVector& s, const Measurement& m, const std::string& outcome);

// p(b|a) for sequential measurements m1 then m2 under the update rule.
double sequential_conditional(const StateVector& s, const Measurement& m1,
                              const std::string& a, const Measurement& m2,
                              const std::string& b);

// Measurement isometry: |v> on the targets maps to |v> (x) |A_a> for every
// vector v of outcome a. Identity on all other registers of the layout.
DilationRecord dilate(const Measurement& m, const SpaceLayout& layout,
                      const std::string& memory_name);

// Probability of the memory register recording `outcome` in a dilated state.
double rs_outcome_probability(const StateVector& s_dilated, const std::string& memory_reg,
                              const std::string& outcome);

// Expectation of a product of projectors on disjoint register sets.
struct ProjectorEvent {
    std::vector<std::string> targets;
    LinearMap projector;  // on exactly those registers
};
double rs_joint(const StateVector& s, const std::vector<ProjectorEvent>& events);

// Joint probability of several memory/pointer records (cheap special case).
double rs_pointer_joint(const StateVector& s,
                        const std::vector<std::pair<std::string, std::string>>& records);

// Relative-state conditional q(target | cond) over the labels of the target
// memory register. Throws ZeroProbabilityError if the conditioning event has
// probability <= kTol.
double rs_conditional(const StateVector& s_dilated,
                      const std::pair<std::string, std::string>& cond,
                      const std::pair<std::string, std::string>& target);

// Collapse at the inner level, then Born rule for the super-observer on the
// post-measurement product state |a (x) A_a>. The outer measurement's targets
// must consist of registers of s plus exactly one fresh memory register whose
// labels are the inner outcome labels.
double encapsulated_collapse_conditional(const StateVector& s, const Measurement& inner_m,
                                         const std::string& a, const Measurement& outer_m,
                                         const std::string& b);

// True iff every outer outcome vector is, up to phase, a matched product
// pointer state |a> (x) |A_a>, or lies entirely outside the correlated
// subspace span{|a> (x) |A_a>} (unreachable after the inner dilation).
// Exactly then the relative-state and collapse conditionals agree.
bool product_pointer_check(const Measurement& outer_m, const Measurement& inner_m,
                           const std::string& memory_reg, double tol = kTol);

}  // namespace wf
