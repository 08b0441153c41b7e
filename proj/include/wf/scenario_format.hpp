#pragma once

#include <string>
#include <vector>

#include "wf/ampexpr.hpp"
#include "wf/scenario.hpp"

namespace wf {

// Parsed directive forms. Amplitudes keep their source expressions so a file
// serializes back without float literals.

struct RegisterDecl {
    std::string name;
    std::vector<std::string> labels;
};

struct InitTerm {
    std::vector<std::pair<std::string, std::string>> assignment;  // register -> label
    AmpExpr amp;
};

struct KetTerm {
    AmpExpr amp;
    std::vector<std::string> labels;  // one per basis register
};

struct OutcomeDecl {
    std::string label;
    std::vector<KetTerm> terms;
};

struct BasisDecl {
    std::string name;
    std::vector<std::string> regs;
    std::vector<OutcomeDecl> outcomes;
};

struct StateEntry {
    std::string label;
    AmpExpr amp;
};

struct StateDecl {
    std::string name;
    std::string reg;
    std::vector<StateEntry> entries;
};

struct PrepDecl {
    std::string outcome;
    std::string reg;
    std::string state_name;
};

struct StepDecl {
    std::string time;
    std::string agent;
    std::string basis_name;
    Policy policy = Policy::Unitary;
    std::vector<PrepDecl> preps;
};

struct CommDecl {
    std::string time;
    std::string from;
    std::string to;
};

struct ScenarioFile {
    std::vector<RegisterDecl> registers;
    std::vector<InitTerm> init;
    std::vector<StateDecl> states;
    std::vector<BasisDecl> bases;
    std::vector<StepDecl> steps;
    std::vector<CommDecl> comms;
    Scenario scenario;  // fully resolved

    std::string serialize() const;
};

// Parses the line-oriented scenario format (see README). Throws ParseError
// with line/column on syntax errors, undefined references, non-increasing
// times or a non-orthonormal basis (reported with the offending inner
// product). Basis orthonormality tolerance: 1e-10.
ScenarioFile parse_scenario(const std::string& text);

inline constexpr double kBasisTol = 1e-10;

}  // namespace wf
