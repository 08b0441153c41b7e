#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wf/registers.hpp"

namespace wf {

// Normalized (for semantics operations) complex amplitude vector over the
// ordered product of a layout's registers.
struct StateVector {
    SpaceLayout layout;
    std::vector<cnum> amps;

    std::size_t dim() const { return amps.size(); }
    double norm() const;
    double norm_squared() const;
};

// Dense linear map between two register layouts, row-major out_dim x in_dim.
struct LinearMap {
    SpaceLayout in_layout;
    SpaceLayout out_layout;
    std::vector<cnum> matrix;

    std::size_t in_dim() const { return in_layout.dim(); }
    std::size_t out_dim() const { return out_layout.dim(); }
    cnum& at(std::size_t row, std::size_t col) { return matrix[row * in_dim() + col]; }
    const cnum& at(std::size_t row, std::size_t col) const { return matrix[row * in_dim() + col]; }
};

LinearMap identity_map(const SpaceLayout& layout);

// Kronecker product; a's registers come first in the combined layout.
StateVector tensor(const StateVector& a, const StateVector& b);

StateVector apply(const LinearMap& m, const StateVector& s);

// a . b as matrices (b acts first)
LinearMap compose(const LinearMap& a, const LinearMap& b);

// <a|b>, conjugate-linear in the first argument
cnum inner(const StateVector& a, const StateVector& b);

// Sum of outer products over an orthonormal vector family.
LinearMap projector(const std::vector<StateVector>& vs);

// Extends m (defined on exactly the named target registers, in that order)
// to the full layout: identity on every other register. m may append extra
// output registers (e.g. a dilation memory); those end up appended to the
// full layout in the result's out_layout.
LinearMap embed(const LinearMap& m, const std::vector<std::string>& targets,
                const SpaceLayout& full);

bool is_isometry(const LinearMap& m, double tol = kTol);

// --- state construction over named registers ---

// One-hot product basis state; the assignment must cover every register.
StateVector basis_state(const SpaceLayout& layout,
                        const std::map<std::string, std::string>& assignment);

// Weighted sum of basis states; the result must already be normalized to
// within kInputNormTol (then exactly renormalized), else ValidationError.
StateVector superpose(
    const SpaceLayout& layout,
    const std::vector<std::pair<cnum, std::map<std::string, std::string>>>& terms);

// Appends a fresh register in a given initial basis label.
std::pair<SpaceLayout, StateVector> extend(const StateVector& s, const Register& r,
                                           const std::string& initial);

}  // namespace wf
