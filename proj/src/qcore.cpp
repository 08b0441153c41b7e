#include "wf/qcore.hpp"

#include <cmath>
#include <set>

namespace wf {

namespace {

void check_finite(const std::vector<cnum>& amps, const char* what) {
    for (const cnum& c : amps) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw ValidationError(std::string(what) + ": non-finite amplitude");
    }
}

}  // namespace

double StateVector::norm_squared() const {
    double s = 0.0;
    for (const cnum& c : amps) s += std::norm(c);
    return s;
}

double StateVector::norm() const { return std::sqrt(norm_squared()); }

LinearMap identity_map(const SpaceLayout& layout) {
    LinearMap m{layout, layout, std::vector<cnum>(layout.dim() * layout.dim(), cnum(0))};
    for (std::size_t i = 0; i < layout.dim(); ++i) m.at(i, i) = cnum(1);
    return m;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
    std::vector<Register> regs = a.layout.registers();
    for (const auto& r : b.layout.registers()) {
        if (a.layout.has_register(r.name))
            throw LayoutError("tensor: duplicate register name '" + r.name + "'");
        regs.push_back(r);
    }
    SpaceLayout layout(std::move(regs));
    StateVector out{layout, std::vector<cnum>(layout.dim())};
    const std::size_t bd = b.dim();
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < bd; ++j) out.amps[i * bd + j] = a.amps[i] * b.amps[j];
    return out;
}

StateVector apply(const LinearMap& m, const StateVector& s) {
    if (!m.in_layout.same_as(s.layout))
        throw LayoutError("apply: map input layout does not match state layout");
    if (s.dim() != m.in_dim()) throw LayoutError("apply: dimension mismatch");
    StateVector out{m.out_layout, std::vector<cnum>(m.out_dim(), cnum(0))};
    for (std::size_t r = 0; r < m.out_dim(); ++r) {
        cnum acc(0);
        const cnum* row = &m.matrix[r * m.in_dim()];
        for (std::size_t c = 0; c < m.in_dim(); ++c) acc += row[c] * s.amps[c];
        out.amps[r] = acc;
    }
    return out;
}

LinearMap compose(const LinearMap& a, const LinearMap& b) {
    if (!a.in_layout.same_as(b.out_layout))
        throw LayoutError("compose: inner layouts do not match");
    LinearMap out{b.in_layout, a.out_layout,
                  std::vector<cnum>(a.out_dim() * b.in_dim(), cnum(0))};
    for (std::size_t i = 0; i < a.out_dim(); ++i)
        for (std::size_t k = 0; k < a.in_dim(); ++k) {
            const cnum aik = a.at(i, k);
            if (aik == cnum(0)) continue;
            for (std::size_t j = 0; j < b.in_dim(); ++j) out.at(i, j) += aik * b.at(k, j);
        }
    return out;
}

cnum inner(const StateVector& a, const StateVector& b) {
    if (!a.layout.same_as(b.layout)) throw LayoutError("inner: layout mismatch");
    cnum acc(0);
    for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a.amps[i]) * b.amps[i];
    return acc;
}

LinearMap projector(const std::vector<StateVector>& vs) {
    if (vs.empty()) throw ValidationError("projector: empty vector family");
    const SpaceLayout& layout = vs[0].layout;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (!vs[i].layout.same_as(layout)) throw LayoutError("projector: layout mismatch");
        for (std::size_t j = 0; j <= i; ++j) {
            const cnum ip = inner(vs[i], vs[j]);
            const double expected = (i == j) ? 1.0 : 0.0;
            if (std::abs(ip - cnum(expected)) > kTol)
                throw ValidationError("projector: input family not orthonormal (|<v" +
                                      std::to_string(i) + "|v" + std::to_string(j) +
                                      ">| deviation " + format_g17(std::abs(ip - cnum(expected))) +
                                      ")");
        }
    }
    LinearMap p{layout, layout, std::vector<cnum>(layout.dim() * layout.dim(), cnum(0))};
    for (const auto& v : vs)
        for (std::size_t r = 0; r < v.dim(); ++r) {
            if (v.amps[r] == cnum(0)) continue;
            for (std::size_t c = 0; c < v.dim(); ++c)
                p.at(r, c) += v.amps[r] * std::conj(v.amps[c]);
        }
    return p;
}

LinearMap embed(const LinearMap& m, const std::vector<std::string>& targets,
                const SpaceLayout& full) {
    if (m.in_layout.size() != targets.size())
        throw LayoutError("embed: map input layout does not match target list");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (m.in_layout.reg(i).name != targets[i])
            throw LayoutError("embed: map input register order must match target list");
        const Register& fr = full.reg(targets[i]);  // throws on unknown register
        if (fr.dim() != m.in_layout.reg(i).dim())
            throw LayoutError("embed: dimension mismatch on register '" + targets[i] + "'");
    }
    // out layout of m must start with the target registers, optionally
    // followed by extra (fresh) registers appended to the full layout.
    if (m.out_layout.size() < targets.size())
        throw LayoutError("embed: map output layout drops target registers");
    std::vector<Register> extras;
    for (std::size_t i = 0; i < m.out_layout.size(); ++i) {
        const Register& r = m.out_layout.reg(i);
        if (i < targets.size()) {
            if (r.name != targets[i])
                throw LayoutError("embed: map output must keep target register order");
        } else {
            extras.push_back(r);
        }
    }
    SpaceLayout out_full = full;
    for (const auto& r : extras) out_full = out_full.extended(r);

    std::vector<std::size_t> target_pos(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i)
        target_pos[i] = full.register_index(targets[i]);

    LinearMap result{full, out_full,
                     std::vector<cnum>(out_full.dim() * full.dim(), cnum(0))};
    const std::size_t nfull = full.size();
    std::vector<std::size_t> out_digits(out_full.size());
    for (std::size_t in_idx = 0; in_idx < full.dim(); ++in_idx) {
        const std::vector<std::size_t> digits = full.decode(in_idx);
        std::vector<std::size_t> t_in_digits(targets.size());
        for (std::size_t i = 0; i < targets.size(); ++i) t_in_digits[i] = digits[target_pos[i]];
        const std::size_t t_in = m.in_layout.encode(t_in_digits);
        for (std::size_t m_out = 0; m_out < m.out_dim(); ++m_out) {
            const cnum entry = m.at(m_out, t_in);
            if (entry == cnum(0)) continue;
            const std::vector<std::size_t> mdigits = m.out_layout.decode(m_out);
            for (std::size_t i = 0; i < nfull; ++i) out_digits[i] = digits[i];
            for (std::size_t i = 0; i < targets.size(); ++i)
                out_digits[target_pos[i]] = mdigits[i];
            for (std::size_t i = 0; i < extras.size(); ++i)
                out_digits[nfull + i] = mdigits[targets.size() + i];
            result.at(out_full.encode(out_digits), in_idx) += entry;
        }
    }
    return result;
}

bool is_isometry(const LinearMap& m, double tol) {
    // max-entry deviation of M^dag M from identity
    double max_dev = 0.0;
    for (std::size_t i = 0; i < m.in_dim(); ++i)
        for (std::size_t j = 0; j < m.in_dim(); ++j) {
            cnum acc(0);
            for (std::size_t r = 0; r < m.out_dim(); ++r)
                acc += std::conj(m.at(r, i)) * m.at(r, j);
            const cnum expected = (i == j) ? cnum(1) : cnum(0);
            max_dev = std::max(max_dev, std::abs(acc - expected));
        }
    return max_dev <= tol;
}

StateVector basis_state(const SpaceLayout& layout,
                        const std::map<std::string, std::string>& assignment) {
    std::vector<std::size_t> digits(layout.size());
    std::set<std::string> seen;
    for (const auto& [name, label] : assignment) {
        const std::size_t ri = layout.register_index(name);
        digits[ri] = layout.reg(ri).label_index(label);
        seen.insert(name);
    }
    for (const auto& r : layout.registers())
        if (!seen.count(r.name))
            throw LayoutError("basis_state: assignment misses register '" + r.name + "'");
    StateVector s{layout, std::vector<cnum>(layout.dim(), cnum(0))};
    s.amps[layout.encode(digits)] = cnum(1);
    return s;
}

StateVector superpose(
    const SpaceLayout& layout,
    const std::vector<std::pair<cnum, std::map<std::string, std::string>>>& terms) {
    if (terms.empty()) throw ValidationError("superpose: no terms");
    StateVector s{layout, std::vector<cnum>(layout.dim(), cnum(0))};
    for (const auto& [amp, assignment] : terms) {
        const StateVector b = basis_state(layout, assignment);
        for (std::size_t i = 0; i < s.dim(); ++i) s.amps[i] += amp * b.amps[i];
    }
    check_finite(s.amps, "superpose");
    const double n = s.norm();
    if (n <= kTol) throw ValidationError("superpose: zero vector");
    if (std::abs(n - 1.0) > kInputNormTol)
        throw ValidationError("superpose: norm " + format_g17(n) +
                              " deviates from 1 by more than " + format_g17(kInputNormTol));
    for (cnum& c : s.amps) c /= n;
    return s;
}

std::pair<SpaceLayout, StateVector> extend(const StateVector& s, const Register& r,
                                           const std::string& initial) {
    SpaceLayout rl(std::vector<Register>{r});
    StateVector init = basis_state(rl, {{r.name, initial}});
    StateVector out = tensor(s, init);  // throws on duplicate name
    return {out.layout, out};
}

}  // namespace wf
