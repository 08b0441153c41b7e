#include "wf/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace wf {

namespace {

// Splits the flat index space of `layout` into (spectator, target) pairs for
// a given target register subset.
struct TargetSplit {
    std::vector<std::size_t> target_pos;    // positions of targets in layout
    std::size_t target_dim = 1;
    std::vector<std::size_t> full_of_pair;  // [spect * target_dim + t] -> full index
    std::size_t spect_count = 1;

    TargetSplit(const SpaceLayout& layout, const SpaceLayout& target_layout) {
        for (const auto& tr : target_layout.registers()) {
            const std::size_t pos = layout.register_index(tr.name);
            if (layout.reg(pos).dim() != tr.dim())
                throw LayoutError("target register '" + tr.name + "' dimension mismatch");
            target_pos.push_back(pos);
            target_dim *= tr.dim();
        }
        spect_count = layout.dim() / target_dim;
        full_of_pair.assign(layout.dim(), 0);
        std::vector<std::size_t> spect_key_of(layout.dim());
        // deterministic spectator keys: mixed radix over non-target registers
        std::set<std::size_t> tset(target_pos.begin(), target_pos.end());
        for (std::size_t idx = 0; idx < layout.dim(); ++idx) {
            const auto digits = layout.decode(idx);
            std::size_t t = 0;
            for (std::size_t i = 0; i < target_pos.size(); ++i)
                t = t * layout.reg(target_pos[i]).dim() + digits[target_pos[i]];
            std::size_t spect = 0;
            for (std::size_t i = 0; i < layout.size(); ++i)
                if (!tset.count(i)) spect = spect * layout.reg(i).dim() + digits[i];
            full_of_pair[spect * target_dim + t] = idx;
        }
    }
};

void check_normalized(const StateVector& s, const char* what) {
    if (std::abs(s.norm() - 1.0) > kInputNormTol)
        throw ValidationError(std::string(what) + ": state not normalized (norm " +
                              format_g17(s.norm()) + ")");
}

}  // namespace

const SpaceLayout& Measurement::target_layout() const {
    return outcomes.at(0).vectors.at(0).layout;
}

std::size_t Measurement::outcome_index(const std::string& label) const {
    for (std::size_t i = 0; i < outcomes.size(); ++i)
        if (outcomes[i].label == label) return i;
    throw LayoutError("measurement by '" + agent + "' has no outcome '" + label + "'");
}

std::vector<std::string> Measurement::outcome_labels() const {
    std::vector<std::string> out;
    for (const auto& o : outcomes) out.push_back(o.label);
    return out;
}

Measurement make_measurement(std::string agent, std::vector<MeasurementOutcome> outcomes,
                             double tol) {
    if (outcomes.empty()) throw ValidationError("measurement: no outcomes");
    std::set<std::string> labels;
    std::vector<const StateVector*> all;
    for (const auto& o : outcomes) {
        if (!labels.insert(o.label).second)
            throw ValidationError("measurement: duplicate outcome label '" + o.label + "'");
        if (o.vectors.empty())
            throw ValidationError("measurement: outcome '" + o.label + "' has no vectors");
        for (const auto& v : o.vectors) all.push_back(&v);
    }
    const SpaceLayout& layout = all[0]->layout;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (!all[i]->layout.same_as(layout))
            throw LayoutError("measurement: outcome vectors on different layouts");
        for (std::size_t j = 0; j <= i; ++j) {
            const cnum ip = inner(*all[i], *all[j]);
            const cnum expected = (i == j) ? cnum(1) : cnum(0);
            if (std::abs(ip - expected) > tol)
                throw ValidationError("measurement: outcome vectors not orthonormal, <v" +
                                      std::to_string(j) + "|v" + std::to_string(i) + "> = " +
                                      format_g17(ip.real()) + (ip.imag() < 0 ? "-" : "+") +
                                      format_g17(std::abs(ip.imag())) + "i");
        }
    }
    if (all.size() != layout.dim())
        throw ValidationError("measurement: outcome subspaces do not span the target space (" +
                              std::to_string(all.size()) + " of " +
                              std::to_string(layout.dim()) + " dimensions)");
    Measurement m;
    m.agent = std::move(agent);
    for (const auto& r : layout.registers()) m.targets.push_back(r.name);
    m.outcomes = std::move(outcomes);
    return m;
}

Measurement make_completed_measurement(std::string agent,
                                       std::vector<MeasurementOutcome> outcomes,
                                       double tol, const std::string& discard_label) {
    if (outcomes.empty()) throw ValidationError("measurement: no outcomes");
    const SpaceLayout& layout = outcomes[0].vectors.at(0).layout;
    std::vector<StateVector> have;
    for (const auto& o : outcomes)
        for (const auto& v : o.vectors) have.push_back(v);
    if (have.size() < layout.dim()) {
        // Gram-Schmidt of the standard basis against the declared vectors.
        MeasurementOutcome rest{discard_label, {}};
        for (std::size_t e = 0; e < layout.dim() && have.size() < layout.dim(); ++e) {
            StateVector cand{layout, std::vector<cnum>(layout.dim(), cnum(0))};
            cand.amps[e] = cnum(1);
            for (const auto& v : have) {
                const cnum ov = inner(v, cand);
                for (std::size_t i = 0; i < cand.dim(); ++i) cand.amps[i] -= ov * v.amps[i];
            }
            const double n = cand.norm();
            if (n < 0.5) continue;  // nearly inside the declared span
            for (cnum& c : cand.amps) c /= n;
            rest.vectors.push_back(cand);
            have.push_back(rest.vectors.back());
        }
        if (!rest.vectors.empty()) outcomes.push_back(std::move(rest));
    }
    return make_measurement(std::move(agent), std::move(outcomes), tol);
}

Measurement pointer_measurement(const SpaceLayout& layout, const std::string& reg_name,
                                const std::string& agent) {
    const Register& r = layout.reg(reg_name);
    SpaceLayout sub(std::vector<Register>{r});
    std::vector<MeasurementOutcome> outcomes;
    for (const auto& label : r.labels)
        outcomes.push_back({label, {basis_state(sub, {{r.name, label}})}});
    return make_measurement(agent, std::move(outcomes));
}

double OutcomeDistribution::at(const std::string& label) const {
    for (const auto& [l, p] : entries)
        if (l == label) return p;
    throw LayoutError("distribution has no outcome '" + label + "'");
}

bool OutcomeDistribution::has(const std::string& label) const {
    for (const auto& [l, p] : entries)
        if (l == label) return true;
    return false;
}

void OutcomeDistribution::validate() const {
    double sum = 0.0;
    for (const auto& [l, p] : entries) {
        if (p < -kTol || p > 1.0 + kTol)
            throw ValidationError("probability of '" + l + "' out of range: " + format_g17(p));
        sum += p;
    }
    if (std::abs(sum - 1.0) > kDistTol)
        throw ValidationError("distribution sums to " + format_g17(sum));
}

StateVector project_outcome(const StateVector& s, const Measurement& m,
                            const std::string& outcome) {
    const MeasurementOutcome& oc = m.outcomes[m.outcome_index(outcome)];
    const TargetSplit split(s.layout, m.target_layout());
    StateVector out{s.layout, std::vector<cnum>(s.dim(), cnum(0))};
    const std::size_t td = split.target_dim;
    std::vector<cnum> block(td);
    for (std::size_t sp = 0; sp < split.spect_count; ++sp) {
        const std::size_t* fmap = &split.full_of_pair[sp * td];
        for (std::size_t t = 0; t < td; ++t) block[t] = s.amps[fmap[t]];
        for (const auto& v : oc.vectors) {
            cnum c(0);
            for (std::size_t t = 0; t < td; ++t) c += std::conj(v.amps[t]) * block[t];
            if (c == cnum(0)) continue;
            for (std::size_t t = 0; t < td; ++t) out.amps[fmap[t]] += c * v.amps[t];
        }
    }
    return out;
}

OutcomeDistribution born_distribution(const StateVector& s, const Measurement& m) {
    check_normalized(s, "born_distribution");
    OutcomeDistribution dist;
    for (const auto& oc : m.outcomes)
        dist.entries.emplace_back(oc.label, project_outcome(s, m, oc.label).norm_squared());
    dist.validate();
    return dist;
}

StateVector collapse(const StateVector& s, const Measurement& m, const std::string& outcome) {
    StateVector proj = project_outcome(s, m, outcome);
    const double p = proj.norm_squared();
    if (p <= kTol)
        throw ZeroProbabilityError("collapse: outcome '" + outcome + "' of agent '" + m.agent +
                                   "' has probability " + format_g17(p));
    const double n = std::sqrt(p);
    for (cnum& c : proj.amps) c /= n;
    return proj;
}

double sequential_conditional(const StateVector& s, const Measurement& m1,
                              const std::string& a, const Measurement& m2,
                              const std::string& b) {
    return born_distribution(collapse(s, m1, a), m2).at(b);
}

DilationRecord dilate(const Measurement& m, const SpaceLayout& layout,
                      const std::string& memory_name) {
    if (layout.has_register(memory_name))
        throw LayoutError("dilate: memory register name '" + memory_name + "' already in use");
    Register memory{memory_name, m.outcome_labels()};
    const SpaceLayout& tl = m.target_layout();
    const SpaceLayout out_tl = tl.extended(memory);
    const std::size_t td = tl.dim();
    const std::size_t md = memory.dim();
    LinearMap vt{tl, out_tl, std::vector<cnum>(td * md * td, cnum(0))};
    for (std::size_t a = 0; a < m.outcomes.size(); ++a) {
        for (const auto& v : m.outcomes[a].vectors) {
            for (std::size_t r = 0; r < td; ++r) {
                if (v.amps[r] == cnum(0)) continue;
                for (std::size_t c = 0; c < td; ++c)
                    vt.at(r * md + a, c) += v.amps[r] * std::conj(v.amps[c]);
            }
        }
    }
    return DilationRecord{m, memory, embed(vt, m.targets, layout)};
}

double rs_outcome_probability(const StateVector& s_dilated, const std::string& memory_reg,
                              const std::string& outcome) {
    return rs_pointer_joint(s_dilated, {{memory_reg, outcome}});
}

double rs_joint(const StateVector& s, const std::vector<ProjectorEvent>& events) {
    std::set<std::string> used;
    for (const auto& e : events)
        for (const auto& t : e.targets)
            if (!used.insert(t).second)
                throw LayoutError("rs_joint: overlapping target register '" + t + "'");
    StateVector v = s;
    for (const auto& e : events) v = apply(embed(e.projector, e.targets, v.layout), v);
    return inner(s, v).real();
}

double rs_pointer_joint(const StateVector& s,
                        const std::vector<std::pair<std::string, std::string>>& records) {
    std::vector<std::pair<std::size_t, std::size_t>> wanted;  // (register pos, label index)
    std::set<std::string> used;
    for (const auto& [reg, label] : records) {
        if (!used.insert(reg).second)
            throw LayoutError("rs_pointer_joint: duplicate register '" + reg + "'");
        const std::size_t pos = s.layout.register_index(reg);
        wanted.emplace_back(pos, s.layout.reg(pos).label_index(label));
    }
    double p = 0.0;
    for (std::size_t idx = 0; idx < s.dim(); ++idx) {
        if (s.amps[idx] == cnum(0)) continue;
        bool match = true;
        for (const auto& [pos, li] : wanted) {
            if ((idx / s.layout.stride(pos)) % s.layout.reg(pos).dim() != li) {
                match = false;
                break;
            }
        }
        if (match) p += std::norm(s.amps[idx]);
    }
    return p;
}

double rs_conditional(const StateVector& s_dilated,
                      const std::pair<std::string, std::string>& cond,
                      const std::pair<std::string, std::string>& target) {
    const Register& treg = s_dilated.layout.reg(target.first);
    double denom = 0.0;
    for (const auto& label : treg.labels)
        denom += rs_pointer_joint(s_dilated, {cond, {target.first, label}});
    if (denom <= kTol)
        throw ZeroProbabilityError("rs_conditional: conditioning event " + cond.first + "=" +
                                   cond.second + " has probability " + format_g17(denom));
    return rs_pointer_joint(s_dilated, {cond, target}) / denom;
}

namespace {

// The fresh register among the outer measurement's targets is the inner
// observer's memory.
std::string find_memory_register(const StateVector& s, const Measurement& outer_m) {
    std::string memory;
    for (const auto& t : outer_m.targets) {
        if (s.layout.has_register(t)) continue;
        if (!memory.empty())
            throw LayoutError("outer measurement has more than one fresh register");
        memory = t;
    }
    if (memory.empty())
        throw LayoutError("outer measurement adds no memory register over the inner state");
    return memory;
}

}  // namespace

double encapsulated_collapse_conditional(const StateVector& s, const Measurement& inner_m,
                                         const std::string& a, const Measurement& outer_m,
                                         const std::string& b) {
    const std::string memory_name = find_memory_register(s, outer_m);
    const Register& memory = outer_m.target_layout().reg(memory_name);
    if (memory.labels != inner_m.outcome_labels())
        throw LayoutError("memory register labels do not match inner outcome labels");
    for (const auto& t : inner_m.targets) {
        if (std::find(outer_m.targets.begin(), outer_m.targets.end(), t) ==
            outer_m.targets.end())
            throw LayoutError(
                "outer measurement targets must contain the inner system registers");
    }
    StateVector collapsed = collapse(s, inner_m, a);
    auto [layout, recorded] = extend(collapsed, memory, a);
    return born_distribution(recorded, outer_m).at(b);
}

bool product_pointer_check(const Measurement& outer_m, const Measurement& inner_m,
                           const std::string& memory_reg, double tol) {
    const SpaceLayout& ol = outer_m.target_layout();
    const Register& memory = ol.reg(memory_reg);
    if (memory.labels != inner_m.outcome_labels())
        throw LayoutError("product_pointer_check: memory labels mismatch inner outcomes");
    if (ol.size() != inner_m.targets.size() + 1)
        throw LayoutError("product_pointer_check: outer targets must be system + memory");
    const std::size_t mem_pos = ol.register_index(memory_reg);
    const SpaceLayout& il = inner_m.target_layout();

    // pointer vectors |v> (x) |A_a> lifted onto the outer layout
    auto lift = [&](const StateVector& v, std::size_t a_idx) {
        StateVector w{ol, std::vector<cnum>(ol.dim(), cnum(0))};
        for (std::size_t idx = 0; idx < ol.dim(); ++idx) {
            const auto digits = ol.decode(idx);
            if (digits[mem_pos] != a_idx) continue;
            std::vector<std::size_t> tdigits;
            std::size_t k = 0;
            tdigits.resize(il.size());
            for (std::size_t i = 0; i < ol.size(); ++i) {
                if (i == mem_pos) continue;
                const std::size_t ipos = il.register_index(ol.reg(i).name);
                tdigits[ipos] = digits[i];
                ++k;
            }
            (void)k;
            w.amps[idx] = v.amps[il.encode(tdigits)];
        }
        return w;
    };

    std::vector<std::vector<StateVector>> pointer_subspaces;  // per inner outcome
    std::vector<StateVector> correlated;
    for (std::size_t a = 0; a < inner_m.outcomes.size(); ++a) {
        std::vector<StateVector> sub;
        for (const auto& v : inner_m.outcomes[a].vectors) {
            sub.push_back(lift(v, a));
            correlated.push_back(sub.back());
        }
        pointer_subspaces.push_back(std::move(sub));
    }

    auto subspace_weight = [&](const StateVector& b, const std::vector<StateVector>& sub) {
        double w = 0.0;
        for (const auto& v : sub) w += std::norm(inner(v, b));
        return w;
    };

    for (const auto& oc : outer_m.outcomes) {
        for (const auto& b : oc.vectors) {
            const double in_corr = subspace_weight(b, correlated);
            if (in_corr <= tol) continue;  // orthogonal to all reachable pointer states
            bool matched = false;
            for (const auto& sub : pointer_subspaces) {
                if (subspace_weight(b, sub) >= 1.0 - std::max(tol, 1e-9)) {
                    matched = true;
                    break;
                }
            }
            if (!matched) return false;
        }
    }
    return true;
}

}  // namespace wf
