#include "wf/scenario_format.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace wf {

namespace {

struct Segment {
    std::string text;
    int line;
    int col;  // 1-based column of text[0] in the source line
};

std::string trim(const std::string& s, int* lead = nullptr) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) {
        if (lead) *lead = 0;
        return "";
    }
    if (lead) *lead = static_cast<int>(b);
    return s.substr(b, e - b + 1);
}

Segment sub(const Segment& s, std::size_t offset, std::size_t len = std::string::npos) {
    int lead = 0;
    const std::string t = trim(s.text.substr(offset, len), &lead);
    return {t, s.line, s.col + static_cast<int>(offset) + lead};
}

// Splits on `sep`, ignoring separators inside |...> kets.
std::vector<Segment> split_top(const Segment& s, char sep) {
    std::vector<Segment> out;
    bool in_ket = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.text.size(); ++i) {
        if (i < s.text.size()) {
            if (s.text[i] == '|') in_ket = true;
            if (s.text[i] == '>') in_ket = false;
        }
        if (i == s.text.size() || (s.text[i] == sep && !in_ket)) {
            out.push_back(sub(s, start, i - start));
            start = i + 1;
        }
    }
    while (!out.empty() && out.back().text.empty()) out.pop_back();
    return out;
}

std::vector<Segment> split_ws(const Segment& s) {
    std::vector<Segment> out;
    std::size_t i = 0;
    while (i < s.text.size()) {
        while (i < s.text.size() && (s.text[i] == ' ' || s.text[i] == '\t')) ++i;
        if (i >= s.text.size()) break;
        std::size_t start = i;
        while (i < s.text.size() && s.text[i] != ' ' && s.text[i] != '\t') ++i;
        out.push_back({s.text.substr(start, i - start), s.line,
                       s.col + static_cast<int>(start)});
    }
    return out;
}

[[noreturn]] void fail(const Segment& where, const std::string& msg) {
    throw ParseError(msg, where.line, where.col);
}

std::vector<std::string> split_csv(const Segment& s) {
    std::vector<std::string> out;
    for (const auto& piece : split_top(s, ',')) {
        if (piece.text.empty()) fail(piece, "empty list item");
        out.push_back(piece.text);
    }
    return out;
}

AmpExpr amp_of(const Segment& s) {
    if (s.text.empty()) fail(s, "expected an amplitude expression");
    return parse_amplitude(s.text, static_cast<std::size_t>(s.line),
                           static_cast<std::size_t>(s.col));
}

class Resolver {
public:
    explicit Resolver(ScenarioFile& file) : f_(file) {}

    void resolve() {
        build_layout();
        build_initial();
        std::stable_sort(f_.steps.begin(), f_.steps.end(),
                         [](const StepDecl& a, const StepDecl& b) { return a.time < b.time; });
        for (const auto& sd : f_.steps) resolve_step(sd);
        for (const auto& cd : f_.comms) f_.scenario.comms.push_back({cd.time, cd.from, cd.to});
        f_.scenario.validate();
    }

    std::map<std::string, Segment> where;  // directive name/time -> location

private:
    void build_layout() {
        std::vector<Register> regs;
        for (const auto& rd : f_.registers) regs.emplace_back(Register{rd.name, rd.labels});
        f_.scenario.layout = SpaceLayout(std::move(regs));
        current_ = f_.scenario.layout;
    }

    void build_initial() {
        std::vector<std::pair<cnum, std::map<std::string, std::string>>> terms;
        for (const auto& term : f_.init) {
            std::map<std::string, std::string> assignment;
            // registers not mentioned default to their first label
            for (const auto& r : f_.scenario.layout.registers())
                assignment[r.name] = r.labels.front();
            for (const auto& [reg, label] : term.assignment) {
                if (!f_.scenario.layout.has_register(reg))
                    fail(at("init"), "init references unknown register '" + reg + "'");
                if (!f_.scenario.layout.reg(reg).has_label(label))
                    fail(at("init"), "register '" + reg + "' has no label '" + label + "'");
                assignment[reg] = label;
            }
            terms.emplace_back(term.amp.value, std::move(assignment));
        }
        try {
            f_.scenario.initial = superpose(f_.scenario.layout, terms);
        } catch (const Error& e) {
            fail(at("init"), e.what());
        }
    }

    const BasisDecl& find_basis(const std::string& name, const Segment& ref) const {
        for (const auto& b : f_.bases)
            if (b.name == name) return b;
        fail(ref, "undefined basis '" + name + "'");
    }

    const StateDecl& find_state(const std::string& name, const Segment& ref) const {
        for (const auto& s : f_.states)
            if (s.name == name) return s;
        fail(ref, "undefined state '" + name + "'");
    }

    Measurement resolve_measurement(const StepDecl& sd) {
        const Segment loc = at("step " + sd.time);
        const BasisDecl& bd = find_basis(sd.basis_name, loc);
        const Segment bloc = at("basis " + bd.name);
        std::vector<Register> regs;
        for (const auto& name : bd.regs) {
            if (!current_.has_register(name))
                fail(bloc, "basis '" + bd.name + "' references unknown register '" + name +
                               "' (memories exist only after their step)");
            regs.push_back(current_.reg(name));
        }
        SpaceLayout target(regs);
        std::vector<MeasurementOutcome> outcomes;
        for (const auto& od : bd.outcomes) {
            std::vector<std::pair<cnum, std::map<std::string, std::string>>> terms;
            for (const auto& kt : od.terms) {
                if (kt.labels.size() != regs.size())
                    fail(bloc, "ket arity does not match the basis registers");
                std::map<std::string, std::string> assignment;
                for (std::size_t i = 0; i < regs.size(); ++i) {
                    if (!regs[i].has_label(kt.labels[i]))
                        fail(bloc, "register '" + regs[i].name + "' has no label '" +
                                       kt.labels[i] + "'");
                    assignment[regs[i].name] = kt.labels[i];
                }
                terms.emplace_back(kt.amp.value, std::move(assignment));
            }
            try {
                outcomes.push_back({od.label, {superpose(target, terms)}});
            } catch (const Error& e) {
                fail(bloc, e.what());
            }
        }
        try {
            return make_completed_measurement(sd.agent, std::move(outcomes), kBasisTol);
        } catch (const Error& e) {
            fail(bloc, e.what());
        }
    }

    void resolve_step(const StepDecl& sd) {
        const Segment loc = at("step " + sd.time);
        Step step;
        step.time = sd.time;
        step.until = derive_until(sd.time);
        step.policy = sd.policy;
        step.measurement = resolve_measurement(sd);
        for (const auto& pd : sd.preps) {
            const auto outcome_labels = step.measurement.outcome_labels();
            if (std::find(outcome_labels.begin(), outcome_labels.end(), pd.outcome) ==
                outcome_labels.end())
                fail(loc, "prep outcome '" + pd.outcome + "' is not an outcome of basis '" +
                              sd.basis_name + "'");
            if (!current_.has_register(pd.reg))
                fail(loc, "prep targets unknown register '" + pd.reg + "'");
            const StateDecl& st = find_state(pd.state_name, loc);
            if (st.reg != pd.reg)
                fail(loc, "state '" + st.name + "' is declared on register '" + st.reg +
                              "', not '" + pd.reg + "'");
            SpaceLayout single(std::vector<Register>{current_.reg(pd.reg)});
            std::vector<std::pair<cnum, std::map<std::string, std::string>>> terms;
            for (const auto& e : st.entries) {
                if (!current_.reg(pd.reg).has_label(e.label))
                    fail(at("state " + st.name), "register '" + pd.reg + "' has no label '" +
                                                     e.label + "'");
                terms.push_back({e.amp.value, {{pd.reg, e.label}}});
            }
            StateVector prep_state;
            try {
                prep_state = superpose(single, terms);
            } catch (const Error& e) {
                fail(at("state " + st.name), e.what());
            }
            step.preps.push_back({pd.outcome, pd.reg, pd.state_name, std::move(prep_state)});
        }
        if (current_.has_register(sd.agent))
            fail(loc, "agent '" + sd.agent + "' clashes with an existing register");
        Register memory{sd.agent, step.measurement.outcome_labels()};
        current_ = current_.extended(memory);
        f_.scenario.steps.push_back(std::move(step));
    }

    Segment at(const std::string& key) const {
        const auto it = where.find(key);
        return it == where.end() ? Segment{"", 0, 0} : it->second;
    }

    ScenarioFile& f_;
    SpaceLayout current_;

public:
    std::map<std::string, Segment>& locations() { return where; }
};

}  // namespace

ScenarioFile parse_scenario(const std::string& text) {
    ScenarioFile file;
    Resolver resolver(file);

    std::vector<Segment> lines;
    {
        std::istringstream in(text);
        std::string raw;
        int lineno = 0;
        while (std::getline(in, raw)) {
            ++lineno;
            const std::size_t hash = raw.find('#');
            if (hash != std::string::npos) raw = raw.substr(0, hash);
            int lead = 0;
            const std::string t = trim(raw, &lead);
            if (!t.empty()) lines.push_back({t, lineno, 1 + lead});
        }
    }

    // join continuation lines of brace directives
    std::vector<Segment> directives;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        Segment seg = lines[i];
        const bool braced = seg.text.find('{') != std::string::npos;
        while (braced && seg.text.find('}') == std::string::npos) {
            if (++i >= lines.size()) fail(seg, "missing '}'");
            seg.text += " " + lines[i].text;
        }
        directives.push_back(std::move(seg));
    }

    bool saw_init = false;
    std::string last_step_time;
    for (const auto& d : directives) {
        const auto tokens = split_ws(d);
        const std::string& kind = tokens[0].text;
        if (kind == "register") {
            if (tokens.size() != 4) fail(d, "expected: register <name> <dim> <labels>");
            RegisterDecl rd;
            rd.name = tokens[1].text;
            rd.labels = split_csv(tokens[3]);
            std::size_t dim = 0;
            try {
                dim = std::stoul(tokens[2].text);
            } catch (const std::exception&) {
                fail(tokens[2], "expected a dimension");
            }
            if (dim != rd.labels.size())
                fail(tokens[2], "dimension " + tokens[2].text + " does not match " +
                                    std::to_string(rd.labels.size()) + " labels");
            file.registers.push_back(std::move(rd));
        } else if (kind == "init") {
            if (saw_init) fail(d, "duplicate init directive");
            saw_init = true;
            resolver.locations()["init"] = d;
            const Segment rest = sub(d, 4);
            for (const auto& term : split_top(rest, ';')) {
                const std::size_t eq = term.text.find('=');
                if (eq == std::string::npos) fail(term, "expected <register>:<label>=<amp>");
                InitTerm it;
                for (const auto& pair : split_top(sub(term, 0, eq), ',')) {
                    const std::size_t colon = pair.text.find(':');
                    if (colon == std::string::npos)
                        fail(pair, "expected <register>:<label>");
                    it.assignment.emplace_back(trim(pair.text.substr(0, colon)),
                                               trim(pair.text.substr(colon + 1)));
                }
                it.amp = amp_of(sub(term, eq + 1));
                file.init.push_back(std::move(it));
            }
        } else if (kind == "state") {
            if (tokens.size() < 4 || tokens[2].text != "on")
                fail(d, "expected: state <name> on <register> { ... }");
            StateDecl sd;
            sd.name = tokens[1].text;
            sd.reg = tokens[3].text;
            resolver.locations()["state " + sd.name] = d;
            const std::size_t open = d.text.find('{');
            const std::size_t close = d.text.rfind('}');
            if (open == std::string::npos || close == std::string::npos || close < open)
                fail(d, "expected a { ... } body");
            if (!trim(d.text.substr(close + 1)).empty())
                fail(sub(d, close + 1), "unexpected trailing content");
            for (const auto& entry : split_top(sub(d, open + 1, close - open - 1), ';')) {
                const std::size_t eq = entry.text.find('=');
                if (eq == std::string::npos) fail(entry, "expected <label>=<amp>");
                sd.entries.push_back(
                    {trim(entry.text.substr(0, eq)), amp_of(sub(entry, eq + 1))});
            }
            file.states.push_back(std::move(sd));
        } else if (kind == "basis") {
            if (tokens.size() < 4 || tokens[2].text != "on")
                fail(d, "expected: basis <name> on <registers> { ... }");
            BasisDecl bd;
            bd.name = tokens[1].text;
            bd.regs = split_csv(tokens[3]);
            resolver.locations()["basis " + bd.name] = d;
            const std::size_t open = d.text.find('{');
            const std::size_t close = d.text.rfind('}');
            if (open == std::string::npos || close == std::string::npos || close < open)
                fail(d, "expected a { ... } body");
            if (!trim(d.text.substr(close + 1)).empty())
                fail(sub(d, close + 1), "unexpected trailing content");
            for (const auto& outcome : split_top(sub(d, open + 1, close - open - 1), ';')) {
                const std::size_t colon = outcome.text.find(':');
                if (colon == std::string::npos)
                    fail(outcome, "expected <label>: <terms>");
                OutcomeDecl od;
                od.label = trim(outcome.text.substr(0, colon));
                for (const auto& term : split_top(sub(outcome, colon + 1), '+')) {
                    const std::size_t ket = term.text.find("*|");
                    if (ket == std::string::npos || term.text.back() != '>')
                        fail(term, "expected <amp>*|<labels>>");
                    KetTerm kt;
                    kt.amp = amp_of(sub(term, 0, ket));
                    const Segment inner =
                        sub(term, ket + 2, term.text.size() - ket - 3);
                    kt.labels = split_csv(inner);
                    od.terms.push_back(std::move(kt));
                }
                bd.outcomes.push_back(std::move(od));
            }
            file.bases.push_back(std::move(bd));
        } else if (kind == "step") {
            StepDecl sd;
            std::size_t i = 1;
            auto need = [&](const char* what) -> const Segment& {
                if (i >= tokens.size()) fail(d, std::string("expected ") + what);
                return tokens[i++];
            };
            sd.time = need("a time tag").text;
            if (need("'agent'").text != "agent") fail(d, "expected 'agent'");
            sd.agent = need("an agent name").text;
            if (need("'measure'").text != "measure") fail(d, "expected 'measure'");
            sd.basis_name = need("a basis name").text;
            if (need("'policy'").text != "policy") fail(d, "expected 'policy'");
            const Segment& pol = need("a policy");
            try {
                sd.policy = parse_policy(pol.text);
            } catch (const Error& e) {
                fail(pol, e.what());
            }
            while (i < tokens.size()) {
                if (tokens[i].text != "prep") fail(tokens[i], "unexpected trailing content");
                ++i;
                const Segment& spec = need("<outcome>-><register>:<state>");
                const std::size_t arrow = spec.text.find("->");
                const std::size_t colon = spec.text.find(':', arrow == std::string::npos
                                                                     ? 0
                                                                     : arrow + 2);
                if (arrow == std::string::npos || colon == std::string::npos)
                    fail(spec, "expected <outcome>-><register>:<state>");
                sd.preps.push_back({spec.text.substr(0, arrow),
                                    spec.text.substr(arrow + 2, colon - arrow - 2),
                                    spec.text.substr(colon + 1)});
            }
            if (!last_step_time.empty() && !(last_step_time < sd.time))
                fail(d, "step times must be strictly increasing ('" + sd.time +
                            "' after '" + last_step_time + "')");
            last_step_time = sd.time;
            resolver.locations()["step " + sd.time] = d;
            file.steps.push_back(std::move(sd));
        } else if (kind == "comm") {
            if (tokens.size() != 5 || tokens[3].text != "->")
                fail(d, "expected: comm <time> <from> -> <to>");
            file.comms.push_back({tokens[1].text, tokens[2].text, tokens[4].text});
        } else {
            fail(d, "unknown directive '" + kind + "'");
        }
    }

    if (!saw_init) throw ParseError("no init directive", 1, 1);
    if (file.registers.empty()) throw ParseError("no register directives", 1, 1);

    try {
        resolver.resolve();
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.what(), 1, 1);
    }
    return file;
}

std::string ScenarioFile::serialize() const {
    std::ostringstream out;
    for (const auto& rd : registers) {
        out << "register " << rd.name << " " << rd.labels.size() << " ";
        for (std::size_t i = 0; i < rd.labels.size(); ++i)
            out << (i ? "," : "") << rd.labels[i];
        out << "\n";
    }
    out << "init ";
    for (std::size_t t = 0; t < init.size(); ++t) {
        if (t) out << "; ";
        for (std::size_t i = 0; i < init[t].assignment.size(); ++i)
            out << (i ? "," : "") << init[t].assignment[i].first << ":"
                << init[t].assignment[i].second;
        out << "=" << init[t].amp.text;
    }
    out << "\n";
    for (const auto& sd : states) {
        out << "state " << sd.name << " on " << sd.reg << " { ";
        for (std::size_t i = 0; i < sd.entries.size(); ++i)
            out << (i ? "; " : "") << sd.entries[i].label << "=" << sd.entries[i].amp.text;
        out << " }\n";
    }
    for (const auto& bd : bases) {
        out << "basis " << bd.name << " on ";
        for (std::size_t i = 0; i < bd.regs.size(); ++i) out << (i ? "," : "") << bd.regs[i];
        out << " { ";
        for (std::size_t o = 0; o < bd.outcomes.size(); ++o) {
            if (o) out << "; ";
            out << bd.outcomes[o].label << ": ";
            for (std::size_t t = 0; t < bd.outcomes[o].terms.size(); ++t) {
                const KetTerm& kt = bd.outcomes[o].terms[t];
                if (t) out << " + ";
                out << kt.amp.text << "*|";
                for (std::size_t l = 0; l < kt.labels.size(); ++l)
                    out << (l ? "," : "") << kt.labels[l];
                out << ">";
            }
        }
        out << " }\n";
    }
    for (const auto& sd : steps) {
        out << "step " << sd.time << " agent " << sd.agent << " measure " << sd.basis_name
            << " policy " << policy_name(sd.policy);
        for (const auto& pd : sd.preps)
            out << " prep " << pd.outcome << "->" << pd.reg << ":" << pd.state_name;
        out << "\n";
    }
    for (const auto& cd : comms)
        out << "comm " << cd.time << " " << cd.from << " -> " << cd.to << "\n";
    return out.str();
}

}  // namespace wf
