#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wf/analysis.hpp"
#include "wf/inference.hpp"
#include "wf/scenario_format.hpp"

namespace {

using namespace wf;

enum ExitCode { kOk = 0, kUsage = 1, kZeroProbability = 2, kViolation = 3 };

struct Options {
    std::string scenario;
    std::string semantics = "unitary";
    std::string condition;
    std::string order_check;
    std::string halt;
    std::uint64_t mc_n = 0;
    std::uint64_t seed = 0;
    bool branches = false;
    bool ledger = false;
    bool clarify = false;
    bool fail_on_violation = false;
    std::string format = "text";
};

// Emits either aligned human-readable text or a flat key=value record stream
// with '#' section comments and 17-significant-digit numbers.
class Emitter {
public:
    explicit Emitter(bool kv) : kv_(kv) {}

    void section(const std::string& title) {
        if (kv_)
            std::printf("# %s\n", title.c_str());
        else
            std::printf("\n== %s ==\n", title.c_str());
    }

    void kv(const std::string& key, const std::string& value) {
        if (kv_)
            std::printf("%s=%s\n", key.c_str(), value.c_str());
        else
            std::printf("%-28s %s\n", (key + ":").c_str(), value.c_str());
    }

    void num(const std::string& key, double v) { kv(key, format_g17(v)); }

    void text_line(const std::string& line) {
        if (!kv_) std::printf("%s\n", line.c_str());
    }

private:
    bool kv_;
};

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

std::string labels_key(const std::vector<std::pair<std::string, std::string>>& labels) {
    std::vector<std::string> parts;
    for (const auto& [reg, label] : labels) parts.push_back(label);
    return join(parts, ",");
}

Scenario load_scenario(const std::string& name) {
    if (name == "fr") return build_fr();
    std::ifstream in(name);
    if (!in) throw Error("cannot open scenario file '" + name + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str()).scenario;
}

RunOptions build_run_options(const Scenario& sc, const Options& opt) {
    RunOptions ro;
    if (opt.semantics == "unitary" || opt.semantics == "collapse") {
        for (const auto& step : sc.steps)
            ro.overrides[step.time] =
                opt.semantics == "unitary" ? Policy::Unitary : Policy::Collapse;
    } else if (opt.semantics.rfind("mixed:", 0) == 0) {
        std::stringstream ss(opt.semantics.substr(6));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::size_t eq = item.rfind('=');
            if (eq == std::string::npos)
                throw Error("bad --semantics item '" + item + "', expected <time>=<policy>");
            const std::string time = item.substr(0, eq);
            sc.step_index_by_time(time);  // validates
            ro.overrides[time] = parse_policy(item.substr(eq + 1));
        }
    } else {
        throw Error("bad --semantics '" + opt.semantics + "'");
    }
    if (!opt.condition.empty()) {
        const std::size_t eq = opt.condition.find('=');
        if (eq == std::string::npos)
            throw Error("bad --condition, expected <agent>=<outcome>");
        const std::string agent = opt.condition.substr(0, eq);
        const Step& step = sc.steps[sc.step_index_by_agent(agent)];
        ro.overrides[step.time] = Policy::Collapse;
        ro.collapse_choices[step.time] = opt.condition.substr(eq + 1);
    }
    if (!opt.halt.empty()) ro.halt_at = opt.halt;
    return ro;
}

int run_command(const Options& opt) {
    Emitter out(opt.format == "kv");

    const Scenario sc = load_scenario(opt.scenario);
    const RunOptions ro = build_run_options(sc, opt);
    const Trace trace = run(sc, ro);
    const StateVector& final_state = trace.final_state();

    out.section("run");
    out.kv("scenario", opt.scenario);
    out.kv("semantics", opt.semantics);
    if (!opt.condition.empty()) out.kv("condition", opt.condition);
    out.kv("steps", std::to_string(sc.steps.size()));
    out.kv("executed", std::to_string(trace.executed()));
    out.num("norm", final_state.norm());

    const std::vector<std::string> record_regs =
        default_branch_registers(sc, trace.executed());
    out.kv("records", join(record_regs, ","));
    if (!record_regs.empty()) {
        out.section("joint record distribution");
        for (const auto& [labels, p] : joint_memory_distribution(final_state, record_regs))
            out.num("joint." + join(labels, ","), p);
    }

    // the certainty ledger needs the protocol as defined, run coherently
    Ledger closed;
    bool have_ledger = false;
    if (opt.branches || opt.ledger || opt.fail_on_violation) {
        try {
            closed = chain_certainty(build_q_ledger(sc), sc);
            have_ledger = true;
        } catch (const Error& e) {
            out.section("ledger");
            out.kv("ledger_error", e.what());
        }
    }

    std::vector<Branch> brs;
    if (!record_regs.empty()) brs = branches(final_state, record_regs);
    if (have_ledger) annotate_branches(brs, closed, sc);

    if (opt.branches) {
        out.section("branches");
        out.kv("branch_count", std::to_string(brs.size()));
        for (std::size_t i = 0; i < brs.size(); ++i) {
            const std::string k = "branch." + std::to_string(i);
            out.kv(k + ".labels", labels_key(brs[i].labels));
            out.num(k + ".re", brs[i].amplitude.real());
            out.num(k + ".im", brs[i].amplitude.imag());
            out.num(k + ".weight", brs[i].weight());
            for (const auto& [reg, note] : brs[i].annotations)
                out.kv(k + ".note." + reg, note);
        }
    }

    if (opt.ledger && have_ledger) {
        out.section("ledger");
        out.kv("statements", std::to_string(closed.statements.size()));
        for (std::size_t i = 0; i < closed.statements.size(); ++i)
            out.kv("statement." + std::to_string(i),
                   describe_statement(closed.statements[i], sc));
    }

    std::vector<Violation> violations;
    if (have_ledger) violations = check_single_value(brs, closed, sc);
    if (opt.branches || opt.ledger || opt.fail_on_violation) {
        out.section("consistency");
        out.kv("violations", std::to_string(violations.size()));
        for (std::size_t i = 0; i < violations.size(); ++i) {
            const std::string k = "violation." + std::to_string(i);
            out.kv(k + ".branch", labels_key(violations[i].branch_labels));
            out.kv(k + ".agent", violations[i].agent);
            out.kv(k + ".held", violations[i].held);
            out.kv(k + ".conflict", violations[i].conflict);
        }
    }

    if (opt.clarify) {
        const ClarificationReport rep = clarify_conditionals();
        out.section("clarification");
        out.num("p.ok_given_t", rep.p_ok_given_t);
        out.num("q.joint.ok.t", rep.q_joint_ok_t);
        out.num("q.joint.fail.t", rep.q_joint_fail_t);
        out.num("q.t_mass", rep.t_mass);
        out.num("q.ok_given_t", rep.q_ok_given_t);
        for (const auto& row : rep.report.rows) {
            out.text_line("collapse conditions on " + row.conditioning + "; " + row.note);
            out.kv("agree", row.agree ? "true" : "false");
        }
        out.section("record vs lab re-query");
        for (const auto& [key, p] : rep.record_vs_requery)
            out.num("requery." + join(key, "."), p);
    }

    if (!opt.order_check.empty()) {
        const std::size_t comma = opt.order_check.find(',');
        if (comma == std::string::npos)
            throw Error("bad --order-check, expected <time>,<time>");
        const std::size_t a = sc.step_index_by_time(opt.order_check.substr(0, comma));
        const std::size_t b = sc.step_index_by_time(opt.order_check.substr(comma + 1));
        out.section("order check");
        out.num("order.max_deviation", order_invariance(sc, a, b));
    }

    if (opt.mc_n > 0) {
        const EmpiricalDistribution emp = mc_sample(sc, opt.mc_n, opt.seed);
        const auto analytic = joint_memory_distribution(
            run(sc).final_state(), default_branch_registers(sc, sc.steps.size()));
        out.section("monte carlo");
        out.kv("mc.n", std::to_string(emp.n));
        out.kv("mc.seed", std::to_string(emp.seed));
        for (const auto& [key, p] : analytic) {
            const auto it = emp.counts.find(key);
            const std::uint64_t c = it == emp.counts.end() ? 0 : it->second;
            const std::string k = "mc." + join(key, ",");
            const double freq = static_cast<double>(c) / static_cast<double>(emp.n);
            const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(emp.n));
            out.kv(k + ".count", std::to_string(c));
            out.num(k + ".freq", freq);
            out.num(k + ".expected", p);
            out.num(k + ".sigma", sigma);
        }
    }

    if (opt.fail_on_violation && !violations.empty()) return kViolation;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wigner's-friend protocol simulator"};
    app.require_subcommand(1);

    Options opt;
    CLI::App* run_cmd = app.add_subcommand("run", "Execute a scenario and report");
    run_cmd->add_option("scenario", opt.scenario, "Scenario file path, or 'fr' for the built-in protocol")
        ->required();
    run_cmd->add_option("--semantics", opt.semantics,
                        "unitary | collapse | mixed:<time>=<policy>,...");
    run_cmd->add_option("--condition", opt.condition,
                        "<agent>=<outcome>: collapse that agent's step on the outcome");
    run_cmd->add_flag("--branches", opt.branches, "Print the branch decomposition");
    run_cmd->add_flag("--ledger", opt.ledger, "Print the certainty ledger");
    run_cmd->add_flag("--clarify", opt.clarify, "Print the p-vs-q clarification report");
    run_cmd->add_option("--order-check", opt.order_check,
                        "<t1>,<t2>: verify order invariance of two steps");
    run_cmd->add_option("--mc", opt.mc_n, "Monte Carlo sample count");
    run_cmd->add_option("--seed", opt.seed, "Monte Carlo seed");
    run_cmd->add_option("--format", opt.format, "text | kv")
        ->check(CLI::IsMember({"text", "kv"}));
    run_cmd->add_flag("--fail-on-violation", opt.fail_on_violation,
                      "Exit 3 if the consistency check reports a violation");
    run_cmd->add_option("--halt", opt.halt, "Stop after the step with this time tag");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        return run_command(opt);
    } catch (const ZeroProbabilityError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kZeroProbability;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    }
}
