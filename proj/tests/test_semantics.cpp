#include "doctest.h"

#include <random>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "wf/scenario.hpp"
#include "wf/semantics.hpp"

using namespace wf;

namespace {

SpaceLayout coin_layout() { return SpaceLayout(std::vector<Register>{{"R", {"h", "t"}}}); }

StateVector coin_state() {
    return superpose(coin_layout(), {{1.0 / std::sqrt(3.0), {{"R", "h"}}},
                                     {std::sqrt(2.0 / 3.0), {{"R", "t"}}}});
}

Measurement okfail_on_r(const std::string& agent) {
    const SpaceLayout l = coin_layout();
    const double r2 = 1.0 / std::sqrt(2.0);
    const StateVector ok = superpose(l, {{r2, {{"R", "h"}}}, {-r2, {{"R", "t"}}}});
    const StateVector fail = superpose(l, {{r2, {{"R", "h"}}}, {r2, {{"R", "t"}}}});
    return make_measurement(agent, {{"ok", {ok}}, {"fail", {fail}}});
}

}  // namespace

TEST_CASE("measurement validation: orthonormality and completeness") {
    const SpaceLayout l = coin_layout();
    const StateVector h = basis_state(l, {{"R", "h"}});
    const StateVector t = basis_state(l, {{"R", "t"}});
    CHECK_THROWS_WITH_AS(make_measurement("A", {{"a", {h}}, {"b", {h}}}),
                         doctest::Contains("not orthonormal"), ValidationError);
    CHECK_THROWS_WITH_AS(make_measurement("A", {{"a", {h}}}),
                         doctest::Contains("span"), ValidationError);
    const Measurement completed = make_completed_measurement("A", {{"a", {h}}});
    CHECK(completed.outcomes.size() == 2);
    CHECK(completed.outcomes[1].label == "other");
    CHECK(std::abs(inner(completed.outcomes[1].vectors[0], t)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("born_distribution: biased coin, eigenstate, equal superposition") {
    const SpaceLayout l = coin_layout();
    const Measurement coin = pointer_measurement(l, "R", "Fbar");
    const OutcomeDistribution d = born_distribution(coin_state(), coin);
    CHECK(d.at("h") == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(d.at("t") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    d.validate();

    const OutcomeDistribution d2 = born_distribution(basis_state(l, {{"R", "t"}}), coin);
    CHECK(d2.at("t") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d2.at("h") == doctest::Approx(0.0).epsilon(1e-12));

    const double r2 = 1.0 / std::sqrt(2.0);
    const StateVector plus = superpose(l, {{r2, {{"R", "h"}}}, {r2, {{"R", "t"}}}});
    const OutcomeDistribution d3 = born_distribution(plus, coin);
    CHECK(d3.at("h") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("born_distribution matches the brute-force oracle with spectators") {
    std::mt19937_64 rng(21);
    const SpaceLayout layout(std::vector<Register>{
        {"A", {"0", "1", "2"}}, {"B", {"x", "y"}}, {"C", {"p", "q"}}});
    for (int it = 0; it < 20; ++it) {
        const StateVector s = gen::random_state(rng, layout);
        const Measurement m = gen::random_measurement(rng, layout, {"B"}, "Obs");
        const OutcomeDistribution d = born_distribution(s, m);
        for (std::size_t o = 0; o < m.outcomes.size(); ++o) {
            const double expected = oracle::born_probability(
                s.amps, {3, 2, 2}, {1}, {m.outcomes[o].vectors[0].amps});
            CHECK(d.at(m.outcomes[o].label) == doctest::Approx(expected).epsilon(1e-10));
        }
        // multi-register target with spectator in the middle
        const Measurement m2 = gen::random_measurement(rng, layout, {"A", "C"}, "Obs");
        const OutcomeDistribution d2 = born_distribution(s, m2);
        for (std::size_t o = 0; o < m2.outcomes.size(); ++o) {
            const double expected = oracle::born_probability(
                s.amps, {3, 2, 2}, {0, 2}, {m2.outcomes[o].vectors[0].amps});
            CHECK(d2.at(m2.outcomes[o].label) == doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("collapse: conditionalization and the zero-probability error") {
    const SpaceLayout l = coin_layout();
    const Measurement coin = pointer_measurement(l, "R", "Fbar");
    const StateVector collapsed = collapse(coin_state(), coin, "t");
    CHECK(std::norm(inner(basis_state(l, {{"R", "t"}}), collapsed)) ==
          doctest::Approx(1.0).epsilon(1e-12));

    const double r2 = 1.0 / std::sqrt(2.0);
    const StateVector plus = superpose(l, {{r2, {{"R", "h"}}}, {r2, {{"R", "t"}}}});
    const StateVector down = collapse(plus, coin, "h");
    CHECK(std::norm(inner(basis_state(l, {{"R", "h"}}), down)) ==
          doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(collapse(basis_state(l, {{"R", "h"}}), coin, "t"), ZeroProbabilityError);
}

TEST_CASE("sequential_conditional: coin then ok/fail, repetition, qutrit oracle") {
    const SpaceLayout l = coin_layout();
    const Measurement coin = pointer_measurement(l, "R", "A");
    const Measurement okf = okfail_on_r("B");
    CHECK(sequential_conditional(coin_state(), coin, "t", okf, "fail") ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sequential_conditional(coin_state(), coin, "t", coin, "t") ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sequential_conditional(coin_state(), coin, "t", coin, "h") ==
          doctest::Approx(0.0).epsilon(1e-12));

    // random qutrit vs |<b|a>|^2
    std::mt19937_64 rng(22);
    const SpaceLayout q(std::vector<Register>{{"Q", {"0", "1", "2"}}});
    for (int it = 0; it < 25; ++it) {
        const StateVector s = gen::random_state(rng, q);
        const Measurement m1 = gen::random_measurement(rng, q, {"Q"}, "A");
        const Measurement m2 = gen::random_measurement(rng, q, {"Q"}, "B");
        const StateVector& a = m1.outcomes[0].vectors[0];
        const StateVector& b = m2.outcomes[1].vectors[0];
        if (std::norm(inner(a, s)) < 1e-6) continue;
        CHECK(sequential_conditional(s, m1, "o0", m2, "o1") ==
              doctest::Approx(std::norm(oracle::dot(b.amps, a.amps))).epsilon(1e-10));
    }
}

TEST_CASE("dilate: coin amplitudes, isometry, degenerate outcomes") {
    const SpaceLayout l = coin_layout();
    const Measurement coin = pointer_measurement(l, "R", "Fbar");
    const DilationRecord d = dilate(coin, l, "Fbar");
    CHECK(is_isometry(d.isometry, 1e-12));
    CHECK(d.memory.labels == std::vector<std::string>{"h", "t"});

    const StateVector dilated = apply(d.isometry, coin_state());
    const SpaceLayout& l2 = d.isometry.out_layout;
    CHECK(std::abs(inner(basis_state(l2, {{"R", "h"}, {"Fbar", "h"}}), dilated) -
                   cnum(1.0 / std::sqrt(3.0))) < 1e-12);
    CHECK(std::abs(inner(basis_state(l2, {{"R", "t"}, {"Fbar", "t"}}), dilated) -
                   cnum(std::sqrt(2.0 / 3.0))) < 1e-12);
    CHECK(std::abs(inner(basis_state(l2, {{"R", "h"}, {"Fbar", "t"}}), dilated)) < 1e-15);

    // degenerate outcome: only the label is copied, image spans target dim
    const SpaceLayout q(std::vector<Register>{{"Q", {"0", "1", "2"}}});
    std::mt19937_64 rng(23);
    const auto basis = gen::random_orthonormal(rng, 3, 3);
    const Measurement deg = make_measurement(
        "A", {{"plane", {StateVector{q, basis[0]}, StateVector{q, basis[1]}}},
              {"axis", {StateVector{q, basis[2]}}}});
    const DilationRecord dd = dilate(deg, q, "A");
    CHECK(is_isometry(dd.isometry, 1e-12));
    CHECK(dd.memory.dim() == 2);
    // rank of the image equals 3 = dim of the target space
    CHECK(dd.isometry.out_dim() == 6);

    CHECK_THROWS_AS(dilate(coin, l, "R"), LayoutError);
}

TEST_CASE("rs_outcome_probability equals the undilated Born rule") {
    const SpaceLayout l = coin_layout();
    const Measurement coin = pointer_measurement(l, "R", "Fbar");
    const DilationRecord d = dilate(coin, l, "Fbar");
    const StateVector dilated = apply(d.isometry, coin_state());
    CHECK(rs_outcome_probability(dilated, "Fbar", "t") ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(rs_outcome_probability(dilated, "Fbar", "h") ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(rs_outcome_probability(dilated, "Fbar", "h") +
              rs_outcome_probability(dilated, "Fbar", "t") ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(rs_outcome_probability(dilated, "Fbar", "x"), LayoutError);
}

TEST_CASE("rs_joint: delta statistics after one dilation, hand contraction") {
    const SpaceLayout l = coin_layout();
    const Measurement coin = pointer_measurement(l, "R", "Fbar");
    const DilationRecord d = dilate(coin, l, "Fbar");
    const StateVector dilated = apply(d.isometry, coin_state());
    const SpaceLayout& l2 = d.isometry.out_layout;

    const SpaceLayout r_only(std::vector<Register>{l2.reg("R")});
    const SpaceLayout m_only(std::vector<Register>{l2.reg("Fbar")});
    auto p_r = [&](const std::string& lab) {
        return ProjectorEvent{{"R"}, projector({basis_state(r_only, {{"R", lab}})})};
    };
    auto p_m = [&](const std::string& lab) {
        return ProjectorEvent{{"Fbar"}, projector({basis_state(m_only, {{"Fbar", lab}})})};
    };
    // q(|a'>, a) = delta_{a',a}; joint with t-memory has weight 2/3
    CHECK(rs_joint(dilated, {p_r("t"), p_m("t")}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(rs_joint(dilated, {p_r("h"), p_m("t")}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rs_joint(dilated, {}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(rs_joint(dilated, {p_r("t"), p_r("h")}), LayoutError);
}

TEST_CASE("rs_conditional: FR (Wbar=ok) gives W=ok with probability 1/2") {
    const Scenario sc = build_fr();
    const StateVector final_state = run(sc).final_state();
    CHECK(rs_conditional(final_state, {"Wbar", "ok"}, {"W", "ok"}) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rs_conditional(final_state, {"Wbar", "ok"}, {"W", "fail"}) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(rs_conditional(final_state, {"Wbar", "other"}, {"W", "ok"}),
                    ZeroProbabilityError);
}

TEST_CASE("rs_conditional on a probability-1 event is the unconditional distribution") {
    const SpaceLayout l = coin_layout();
    const Measurement coin = pointer_measurement(l, "R", "A");
    const DilationRecord d1 = dilate(coin, l, "A");
    StateVector s = apply(d1.isometry, basis_state(l, {{"R", "t"}}));
    const Measurement okf = okfail_on_r("B");
    const DilationRecord d2 = dilate(okf, d1.isometry.out_layout, "B");
    s = apply(d2.isometry, s);
    // conditioning on A=t (certain) equals the marginal of B
    CHECK(rs_conditional(s, {"A", "t"}, {"B", "ok"}) ==
          doctest::Approx(rs_outcome_probability(s, "B", "ok")).epsilon(1e-12));
}

TEST_CASE("semantics equivalence: 200 random non-encapsulated sequences") {
    std::mt19937_64 rng(24);
    double max_dev = 0.0;
    for (int it = 0; it < 200; ++it) {
        const Scenario sc = gen::random_non_encapsulated(rng);
        const Trace tr = run(sc);
        const StateVector& fs = tr.final_state();
        const Measurement& m1 = sc.steps[0].measurement;
        const Measurement& m2 = sc.steps[1].measurement;
        const std::string a = m1.outcomes[0].label;
        double pa = 0.0;
        try {
            pa = born_distribution(sc.initial, m1).at(a);
        } catch (const Error&) {
            continue;
        }
        if (pa < 1e-4) continue;
        for (const auto& out : m2.outcomes) {
            const double p = sequential_conditional(sc.initial, m1, a, m2, out.label);
            const double q = rs_conditional(fs, {"X", a}, {"Y", out.label});
            max_dev = std::max(max_dev, std::abs(p - q));
        }
    }
    CHECK(max_dev <= 1e-10);
}

TEST_CASE("movable cut: dilating any suffix of an observer chain keeps statistics") {
    std::mt19937_64 rng(25);
    for (int it = 0; it < 20; ++it) {
        const SpaceLayout layout(std::vector<Register>{{"A", {"0", "1", "2"}}});
        const StateVector s = gen::random_state(rng, layout);
        const Measurement m = gen::random_measurement(rng, layout, {"A"}, "Obs1");
        const OutcomeDistribution direct = born_distribution(s, m);

        // cut after one observer
        const DilationRecord d1 = dilate(m, layout, "Obs1");
        const StateVector s1 = apply(d1.isometry, s);
        // cut after a second observer reading the first memory
        const Measurement m2 =
            pointer_measurement(d1.isometry.out_layout, "Obs1", "Obs2");
        const DilationRecord d2 = dilate(m2, d1.isometry.out_layout, "Obs2");
        const StateVector s2 = apply(d2.isometry, s1);

        for (const auto& out : m.outcomes) {
            CHECK(rs_outcome_probability(s1, "Obs1", out.label) ==
                  doctest::Approx(direct.at(out.label)).epsilon(1e-10));
            CHECK(rs_outcome_probability(s2, "Obs2", out.label) ==
                  doctest::Approx(direct.at(out.label)).epsilon(1e-10));
        }
    }
}

TEST_CASE("encapsulated_collapse_conditional: product state Born rule") {
    const SpaceLayout l = coin_layout();
    const Measurement coin = pointer_measurement(l, "R", "M");

    // outer measurement on (R, M) in the matched product-pointer basis
    const Register mem{"M", {"h", "t"}};
    const SpaceLayout lab(std::vector<Register>{l.reg("R"), mem});
    const double r2 = 1.0 / std::sqrt(2.0);
    const StateVector okbar = superpose(
        lab, {{r2, {{"R", "h"}, {"M", "h"}}}, {-r2, {{"R", "t"}, {"M", "t"}}}});
    const StateVector failbar = superpose(
        lab, {{r2, {{"R", "h"}, {"M", "h"}}}, {r2, {{"R", "t"}, {"M", "t"}}}});
    const Measurement outer =
        make_completed_measurement("Super", {{"ok", {okbar}}, {"fail", {failbar}}});

    // collapse on t, then |<ok| t (x) M_t>|^2 = 1/2
    CHECK(encapsulated_collapse_conditional(coin_state(), coin, "t", outer, "ok") ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(encapsulated_collapse_conditional(coin_state(), coin, "t", outer, "other") ==
          doctest::Approx(0.0).epsilon(1e-12));

    // product-pointer outer basis gives delta statistics
    const StateVector hh = basis_state(lab, {{"R", "h"}, {"M", "h"}});
    const StateVector tt = basis_state(lab, {{"R", "t"}, {"M", "t"}});
    const Measurement pointer_outer =
        make_completed_measurement("Super", {{"hh", {hh}}, {"tt", {tt}}});
    CHECK(encapsulated_collapse_conditional(coin_state(), coin, "t", pointer_outer, "tt") ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(encapsulated_collapse_conditional(coin_state(), coin, "h", pointer_outer, "tt") ==
          doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(
        encapsulated_collapse_conditional(basis_state(l, {{"R", "h"}}), coin, "t", outer, "ok"),
        ZeroProbabilityError);
}

TEST_CASE("classical record: conditioning on a copy matches the collapse conditional") {
    // copy the inner outcome into an extra record register before the outer
    // measurement; relative-state conditioning on the record then agrees with
    // the encapsulated collapse conditional
    const SpaceLayout l = coin_layout();
    const Measurement coin = pointer_measurement(l, "R", "M");
    const DilationRecord d1 = dilate(coin, l, "M");
    StateVector s = apply(d1.isometry, coin_state());
    const Measurement copy = pointer_measurement(d1.isometry.out_layout, "M", "Record");
    const DilationRecord d2 = dilate(copy, d1.isometry.out_layout, "Record");
    s = apply(d2.isometry, s);

    const Register mem{"M", {"h", "t"}};
    const SpaceLayout lab(std::vector<Register>{l.reg("R"), mem});
    const double r2 = 1.0 / std::sqrt(2.0);
    const StateVector okbar = superpose(
        lab, {{r2, {{"R", "h"}, {"M", "h"}}}, {-r2, {{"R", "t"}, {"M", "t"}}}});
    const StateVector failbar = superpose(
        lab, {{r2, {{"R", "h"}, {"M", "h"}}}, {r2, {{"R", "t"}, {"M", "t"}}}});
    const Measurement outer =
        make_completed_measurement("Super", {{"ok", {okbar}}, {"fail", {failbar}}});
    const DilationRecord d3 = dilate(outer, d2.isometry.out_layout, "Super");
    const StateVector s3 = apply(d3.isometry, s);

    for (const std::string& b : {"ok", "fail"}) {
        CHECK(rs_conditional(s3, {"Record", "t"}, {"Super", b}) ==
              doctest::Approx(encapsulated_collapse_conditional(coin_state(), coin, "t",
                                                                outer, b))
                  .epsilon(1e-10));
    }
}

TEST_CASE("product_pointer_check: FR basis false, pointer basis true, rotated false") {
    const SpaceLayout l = coin_layout();
    const Measurement coin = pointer_measurement(l, "R", "M");

    const Register mem{"M", {"h", "t"}};
    const SpaceLayout lab(std::vector<Register>{l.reg("R"), mem});
    const double r2 = 1.0 / std::sqrt(2.0);
    const StateVector okbar = superpose(
        lab, {{r2, {{"R", "h"}, {"M", "h"}}}, {-r2, {{"R", "t"}, {"M", "t"}}}});
    const StateVector failbar = superpose(
        lab, {{r2, {{"R", "h"}, {"M", "h"}}}, {r2, {{"R", "t"}, {"M", "t"}}}});
    const Measurement fr_outer =
        make_completed_measurement("Super", {{"ok", {okbar}}, {"fail", {failbar}}});
    CHECK(!product_pointer_check(fr_outer, coin, "M"));

    const StateVector hh = basis_state(lab, {{"R", "h"}, {"M", "h"}});
    const StateVector tt = basis_state(lab, {{"R", "t"}, {"M", "t"}});
    const Measurement pointer_outer =
        make_completed_measurement("Super", {{"hh", {hh}}, {"tt", {tt}}});
    CHECK(product_pointer_check(pointer_outer, coin, "M"));

    // rotated basis: false, and the two conditionals indeed part ways
    CHECK(std::abs(encapsulated_collapse_conditional(coin_state(), coin, "t", fr_outer,
                                                     "ok") -
                   0.5) < 1e-12);
    // relative-state value for the same events differs from 1/2
    const DilationRecord d1 = dilate(coin, l, "M");
    const StateVector dil = apply(d1.isometry, coin_state());
    const DilationRecord d2 = dilate(fr_outer, d1.isometry.out_layout, "Super");
    const StateVector s2 = apply(d2.isometry, dil);
    const double q = rs_conditional(s2, {"M", "t"}, {"Super", "ok"});
    CHECK(std::abs(q - 0.5) > 1e-3);
}

TEST_CASE("distribution validation and the FR golden joint") {
    const Scenario sc = build_fr();
    const StateVector fs = run(sc).final_state();
    CHECK(rs_pointer_joint(fs, {{"Wbar", "ok"}, {"W", "ok"}}) ==
          doctest::Approx(1.0 / 12.0).epsilon(1e-12));

    OutcomeDistribution bad;
    bad.entries = {{"a", 0.6}, {"b", 0.6}};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}
