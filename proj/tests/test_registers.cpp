#include "doctest.h"

#include <random>

#include "support/oracles.hpp"
#include "wf/qcore.hpp"
#include "wf/registers.hpp"

using namespace wf;

namespace {

SpaceLayout coin_spin() {
    return SpaceLayout(std::vector<Register>{{"R", {"h", "t"}}, {"S", {"-1/2", "+1/2"}}});
}

}  // namespace

TEST_CASE("register label lookup") {
    Register r{"R", {"h", "t"}};
    CHECK(r.dim() == 2);
    CHECK(r.label_index("t") == 1);
    CHECK(r.has_label("h"));
    CHECK(!r.has_label("x"));
    CHECK_THROWS_AS((void)r.label_index("x"), LayoutError);
}

TEST_CASE("layout rejects duplicate names and validates dims") {
    CHECK_THROWS_AS(SpaceLayout(std::vector<Register>{{"R", {"h"}}, {"R", {"a", "b"}}}),
                    LayoutError);
    const SpaceLayout layout = coin_spin();
    CHECK(layout.dim() == 4);
    CHECK(layout.register_index("S") == 1);
    CHECK_THROWS_AS((void)layout.reg("Q"), LayoutError);
}

TEST_CASE("encode/decode round-trips against a mixed-radix oracle") {
    const SpaceLayout layout(std::vector<Register>{
        {"A", {"0", "1", "2"}}, {"B", {"x", "y"}}, {"C", {"p", "q", "r", "s"}}});
    const std::vector<std::size_t> radices{3, 2, 4};
    for (std::size_t i = 0; i < layout.dim(); ++i) {
        const auto digits = layout.decode(i);
        CHECK(digits == oracle::mixed_radix_decode(i, radices));
        CHECK(layout.encode(digits) == oracle::mixed_radix_encode(digits, radices));
    }
}

TEST_CASE("basis_state is exactly one-hot at the indexing-law position") {
    const SpaceLayout layout = coin_spin();
    const StateVector s = basis_state(layout, {{"R", "t"}, {"S", "-1/2"}});
    // index = index(t) * dim(S) + index(-1/2)
    const std::size_t expected = 1 * 2 + 0;
    for (std::size_t i = 0; i < s.dim(); ++i)
        CHECK(s.amps[i] == (i == expected ? cnum(1) : cnum(0)));
    // decoding the nonzero index returns the assignment
    const auto digits = layout.decode(expected);
    CHECK(layout.reg(0).labels[digits[0]] == "t");
    CHECK(layout.reg(1).labels[digits[1]] == "-1/2");
}

TEST_CASE("basis_state rejects missing or unknown assignments") {
    const SpaceLayout layout = coin_spin();
    CHECK_THROWS_AS(basis_state(layout, {{"R", "h"}}), LayoutError);
    CHECK_THROWS_AS(basis_state(layout, {{"R", "h"}, {"S", "up"}}), LayoutError);
}

TEST_CASE("superpose reproduces the biased coin weights") {
    const SpaceLayout layout(std::vector<Register>{{"R", {"h", "t"}}});
    const StateVector coin =
        superpose(layout, {{1.0 / std::sqrt(3.0), {{"R", "h"}}},
                           {std::sqrt(2.0 / 3.0), {{"R", "t"}}}});
    CHECK(std::norm(coin.amps[0]) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(std::norm(coin.amps[1]) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("superpose of a single term is a basis state") {
    const SpaceLayout layout(std::vector<Register>{{"R", {"h", "t"}}});
    const StateVector s = superpose(layout, {{1.0, {{"R", "h"}}}});
    CHECK(s.amps[0] == cnum(1));
    CHECK(s.amps[1] == cnum(0));
}

TEST_CASE("superpose builds |right> with the stated overlap") {
    const SpaceLayout layout(std::vector<Register>{{"S", {"-1/2", "+1/2"}}});
    const double r2 = 1.0 / std::sqrt(2.0);
    const StateVector right =
        superpose(layout, {{r2, {{"S", "-1/2"}}}, {r2, {{"S", "+1/2"}}}});
    const StateVector down = basis_state(layout, {{"S", "-1/2"}});
    CHECK(std::abs(inner(down, right) - cnum(r2)) < 1e-15);
}

TEST_CASE("superpose rejects zero vectors and badly normalized input") {
    const SpaceLayout layout(std::vector<Register>{{"R", {"h", "t"}}});
    CHECK_THROWS_AS(superpose(layout, {{1.0, {{"R", "h"}}}, {-1.0, {{"R", "h"}}}}),
                    ValidationError);
    CHECK_THROWS_AS(superpose(layout, {{0.5, {{"R", "h"}}}}), ValidationError);
}

TEST_CASE("extend matches the Kronecker oracle and preserves inner products") {
    std::mt19937_64 rng(11);
    const SpaceLayout layout = coin_spin();
    std::normal_distribution<double> n(0.0, 1.0);
    auto random_state = [&] {
        StateVector s{layout, std::vector<cnum>(layout.dim())};
        double norm2 = 0.0;
        for (auto& a : s.amps) {
            a = cnum(n(rng), n(rng));
            norm2 += std::norm(a);
        }
        for (auto& a : s.amps) a /= std::sqrt(norm2);
        return s;
    };
    const StateVector a = random_state();
    const StateVector b = random_state();

    const Register mem{"M", {"ready", "done"}};
    const auto [layout2, a2] = extend(a, mem, "ready");
    const auto [layout3, b2] = extend(b, mem, "ready");

    CHECK(layout2.dim() == 8);
    CHECK(layout2.reg(2).name == "M");
    CHECK(a2.norm() == doctest::Approx(1.0).epsilon(1e-12));

    const auto expected = oracle::kron(a.amps, {cnum(1), cnum(0)});
    for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(std::abs(a2.amps[i] - expected[i]) < 1e-15);

    CHECK(std::abs(inner(a2, b2) - inner(a, b)) < 1e-12);
    CHECK_THROWS_AS(extend(a, Register{"R", {"x", "y"}}, "x"), LayoutError);
}
