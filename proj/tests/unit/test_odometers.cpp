#include <doctest.h>

#include <random>

#include "cfforge/catalog.hpp"

using namespace cf;

namespace {

OdometerSpec dyadic(int cap = 12) { return z_product_odometer(std::vector<int64_t>(cap, 2)); }

Verdict compat(const CFParams& T, const OdometerSpec& s, int depth, const std::vector<int>& l = {}) {
    return odometer_compatibility(T, s, identity_chain(s.group()), depth, l);
}

}  // namespace

TEST_CASE("validate_chain") {
    CHECK(validate_chain(dyadic(), 6).ok);
    const auto r = validate_chain(heisenberg_nonnormal(), 4);
    CHECK(r.ok);
    for (const auto& L : r.levels) CHECK(L.strict);
    const auto Z = GroupCtx::integers();
    const OdometerSpec dup(Z, "dup", [Z](int n) { return Subgroup::modulus(Z, n == 1 ? 2 : 2 << (n - 2)); }, 4);
    CHECK_FALSE(validate_chain(dup, 3).ok);
}

TEST_CASE("odometer_act") {
    const auto s = dyadic();
    // 1 + 2Z, 3 + 4Z, 7 + 8Z under +1 carries to the zero chain.
    const auto y = chain_of(s, Element{7}, 3);
    CHECK(odometer_act(s, Element{1}, y) == chain_of(s, Element{0}, 3));
    CHECK(odometer_act(s, Element{0}, y) == y);
    const auto h = heisenberg_2adic_chain();
    const auto yh = chain_of(h, Element{0, 1, 3}, 2);
    CHECK(odometer_act(h, Element{1, 0, 0}, yh) == chain_of(h, Element{1, 1, 4}, 2));
    CHECK(chain_consistent(h, yh));
}

TEST_CASE("odometer_act is a group action") {
    std::mt19937_64 rng(23);
    const auto H = GroupCtx::heisenberg();
    for (const auto& s : {heisenberg_2adic_chain(), heisenberg_nonnormal()}) {
        for (int t = 0; t < 100; ++t) {
            auto r = [&]() { return static_cast<int64_t>(rng() % 9) - 4; };
            const Element g{r(), r(), r()}, g2{r(), r(), r()}, y0{r(), r(), r()};
            const auto y = chain_of(s, y0, 3);
            CHECK(odometer_act(s, g, odometer_act(s, g2, y)) == odometer_act(s, H.mul(g, g2), y));
        }
    }
}

TEST_CASE("cross_sections") {
    for (const auto& s : {dyadic(), heisenberg_2adic_chain(), heisenberg_nonnormal()}) {
        const auto cs = cross_sections(s, 3);
        CHECK(cs.D.size() == 3);
        for (bool b : cs.omega_bijective) CHECK(b);
        for (bool b : cs.square_commutes) CHECK(b);
        for (const auto& d : cs.D) CHECK(s.group().is_identity(d.front()));
    }
}

TEST_CASE("rank_one_odometer_params") {
    const auto s = dyadic();
    const auto cs = cross_sections(s, 5);
    std::vector<FinMeasure> k;
    for (const auto& d : cs.D) k.push_back(FinMeasure::uniform(s.group(), d));
    const auto T = rank_one_odometer_params(s, k);
    for (int n = 0; n <= 5; ++n) {
        std::vector<Element> want;
        for (int64_t x = 0; x < (int64_t(1) << n); ++x) want.push_back(Element{x});
        CHECK(T.F(n).elements() == want);
    }
    CHECK(validate_params(T, 5).ok);
    std::vector<FinMeasure> w;
    for (const auto& d : cs.D) w.push_back(FinMeasure::weighted(s.group(), d, {Rational(1, 3), Rational(2, 3)}));
    CHECK(validate_params(rank_one_odometer_params(s, w), 5).ok);
    auto bad = k;
    bad[1] = FinMeasure::uniform(s.group(), {Element{0}, Element{1}});
    CHECK_THROWS_AS(rank_one_odometer_params(s, bad), Error);
}

TEST_CASE("normal_cover") {
    const auto n6 = normal_cover(heisenberg_2adic_chain(), 3);
    for (const auto& L : n6.levels) CHECK(L.ratio == 1);
    CHECK(n6.levelwise_injective);
    const auto H = GroupCtx::heisenberg();
    const auto s7 = heisenberg_nonnormal();
    const auto n7 = normal_cover(s7, 4);
    for (const auto& L : n7.levels) {
        CHECK(L.ratio == 2);
        CHECK(L.next_inside_core);
    }
    CHECK(n7.limit_injective);
    const int64_t e = 2;
    for (const auto& g : H.ball(3)) {
        const bool diag = floor_mod(g[0], e) == 0 && floor_mod(g[1], e) == 0 && floor_mod(g[2], e) == 0;
        CHECK(n7.cores[0].member(g) == diag);
    }
    // The cover chain, projected back, reproduces the original chain point.
    const auto cores = n7.cores;
    const OdometerSpec cover_spec(H, "cores", [cores](int n) { return cores[n - 1]; }, 4);
    for (const auto& g : H.ball(2)) CHECK(cover_project(s7, n7, chain_of(cover_spec, g, 4)) == chain_of(s7, g, 4));

    const OdometerSpec two(H, "two", [H](int n) { return Subgroup::heis_congruence(H, 1, n == 1 ? 2 : 4, n == 1 ? 2 : 4); }, 2);
    const auto nt = normal_cover(two, 2);
    CHECK_FALSE(nt.levels[0].next_inside_core);
    CHECK(nt.levels[0].h_image > 1);
    CHECK_FALSE(Subgroup::normal_core(two.gamma(1)).member(Element{1, 0, 0}));
    CHECK(two.gamma(2).member(Element{1, 0, 0}));
}

TEST_CASE("rank_one_cover") {
    const auto rc = rank_one_cover(heisenberg_2adic_chain(), 3);
    CHECK(validate_params(rc.params, 3).ok);
    for (bool b : rc.tau_bijective) CHECK(b);
    for (bool b : rc.tau_uniform) CHECK(b);
    const auto rz = rank_one_cover(dyadic(), 4);
    CHECK(validate_params(rz.params, 4).ok);
    for (bool b : rz.tau_bijective) CHECK(b);
}

TEST_CASE("odometer_compatibility") {
    const auto T = fgsw();
    const auto s = dyadic();
    const auto v = compat(T, s, 10);
    for (const auto& t : v.terms) CHECK(t == Rational(1, 2));
    CHECK(v.tag == VerdictTag::DivergentIndicated);
    const auto w = compat(T, s, 5, {0, 2, 4, 6, 8, 10});
    for (size_t i = 1; i < w.terms.size(); ++i) CHECK(w.terms[i] == 0);
    CHECK(w.tag == VerdictTag::TermwiseZero);
    const auto h = compat(heisenberg_rank_one(), heisenberg_2adic_chain(), 4, {0, 2, 3, 4, 5});
    CHECK(h.tag == VerdictTag::TermwiseZero);
    CHECK(h.zero_beyond <= 1);
    const ChainRule bad = [](int n) { return Element{n == 2 ? 1 : 0}; };
    CHECK_THROWS_AS(odometer_compatibility(T, s, bad, 3), Error);
}

TEST_CASE("odometer_factor_map") {
    const auto T = fgsw();
    const auto s = dyadic();
    std::vector<Element> tail(12, Element{0});
    const auto z = odometer_factor_map(T, s, identity_chain(s.group()), CFPoint{0, Element{0}, tail}, 4);
    REQUIRE(z);
    CHECK(*z == chain_of(s, Element{0}, 4));
    tail[0] = Element{1};
    const auto o = odometer_factor_map(T, s, identity_chain(s.group()), CFPoint{0, Element{0}, tail}, 4);
    REQUIRE(o);
    CHECK(*o == chain_of(s, Element{1}, 4));
}

TEST_CASE("isomorphism_check") {
    const auto s = dyadic();
    const auto D = z_product_params(std::vector<int64_t>(12, 2));
    const auto own = isomorphism_check(D, s, identity_chain(s.group()), 1, Rational(1, 4), 4, 5);
    CHECK(own.passes);
    for (const auto& p : own.probes) CHECK(p.value == 0);
    const auto T = fgsw();
    const auto r = isomorphism_check(T, s, identity_chain(s.group()), 1, Rational(1, 4), 4, 4);
    CHECK_FALSE(r.passes);
    CHECK(r.envelope_min >= Rational(1, 4));
    for (const auto& p : r.probes) CHECK(p.value == iso_value_bruteforce(T, s, identity_chain(s.group()), 1, p.l, p.m));
    const auto none = isomorphism_check(T, s, identity_chain(s.group()), 1, Rational(1, 4), 0, 0);
    CHECK(none.inconclusive);
    CHECK_FALSE(none.passes);
}
