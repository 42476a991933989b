#include <doctest.h>

#include <random>
#include <set>

#include "cfforge/catalog.hpp"

using namespace cf;

namespace {

// Oracle: H3 product written out by hand.
Element h3_mul(const Element& a, const Element& b) { return Element{a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1]}; }
Element h3_inv(const Element& a) { return Element{-a[0], -a[1], -a[2] + a[0] * a[1]}; }
Element h3_conj(const Element& g, const Element& h) { return h3_mul(h3_mul(g, h), h3_inv(g)); }

}  // namespace

TEST_CASE("evaluate multiplies words") {
    const auto H = GroupCtx::heisenberg();
    CHECK(evaluate(H, Word{{{Element{1, 0, 0}, 1}, {Element{0, 1, 0}, 1}}}) == Element{1, 1, 1});
    const auto Z2 = GroupCtx::lattice(2);
    CHECK(evaluate(Z2, Word{{{Element{1, 2}, 1}, {Element{3, 4}, 1}}}) == Element{4, 6});
    for (const auto& g : {Element{3, -2, 7}, Element{0, 0, 0}}) CHECK(H.mul(g, H.identity()) == g);
    CHECK(evaluate(H, Word{{{Element{2, 1, 5}, 1}, {Element{2, 1, 5}, -1}}}) == H.identity());
}

TEST_CASE("evaluate agrees with the hand-written H3 product") {
    const auto H = GroupCtx::heisenberg();
    std::mt19937_64 rng(11);
    for (int t = 0; t < 200; ++t) {
        auto r = [&]() { return static_cast<int64_t>(rng() % 21) - 10; };
        const Element a{r(), r(), r()}, b{r(), r(), r()};
        CHECK(H.mul(a, b) == h3_mul(a, b));
        CHECK(H.inv(a) == h3_inv(a));
    }
}

TEST_CASE("elements from another group are rejected") {
    const auto H = GroupCtx::heisenberg();
    CHECK_THROWS_AS(evaluate(H, Word{{{Element{1}, 1}}}), Error);
    CHECK_THROWS_AS(H.check(Element{1, 0}), Error);
}

TEST_CASE("member") {
    const auto H = GroupCtx::heisenberg();
    CHECK(Subgroup::heis_congruence(H, 2, 4, 4).member(Element{2, 4, 4}));
    const auto Z = GroupCtx::integers();
    CHECK_FALSE(Subgroup::modulus(Z, 2).member(Element{1}));
    // Oracle: g lies in the core iff it lies in every conjugate hΓh^-1 over a transversal of G/Γ.
    const auto G1 = Subgroup::heis_congruence(H, 1, 2, 2);
    const auto core = Subgroup::normal_core(G1);
    auto in_g1 = [](const Element& e) { return e[1] % 2 == 0 && e[2] % 2 == 0; };
    auto in_core_oracle = [&](const Element& g) {
        for (const auto& h : G1.cosets().reps())
            if (!in_g1(h3_conj(h3_inv(h), g))) return false;
        return true;
    };
    CHECK_FALSE(core.member(Element{1, 0, 0}));
    CHECK_FALSE(in_core_oracle(Element{1, 0, 0}));
    for (const auto& g : H.ball(3)) CHECK(core.member(g) == in_core_oracle(g));
}

TEST_CASE("coset_table") {
    const auto Z = GroupCtx::integers();
    const auto cs = coset_table(Subgroup::modulus(Z, 2));
    CHECK(cs.size() == 2);
    CHECK(cs.reps() == std::vector<Element>{Element{0}, Element{1}});
    const auto s3 = s3_two_factors();
    CHECK(s3.gamma.index() == 3);
    // Oracle: residues of (x, y, z) mod 2.
    const auto H = GroupCtx::heisenberg();
    const auto G = Subgroup::heis_congruence(H, 2, 2, 2);
    std::set<std::array<int64_t, 3>> residues;
    for (const auto& g : H.ball(4)) residues.insert({floor_mod(g[0], 2), floor_mod(g[1], 2), floor_mod(g[2], 2)});
    CHECK(G.index() == residues.size());
    CHECK(G.index() == 8);
}

TEST_CASE("generator permutations reproduce evaluate-then-locate") {
    const auto H = GroupCtx::heisenberg();
    const auto S = H.symmetric_generators();
    std::mt19937_64 rng(5);
    for (const auto& G : {Subgroup::heis_congruence(H, 2, 4, 4), Subgroup::heis_congruence(H, 1, 2, 2),
                          Subgroup::normal_core(Subgroup::heis_congruence(H, 1, 2, 2))}) {
        const auto cs = G.cosets();
        for (int t = 0; t < 100; ++t) {
            Word w;
            std::vector<size_t> idx;
            const int len = static_cast<int>(rng() % 9);
            for (int i = 0; i < len; ++i) {
                idx.push_back(rng() % S.size());
                w.letters.push_back({S[idx.back()], 1});
            }
            uint32_t c = 0;
            for (auto it = idx.rbegin(); it != idx.rend(); ++it) c = cs.generator_perms()[*it][c];
            CHECK(c == cs.locate(evaluate(H, w)));
        }
    }
}

TEST_CASE("normal_core") {
    const auto H = GroupCtx::heisenberg();
    const auto G1 = Subgroup::heis_congruence(H, 1, 2, 2);
    const auto core = normal_core(G1);
    CHECK(core.index() == 2 * G1.index());
    for (const auto& g : H.ball(3)) {
        const bool diag = g[0] % 2 == 0 && g[1] % 2 == 0 && g[2] % 2 == 0;
        CHECK(core.member(g) == diag);
    }
    // Normal subgroups are their own core.
    const auto Z2 = GroupCtx::lattice(2);
    const auto L = Subgroup::lattice_cols(Z2, {{2, 0}, {1, 3}});
    const auto Lc = normal_core(L);
    CHECK(Lc.index() == L.index());
    for (const auto& g : Z2.ball(4)) CHECK(Lc.member(g) == L.member(g));
    // Exhaustive conjugation in the six-element group.
    const auto s3 = s3_two_factors();
    const auto sc = normal_core(s3.gamma);
    for (const auto& g : s3.group.elements()) {
        bool all = true;
        for (const auto& h : s3.group.elements()) all = all && s3.gamma.member(s3.group.conj(s3.group.inv(h), g));
        CHECK(sc.member(g) == all);
    }
    CHECK(sc.index() == 6);
}

TEST_CASE("normal_core invariants on a ball") {
    const auto H = GroupCtx::heisenberg();
    for (const auto& G : {Subgroup::heis_congruence(H, 1, 2, 2), Subgroup::heis_congruence(H, 2, 4, 4),
                          Subgroup::heis_congruence(H, 1, 4, 4)}) {
        const auto core = normal_core(G);
        CHECK(core.index() % G.index() == 0);
        const auto ball = H.ball(3);
        for (const auto& h : G.cosets().reps()) {
            const auto cc = conjugate(h, core);
            for (const auto& g : ball) {
                if (core.member(g)) CHECK(G.member(g));
                CHECK(cc.member(g) == core.member(g));
            }
        }
    }
}

TEST_CASE("conjugate") {
    const auto Z = GroupCtx::integers();
    const auto G = Subgroup::modulus(Z, 3);
    const auto c = conjugate(Element{5}, G);
    for (int64_t x = -9; x <= 9; ++x) CHECK(c.member(Element{x}) == G.member(Element{x}));
    const auto H = GroupCtx::heisenberg();
    const auto G1 = Subgroup::heis_congruence(H, 1, 2, 2);
    const auto cj = conjugate(Element{0, 1, 0}, G1);
    CHECK(cj.member(Element{1, 2, 1}));
    // Oracle: {(i, 2j, 2k - i)}.
    for (const auto& g : H.ball(3)) {
        const bool oracle = g[1] % 2 == 0 && floor_mod(g[2] + g[0], 2) == 0;
        CHECK(cj.member(g) == oracle);
    }
}

TEST_CASE("product_set") {
    const auto Z = GroupCtx::integers();
    const std::vector<Element> B{Element{3}, Element{-1}, Element{8}};
    auto r = product_set(Z, {Element{0}}, B);
    CHECK(r.elements == std::vector<Element>{Element{-1}, Element{3}, Element{8}});
    r = product_set(Z, {Element{0}, Element{1}}, {Element{0}, Element{2}});
    CHECK(r.elements == std::vector<Element>{Element{0}, Element{1}, Element{2}, Element{3}});
    CHECK(r.disjoint);
    const auto T = fgsw();
    r = product_set(Z, T.C(1), T.C(2));
    std::set<int64_t> sums;
    for (int64_t a : {0, 1, 4, 5})
        for (int64_t b : {0, 6, 16, 22}) sums.insert(a + b);
    CHECK(r.elements.size() == 16);
    CHECK(sums.size() == 16);
    CHECK(r.disjoint);
    CHECK_FALSE(product_set(Z, {Element{0}, Element{1}}, {Element{0}, Element{1}}).disjoint);
}

TEST_CASE("coset enumeration respects the cap") {
    const auto Z = GroupCtx::integers();
    CHECK_THROWS_AS(CosetSpace(Subgroup::modulus(Z, 1000), 10), Error);
}
