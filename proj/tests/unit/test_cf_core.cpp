#include <doctest.h>

#include <functional>

#include "cfforge/catalog.hpp"

using namespace cf;

namespace {

std::vector<Element> ints(std::initializer_list<int64_t> xs) {
    std::vector<Element> v;
    for (auto x : xs) v.push_back(Element{x});
    return v;
}

std::vector<Element> range(int64_t lo, int64_t hi) {
    std::vector<Element> v;
    for (int64_t x = lo; x < hi; ++x) v.push_back(Element{x});
    return v;
}

// Two-stage prefix of the fgsw data over Z with a chosen κ_2.
CFParams fgsw_prefix(const FinMeasure& k2) {
    const auto Z = GroupCtx::integers();
    return explicit_params_spacer_fill(Z, "prefix", {ints({0, 1, 4, 5}), ints({0, 6, 16, 22})},
                                       {FinMeasure::uniform(Z, ints({0, 1, 4, 5})), k2}, {range(0, 1), range(0, 6), range(0, 28)},
                                       {Rational(0), Rational(1, 2), Rational(1, 2)});
}

}  // namespace

TEST_CASE("validate_params") {
    CHECK(validate_params(fgsw(), 6).ok);
    const auto Z = GroupCtx::integers();
    const auto one = explicit_params(Z, "one", {ints({0})}, {FinMeasure::uniform(Z, ints({0}))}, {ints({0}), ints({0})},
                                     {FinMeasure::delta(Z, Element{0}), FinMeasure::delta(Z, Element{0})});
    CHECK_FALSE(validate_params(one, 1).ok);
    const auto overlap = explicit_params_spacer_fill(Z, "overlap", {ints({0, 1}), ints({0, 1})},
                                                     {FinMeasure::uniform(Z, ints({0, 1})), FinMeasure::uniform(Z, ints({0, 1}))},
                                                     {ints({0}), ints({0, 1}), ints({0, 1, 2})}, {0, 1, 1});
    const auto r = validate_params(overlap, 2);
    CHECK_FALSE(r.ok);
    CHECK(r.failure_stage == 1);
    CHECK_FALSE(r.stages[1].disjoint);
}

TEST_CASE("check_minimal_domain") {
    const auto T = fgsw();
    const auto e = check_minimal_domain(T, Element{0}, 2, 4);
    CHECK(e.holds);
    CHECK(e.m == 2);
    for (int n = 0; n <= 3; ++n) CHECK_FALSE(check_minimal_domain(T, Element{1}, n, 6).holds);

    // Oracle: enumerate F_1 C_2 ⊂ H3 and count the points pushed out of F_m by g.
    const auto H = heisenberg_rank_one();
    auto in_box = [](const Element& e, int64_t a, int64_t b, int64_t c) {
        return e[0] >= 0 && e[0] < a && e[1] >= 0 && e[1] < b && e[2] >= 0 && e[2] < c;
    };
    auto mul = [](const Element& a, const Element& b) { return Element{a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1]}; };
    for (const Element g : {Element{1, 0, 0}, Element{0, 0, 1}}) {
        const auto rep = check_minimal_domain(H, g, 1, 2);
        std::vector<Element> s;
        for (int64_t x = 0; x < 2; ++x)
            for (int64_t y = 0; y < 2; ++y)
                for (int64_t z = 0; z < heis_h(1); ++z) s.push_back(Element{x, y, z});
        size_t out1 = 0;
        for (const auto& f : s) out1 += !in_box(mul(g, f), 2, 2, heis_h(1));
        REQUIRE(!rep.frontier.empty());
        CHECK(rep.frontier[0] == out1);
        if (out1 == 0) continue;
        size_t out2 = 0;
        for (const auto& f : s)
            for (const auto& c : H.C(2)) out2 += !in_box(mul(g, mul(f, c)), 4, 4, heis_h(2));
        REQUIRE(rep.frontier.size() >= 2);
        CHECK(rep.frontier[1] == out2);
        CHECK(rep.holds == (out2 == 0));
    }
    CHECK(check_minimal_domain(H, Element{0, 0, 1}, 1, 2).holds);
}

TEST_CASE("check_measure_domain") {
    const auto T = fgsw();
    const auto id = check_measure_domain(T, Element{0}, 4);
    for (const auto& v : id.values) CHECK(v == 1);
    const auto r = check_measure_domain(T, Element{1}, 5);
    // Oracle: enumerate every tail c_1..c_m and test 1 + Σc < h_m.
    std::vector<int64_t> sums{0};
    for (int m = 1; m <= 5; ++m) {
        std::vector<int64_t> next;
        for (int64_t s : sums)
            for (const auto& c : T.C(m)) next.push_back(s + c[0]);
        sums = next;
        size_t inside = 0;
        for (int64_t s : sums) inside += (1 + s < fgsw_h(m));
        CHECK(r.values[m - 1] == Rational(static_cast<long>(inside)) / static_cast<long>(sums.size()));
        CHECK(r.values[m - 1] == 1 - rpow(Rational(1, 4), m));
    }
    CHECK(r.ii_iii_agree);
    const auto H = heisenberg_rank_one();
    const auto hz = check_measure_domain(H, Element{0, 0, 1}, 3);
    for (const auto& d : hz.deficits) CHECK(d == 0);
    const auto hx = check_measure_domain(H, Element{1, 0, 0}, 3);
    CHECK(hx.deficits[0] > 0);
    for (size_t i = 1; i < hx.deficits.size(); ++i) CHECK(hx.deficits[i] < hx.deficits[i - 1]);
}

TEST_CASE("telescope") {
    const auto T = fgsw();
    const auto S = telescope(T, {0, 1, 2, 3, 4});
    for (int n = 1; n <= 4; ++n) {
        CHECK(S.C(n) == T.C(n));
        CHECK(S.kappa(n) == T.kappa(n));
        for (const auto& f : T.F(n).elements()) CHECK(cylinder_measure(S, f, n) == cylinder_measure(T, f, n));
    }
    const CFPoint x{1, Element{3}, {Element{6}, Element{0}, Element{64}}};
    const auto y = iota(T, {0, 1, 2, 3, 4}, x);
    REQUIRE(y);
    CHECK(same_point(T, *y, x));
    const auto S2 = telescope(T, {0, 2, 4});
    CHECK(S2.C(1).size() == 16);
    CHECK(S2.kappa(1) == convolve(T.kappa(1), T.kappa(2)));
}

TEST_CASE("reduce") {
    const auto T = fgsw();
    const auto same = reduce(T, [](int) { return std::optional<std::vector<Element>>{}; }, 6);
    CHECK(same.scaling == 1);
    for (int n = 1; n <= 3; ++n) CHECK(same.params.C(n) == T.C(n));
    SubsetRule halves = [&](int n) -> std::optional<std::vector<Element>> {
        return std::vector<Element>{Element{0}, Element{fgsw_h(n - 1)}};
    };
    CHECK_THROWS_AS(reduce(T, halves, 6), Error);
    SubsetRule three = [](int n) -> std::optional<std::vector<Element>> {
        if (n == 1) return ints({0, 1, 4});
        return std::nullopt;
    };
    const auto r = reduce(T, three, 6);
    CHECK(r.scaling == Rational(3, 4));
    CHECK(r.params.nu(1, Element{0}) == Rational(4, 3) * T.nu(1, Element{0}));
    CHECK(r.params.nu(2, Element{0}) == Rational(4, 3) * T.nu(2, Element{0}));
    CHECK(validate_params(r.params, 6).ok);
}

TEST_CASE("cylinder_measure") {
    const auto T = fgsw();
    for (int n = 0; n <= 4; ++n)
        for (const auto& f : T.F(n).elements()) CHECK(cylinder_measure(T, f, n) == rpow(Rational(1, 4), n));
    CHECK_THROWS_AS(cylinder_measure(T, Element{6}, 1), Error);
}

TEST_CASE("act") {
    const auto T = fgsw();
    const std::vector<Element> tail{Element{1}, Element{6}, Element{16}};
    const CFPoint x{0, Element{0}, tail};
    const auto y = act(T, Element{1}, x);
    REQUIRE(y);
    CHECK(same_point(T, *y, CFPoint{0, Element{1}, tail}));
    const CFPoint x1{1, Element{5}, {Element{6}, Element{64}}};
    const auto y1 = act(T, Element{1}, x1);
    REQUIRE(y1);
    CHECK(same_point(T, *y1, CFPoint{2, Element{12}, {Element{64}}}));
    // The top of F_1 with an all-max tail cannot absorb +1 within the horizon.
    CHECK_FALSE(act(T, Element{1}, CFPoint{1, Element{5}, {Element{22}}}));
}

TEST_CASE("rn_cocycle and rn_derivative") {
    const auto T = fgsw();
    const CFPoint x{0, Element{0}, {Element{1}, Element{6}, Element{16}}};
    CHECK(rn_cocycle(T, x, x) == 1);
    for (int64_t g = -3; g <= 3; ++g)
        if (auto d = rn_derivative(T, Element{g}, x)) CHECK(*d == 1);
    const auto Z = GroupCtx::integers();
    const auto k2 = FinMeasure::weighted(Z, ints({0, 6, 16, 22}), {Rational(1, 2), Rational(1, 4), Rational(1, 8), Rational(1, 8)});
    const auto P = fgsw_prefix(k2);
    const CFPoint a{1, Element{3}, {Element{6}}}, b{1, Element{3}, {Element{0}}};
    CHECK(rn_cocycle(P, a, b) == Rational(1, 2));
    CHECK(rn_cocycle(P, b, a) == 2);
}

TEST_CASE("folner_defect") {
    const auto T = fgsw();
    for (int n = 0; n <= 8; ++n) {
        CHECK(folner_defect(T, Element{0}, n) == 0);
        CHECK(folner_defect(T, Element{1}, n) == Rational(2) / fgsw_h(n));
    }
    // Oracle: |F △ gF| / |F| by enumerating the box Π(2^n, 2^n, h_n).
    const auto H = heisenberg_rank_one();
    auto mul = [](const Element& a, const Element& b) { return Element{a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1]}; };
    for (int n = 0; n <= 2; ++n) {
        const int64_t a = int64_t(1) << n, c = heis_h(n);
        auto inside = [&](const Element& e) { return e[0] >= 0 && e[0] < a && e[1] >= 0 && e[1] < a && e[2] >= 0 && e[2] < c; };
        for (const Element g : {Element{1, 0, 0}, Element{0, 1, 0}, Element{0, 0, 1}}) {
            const Element gi{-g[0], -g[1], -g[2] + g[0] * g[1]};
            long out = 0, size = 0;
            for (int64_t x = 0; x < a; ++x)
                for (int64_t y = 0; y < a; ++y)
                    for (int64_t z = 0; z < c; ++z) {
                        const Element f{x, y, z};
                        ++size;
                        out += !inside(mul(g, f));
                        out += !inside(mul(gi, f));
                    }
            CHECK(folner_defect(H, g, n) == Rational(out) / size);
        }
        CHECK(folner_defect(H, Element{0, 1, 0}, n) == 2 * rpow(Rational(1, 2), n));
        CHECK(folner_defect(H, Element{0, 0, 1}, n) == Rational(2) / c);
    }
}

TEST_CASE("haar_totals") {
    const auto Z = z_product_params({2, 3, 2, 2});
    for (const auto& f : haar_totals(Z, 4).factors) CHECK(f == 1);
    const auto H = haar_totals(heisenberg_rank_one(), 3);
    for (int n = 0; n < 3; ++n) {
        const long p = (4L << (2 * n)) - 3;
        CHECK(H.factors[n] == 1 + Rational(9) / (4 * p));
    }
}
