#include <doctest.h>

#include <random>

#include "cfforge/catalog.hpp"

using namespace cf;

namespace {

std::vector<Element> ints(std::initializer_list<int64_t> xs) {
    std::vector<Element> v;
    for (auto x : xs) v.push_back(Element{x});
    return v;
}

}  // namespace

TEST_CASE("convolve") {
    const auto Z = GroupCtx::integers();
    const auto k = FinMeasure::weighted(Z, ints({0, 3, 7}), {Rational(1, 2), Rational(1, 3), Rational(1, 6)});
    CHECK(convolve(FinMeasure::delta(Z, Element{0}), k) == k);
    const auto u = convolve(FinMeasure::uniform(Z, ints({0, 1})), FinMeasure::uniform(Z, ints({0, 2})));
    CHECK(u == FinMeasure::uniform(Z, ints({0, 1, 2, 3})));
    const auto T = fgsw();
    const auto k12 = convolve(T.kappa(1), T.kappa(2));
    CHECK(k12.size() == 16);
    for (const auto& [e, w] : k12.atoms()) CHECK(w == Rational(1, 16));
}

TEST_CASE("mass") {
    const auto T = fgsw();
    const auto& k = T.kappa(1);
    CHECK(mass(k, [](const Element&) { return true; }) == k.total());
    CHECK(mass(k, [](const Element&) { return false; }) == 0);
    CHECK(mass(k, [](const Element& e) { return e[0] % 2 == 0; }) == Rational(1, 2));
}

TEST_CASE("normalize and scale") {
    const auto Z = GroupCtx::integers();
    const auto p = FinMeasure::uniform(Z, ints({2, 5, 9}));
    CHECK(normalize(p) == p);
    const auto w = normalize(FinMeasure::weighted(Z, ints({0, 1}), {Rational(1), Rational(3)}));
    CHECK(w.at(Element{0}) == Rational(1, 4));
    CHECK(w.at(Element{1}) == Rational(3, 4));
    const auto T = fgsw();
    const auto A = restrict_to(T.kappa(1), [](const Element& e) { return e[0] <= 1; });
    CHECK(A.total() == Rational(1, 2));
    CHECK(normalize(A) == FinMeasure::uniform(Z, ints({0, 1})));
    CHECK(scale(p, Rational(3)).total() == 3);
}

TEST_CASE("zero atoms are dropped and weights stay canonical") {
    const auto Z = GroupCtx::integers();
    FinMeasure m(Z);
    m.add(Element{1}, Rational(1, 2));
    m.add(Element{1}, Rational(-1, 2));
    CHECK(m.empty());
    m.add(Element{2}, Rational(2) / 4);
    CHECK(m.at(Element{2}).get_str() == "1/2");
}

TEST_CASE("convolution algebra on random triples") {
    std::mt19937_64 rng(3);
    const auto Z = GroupCtx::integers();
    const auto H = GroupCtx::heisenberg();
    auto rand_measure = [&](const GroupCtx& g) {
        FinMeasure m(g);
        const int k = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < k; ++i) {
            Element e = g.identity();
            for (int j = 0; j < e.size(); ++j) e[j] = static_cast<int64_t>(rng() % 7) - 3;
            m.add(e, Rational(static_cast<long>(1 + rng() % 5)) / static_cast<long>(1 + rng() % 6));
        }
        return m;
    };
    for (int t = 0; t < 200; ++t) {
        const auto& g = t % 2 ? H : Z;
        const auto a = rand_measure(g), b = rand_measure(g), c = rand_measure(g);
        CHECK(convolve(convolve(a, b), c) == convolve(a, convolve(b, c)));
        CHECK(convolve(a, b).total() == a.total() * b.total());
        if (t % 2 == 0) CHECK(convolve(a, b) == convolve(b, a));
        // Pushforward under the automorphism x ↦ h x h^-1 preserves total mass.
        const Element h = t % 2 ? Element{1, 2, 0} : Element{4};
        CHECK(map_atoms(a, [&](const Element& e) { return g.conj(h, e); }).total() == a.total());
    }
}
