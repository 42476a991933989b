#include "properties.hpp"

#include <functional>
#include <random>
#include <sstream>

#include "cfforge/catalog.hpp"

namespace cf::props {

namespace {

using Rng = std::mt19937_64;

int uni(Rng& r, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(r); }

// Nonuniform parameter families over Z: fgsw with random κ² weights, or a product odometer with random κ.
CFParams random_params(Rng& r) {
    if (uni(r, 0, 1) == 0) {
        std::vector<Rational> p;
        for (int n = 0; n < 8; ++n) p.push_back(Rational(uni(r, 1, 7)) / 8);
        return fgsw_split([p](int n) { return p[(n - 1) % p.size()]; }, 8);
    }
    std::vector<int64_t> a;
    std::vector<std::vector<Rational>> w;
    for (int n = 0; n < 7; ++n) {
        a.push_back(uni(r, 2, 3));
        std::vector<Rational> wn;
        Rational tot = 0;
        for (int i = 0; i < a.back(); ++i) {
            wn.push_back(uni(r, 1, 9));
            tot += wn.back();
        }
        for (auto& x : wn) x /= tot;
        w.push_back(wn);
    }
    return z_product_params(a, w);
}

Element random_in(Rng& r, const Shape& F) {
    if (auto iv = F.interval()) return Element{std::uniform_int_distribution<int64_t>(iv->first, iv->second - 1)(r)};
    if (auto bx = F.box()) {
        auto d = [&](int64_t L) { return std::uniform_int_distribution<int64_t>(0, L - 1)(r); };
        return Element{d((*bx)[0]), d((*bx)[1]), d((*bx)[2])};
    }
    const auto e = F.elements();
    return e[std::uniform_int_distribution<size_t>(0, e.size() - 1)(r)];
}

Element random_c(Rng& r, const CFParams& T, int k) {
    const auto& C = T.C(k);
    return C[std::uniform_int_distribution<size_t>(0, C.size() - 1)(r)];
}

CFPoint random_point(Rng& r, const CFParams& T, int n, int depth) {
    CFPoint x;
    x.n = n;
    x.f = random_in(r, T.F(n));
    for (int k = n + 1; k <= n + depth; ++k) x.tail.push_back(random_c(r, T, k));
    return x;
}

std::string show(const CFPoint& x) {
    std::ostringstream os;
    os << "(n=" << x.n << "; " << x.f.str();
    for (const auto& c : x.tail) os << ", " << c.str();
    os << ")";
    return os.str();
}

struct Runner {
    PropResult res;
    int target;
    explicit Runner(std::string name, int cases) : target(cases) { res.name = std::move(name); }
    // body returns: 1 pass, 0 fail (with message), -1 undefined (not counted)
    void run(const std::function<int(std::string&)>& body) {
        for (int attempt = 0; res.cases < target && attempt < 50 * target; ++attempt) {
            std::string msg;
            const int v = body(msg);
            if (v < 0) continue;
            ++res.cases;
            if (v == 0) {
                ++res.failures;
                if (res.first_failure.empty()) res.first_failure = msg;
            }
        }
    }
};

// ρ at the common base stage straight from the product formula, without re-basing.
Rational rho_formula(const CFParams& T, const CFPoint& x, const CFPoint& y) {
    Rational q = T.nu(x.n, x.f) / T.nu(y.n, y.f);
    for (size_t i = 0; i < x.tail.size(); ++i) {
        const int k = x.n + 1 + static_cast<int>(i);
        q *= T.kappa(k).at(x.tail[i]) / T.kappa(k).at(y.tail[i]);
    }
    return q;
}

}  // namespace

PropResult rn_chain_rule(uint64_t seed, int cases) {
    Rng r(seed);
    Runner run("rn cocycle chain rule", cases);
    run.run([&](std::string& msg) {
        const CFParams T = random_params(r);
        const int n = uni(r, 0, 2), D = uni(r, 2, 4);
        const CFPoint x = random_point(r, T, n, D);
        auto perturb = [&](CFPoint p) {
            if (uni(r, 0, 1)) p.f = random_in(r, T.F(n));
            for (int i = 0; i < D; ++i)
                if (uni(r, 0, 1)) p.tail[i] = random_c(r, T, n + 1 + i);
            return p;
        };
        const CFPoint y = perturb(x), z = perturb(x);
        const Rational xy = rn_cocycle(T, x, y), yz = rn_cocycle(T, y, z), xz = rn_cocycle(T, x, z);
        // Derivative form: ρ(T_{gh}x, x) = ρ(T_g T_h x, T_h x) ρ(T_h x, x).
        const Element g{uni(r, -3, 3)}, h{uni(r, -3, 3)};
        const auto dh = rn_derivative(T, h, x);
        const auto hx = act(T, h, x);
        const auto dg = hx ? rn_derivative(T, g, *hx) : std::nullopt;
        const auto dgh = rn_derivative(T, T.group().mul(g, h), x);
        if (!dh || !dg || !dgh) return -1;
        const bool ok = xy * yz == xz && xy == rho_formula(T, x, y) && xz == rho_formula(T, x, z) && *dgh == *dg * *dh;
        if (!ok) msg = T.name() + " x=" + show(x) + " y=" + show(y) + " z=" + show(z);
        return ok ? 1 : 0;
    });
    return run.res;
}

PropResult ratio_recursion(uint64_t seed, int cases) {
    Rng r(seed);
    Runner run("ratio recursion mu([1]_n)/mu([1]_{n+1}) = 1/kappa_{n+1}(1)", cases);
    run.run([&](std::string& msg) {
        const CFParams T = random_params(r);
        const int n = uni(r, 0, std::min(T.f_cap(), T.c_cap()) - 1);
        const Element one = T.group().identity();
        const Rational lhs = cylinder_measure(T, one, n) / cylinder_measure(T, one, n + 1);
        const Rational rhs = 1 / T.kappa(n + 1).at(one);
        if (lhs != rhs) msg = T.name() + " n=" + std::to_string(n) + ": " + rat_str(lhs) + " vs " + rat_str(rhs);
        return lhs == rhs ? 1 : 0;
    });
    return run.res;
}

namespace {

std::vector<int> random_l(Rng& r, int cap, int max_step) {
    std::vector<int> l{0};
    while (true) {
        const int next = l.back() + uni(r, 1, max_step);
        if (next > cap) break;
        l.push_back(next);
    }
    return l;
}

}  // namespace

PropResult telescoping_invariance(uint64_t seed, int cases) {
    Rng r(seed);
    Runner run("telescoping cylinder invariance and act compatibility", cases);
    run.run([&](std::string& msg) {
        const CFParams T = random_params(r);
        const int cap = std::min(T.f_cap(), T.c_cap());
        const auto l = random_l(r, cap, 3);
        if (l.size() < 2) return -1;
        const CFParams Tl = telescope(T, l);
        const int n = uni(r, 0, static_cast<int>(l.size()) - 1);
        const Element f = random_in(r, T.F(l[n]));
        if (cylinder_measure(T, f, l[n]) != cylinder_measure(Tl, f, n)) {
            msg = "cylinder mismatch at n=" + std::to_string(n);
            return 0;
        }
        // ι_l(T_g x) = T̃_g ι_l(x) where both sides are defined.
        const CFPoint x = random_point(r, T, 0, cap);
        const Element g{uni(r, -4, 4)};
        const auto gx = act(T, g, x);
        const auto ix = iota(T, l, x);
        if (!gx || !ix) return -1;
        const auto lhs = iota(T, l, *gx);
        const auto rhs = act(Tl, g, *ix);
        if (!lhs || !rhs) return -1;
        if (!same_point(Tl, *lhs, *rhs)) {
            msg = "iota/act mismatch for x=" + show(x);
            return 0;
        }
        return 1;
    });
    return run.res;
}

PropResult telescoping_composition(uint64_t seed, int cases) {
    Rng r(seed);
    Runner run("telescoping composition iota_m . iota_l = iota_{l.m}", cases);
    run.run([&](std::string& msg) {
        const CFParams T = random_params(r);
        const int cap = std::min(T.f_cap(), T.c_cap());
        const auto l = random_l(r, cap, 2);
        if (l.size() < 3) return -1;
        const auto m = random_l(r, static_cast<int>(l.size()) - 1, 2);
        if (m.size() < 2) return -1;
        const CFParams A = telescope(telescope(T, l), m);
        const CFParams B = telescope(T, compose_l(l, m));
        for (int k = 1; k < static_cast<int>(m.size()); ++k)
            if (!(A.kappa(k) == B.kappa(k)) || A.C(k) != B.C(k)) {
                msg = "stage data differ at k=" + std::to_string(k);
                return 0;
            }
        const int k = uni(r, 0, static_cast<int>(m.size()) - 1);
        const Element f = random_in(r, B.F(k));
        if (A.nu(k, f) != B.nu(k, f)) {
            msg = "nu differs";
            return 0;
        }
        const CFPoint x = random_point(r, T, 0, cap);
        const auto il = iota(T, l, x);
        if (!il) return -1;
        const auto lhs = iota(telescope(T, l), m, *il);
        const auto rhs = iota(T, compose_l(l, m), x);
        if (!lhs || !rhs) return -1;
        if (!(*lhs == *rhs)) {
            msg = "points differ for x=" + show(x);
            return 0;
        }
        return 1;
    });
    return run.res;
}

PropResult reduction_scaling(uint64_t seed, int cases) {
    Rng r(seed);
    Runner run("reduction finite-depth scaling", cases);
    run.run([&](std::string& msg) {
        const CFParams T = random_params(r);
        const int cap = std::min(T.f_cap(), T.c_cap());
        // Reduced stages are followed by at least two untouched ones so the defect series ends in zeros.
        const int reduced_stages = uni(r, 1, 2);
        const int D = uni(r, reduced_stages + 2, std::min(cap, 5));
        const Element one = T.group().identity();
        std::vector<std::vector<Element>> A;
        for (int n = 1; n <= reduced_stages; ++n) {
            // 1_G plus a random nonempty set of other copies (|A_n| > 1 keeps the reduction valid).
            std::vector<Element> a{one};
            const auto& C = T.C(n);
            const size_t forced = std::uniform_int_distribution<size_t>(1, C.size() - 1)(r);
            for (size_t i = 1; i < C.size(); ++i)
                if (i == forced || uni(r, 0, 1)) a.push_back(C[i]);
            A.push_back(a);
        }
        const SubsetRule rule = [A](int n) -> std::optional<std::vector<Element>> {
            if (n <= static_cast<int>(A.size())) return A[n - 1];
            return std::nullopt;
        };
        const Reduction red = reduce(T, rule, D, Rational(10));
        // Cylinder of (1; a_1, …, a_D) in both spaces: ν_D(a_1···a_D) = Π κ(a_k) and ν'_D = Π κ(a_k)/κ(A_k).
        Element f = one;
        Rational prod = 1, prod_red = 1, scaling = 1;
        for (int k = 1; k <= D; ++k) {
            const auto& Ck = red.params.C(k);
            const Element a = Ck[std::uniform_int_distribution<size_t>(0, Ck.size() - 1)(r)];
            f = T.group().mul(f, a);
            Rational kA = 0;
            for (const auto& e : Ck) kA += T.kappa(k).at(e);
            prod *= T.kappa(k).at(a);
            prod_red *= T.kappa(k).at(a) / kA;
            scaling *= kA;
        }
        const bool base = T.nu(D, f) == prod, reduced = red.params.nu(D, f) == prod_red,
                   scaled = red.scaling == scaling && T.nu(D, f) == red.scaling * red.params.nu(D, f),
                   valid = validate_params(red.params, std::min(D, red.params.f_cap() - 1)).ok;
        const bool ok = base && reduced && scaled && valid;
        if (!ok)
            msg = T.name() + " D=" + std::to_string(D) + " f=" + f.str() + (base ? "" : " base") + (reduced ? "" : " reduced") +
                  (scaled ? "" : " scaled") + (valid ? "" : " valid");
        return ok ? 1 : 0;
    });
    return run.res;
}

PropResult act_group_law(uint64_t seed, int cases) {
    Rng r(seed);
    Runner run("act group law on Z and H3", cases);
    const CFParams H = heisenberg_rank_one(4);
    run.run([&](std::string& msg) {
        const bool heis = uni(r, 0, 1) == 1;
        const CFParams T = heis ? H : random_params(r);
        const GroupCtx& G = T.group();
        const int n = heis ? uni(r, 0, 1) : uni(r, 0, 2);
        const CFPoint x = random_point(r, T, n, heis ? 3 - n : 4);
        auto small = [&]() {
            if (!heis) return Element{uni(r, -5, 5)};
            return Element{uni(r, -1, 1), uni(r, -1, 1), uni(r, -3, 3)};
        };
        const Element g = small(), h = small();
        const auto hx = act(T, h, x);
        if (!hx) return -1;
        const auto ghx = act(T, g, *hx);
        const auto gh_x = act(T, G.mul(g, h), x);
        if (!ghx || !gh_x) return -1;
        if (!same_point(T, *ghx, *gh_x)) {
            msg = T.name() + " g=" + g.str() + " h=" + h.str() + " x=" + show(x);
            return 0;
        }
        return 1;
    });
    return run.res;
}

PropResult convolution_mass(uint64_t seed, int cases) {
    Rng r(seed);
    Runner run("convolution mass multiplicativity and associativity", cases);
    const GroupCtx Z2 = GroupCtx::lattice(2), H = GroupCtx::heisenberg();
    run.run([&](std::string& msg) {
        const GroupCtx& G = uni(r, 0, 1) ? Z2 : H;
        auto rand_measure = [&]() {
            FinMeasure m(G);
            const int k = uni(r, 1, 5);
            for (int i = 0; i < k; ++i) {
                const Element e = G.dim() == 2 ? Element{uni(r, -3, 3), uni(r, -3, 3)}
                                               : Element{uni(r, -2, 2), uni(r, -2, 2), uni(r, -3, 3)};
                m.add(e, Rational(uni(r, 1, 12)) / uni(r, 1, 12));
            }
            return m;
        };
        const FinMeasure a = rand_measure(), b = rand_measure(), c = rand_measure();
        const bool mult = convolve(a, b).total() == a.total() * b.total();
        const bool assoc = convolve(convolve(a, b), c) == convolve(a, convolve(b, c));
        if (!mult || !assoc) msg = std::string(mult ? "" : "mass ") + (assoc ? "" : "assoc ") + "in " + G.name();
        return mult && assoc ? 1 : 0;
    });
    return run.res;
}

std::vector<PropResult> all_suites(uint64_t seed, int cases) {
    return {rn_chain_rule(seed, cases),        ratio_recursion(seed + 1, cases),   telescoping_invariance(seed + 2, cases),
            telescoping_composition(seed + 3, cases), reduction_scaling(seed + 4, cases), act_group_law(seed + 5, cases),
            convolution_mass(seed + 6, cases)};
}

}  // namespace cf::props
