#include "cfforge/factors.hpp"

#include <algorithm>

namespace cf {

Verdict coset_compatibility(const CFParams& T, const Element& g, const Subgroup& gamma, int depth,
                            const Rational& threshold) {
    const GroupCtx& G = T.group();
    if (!G.same(gamma.group())) fail(ErrorKind::Type, "subgroup lives in a different group");
    G.check(g);
    if (depth < 1 || depth > T.c_cap()) fail(ErrorKind::Precondition, "compatibility depth exceeds realizable stages");
    const Element gi = G.inv(g);
    std::vector<Rational> terms;
    for (int n = 1; n <= depth; ++n)
        terms.push_back(mass(T.kappa(n), [&](const Element& c) { return !gamma.member(G.mul(G.mul(gi, c), g)); }));
    return series_verdict(std::move(terms), threshold);
}

StabilizedCoset finite_factor_map(const CFParams& T, const Element& g, const Subgroup& gamma, const CFPoint& x,
                                  int window) {
    const GroupCtx& G = T.group();
    const CosetSpace cs = gamma.cosets();
    StabilizedCoset r;
    Element p = x.f;
    r.trail.push_back(cs.locate(G.mul(p, g)));
    for (const auto& c : x.tail) {
        p = G.mul(p, c);
        r.trail.push_back(cs.locate(G.mul(p, g)));
    }
    size_t i = r.trail.size() - 1;
    while (i > 0 && r.trail[i - 1] == r.trail.back()) --i;
    if (static_cast<int>(r.trail.size() - i) >= std::max(window, 1)) {
        r.coset = r.trail.back();
        r.stabilized_at = x.n + static_cast<int>(i);
    }
    return r;
}

namespace {

// One left-multiplication step of κ_k on a distribution over G/Γ.
std::vector<Rational> push_left(const CFParams& T, const CosetSpace& cs, const std::vector<Rational>& d, int k) {
    std::vector<Rational> out(d.size());
    for (uint32_t i = 0; i < d.size(); ++i) {
        if (d[i] == 0) continue;
        for (const auto& [c, w] : T.kappa(k).atoms()) out[cs.act(c, i)] += d[i] * w;
    }
    return out;
}

// masses[a][b] for 1 <= a <= b <= D: the window is applied right-to-left starting from coset j.
std::vector<std::vector<Rational>> all_window_masses(const CFParams& T, const CosetSpace& cs, uint32_t j, int D) {
    std::vector<std::vector<Rational>> m(D + 2, std::vector<Rational>(D + 2));
    for (int b = 1; b <= D; ++b) {
        std::vector<Rational> d(cs.size());
        d[j] = 1;
        for (int a = b; a >= 1; --a) {
            d = push_left(T, cs, d, a);
            m[a][b] = 1 - d[j];
        }
    }
    return m;
}

std::vector<std::pair<int, int>> schedule_windows(int s, int D, bool growth) {
    std::vector<std::pair<int, int>> w;
    int q = s, len = 1;
    while (q + len <= D) {
        w.emplace_back(q + 1, q + len);
        q += len;
        if (growth) ++len;
    }
    return w;
}

}  // namespace

Rational window_mass(const CFParams& T, const CosetSpace& cs, uint32_t j, int a, int b) {
    if (a < 1 || b < a || b > T.c_cap()) fail(ErrorKind::Precondition, "window outside realizable stages");
    std::vector<Rational> d(cs.size());
    d[j] = 1;
    for (int k = b; k >= a; --k) d = push_left(T, cs, d, k);
    return 1 - d[j];
}

FactorReport finite_factor_scan(const CFParams& T, const Subgroup& gamma, const ScanOptions& opt) {
    const int D = opt.max_depth;
    if (D < 1 || D > T.c_cap()) fail(ErrorKind::Precondition, "scan depth exceeds realizable stages");
    const CosetSpace cs = gamma.cosets();
    FactorReport r;
    r.target = gamma.describe();
    r.index = cs.size();
    std::vector<std::vector<std::vector<Rational>>> M;
    for (uint32_t j = 0; j < cs.size(); ++j) M.push_back(all_window_masses(T, cs, j, D));

    bool first = true;
    for (int a = 1; a <= D; ++a)
        for (int b = a; b <= D; ++b) {
            WindowEvidence ev{a, b, M[0][a][b], 0};
            for (uint32_t j = 1; j < cs.size(); ++j)
                if (M[j][a][b] < ev.min_mass) {
                    ev.min_mass = M[j][a][b];
                    ev.argmin = j;
                }
            if (first || ev.min_mass < r.evidence_min) r.evidence_min = ev.min_mass;
            first = false;
            r.evidence.push_back(ev);
        }

    const int S = opt.max_offset < 0 ? D - 2 : std::min(opt.max_offset, D - 2);
    for (uint32_t j = 0; j < cs.size() && !r.positive; ++j)
        for (int s = 0; s <= S && !r.positive; ++s)
            for (bool growth : {false, true}) {
                const auto W = schedule_windows(s, D, growth);
                if (W.size() < 2) continue;
                bool ok = true;
                for (size_t k = 0; k < W.size() && ok; ++k)
                    if (M[j][W[k].first][W[k].second] >= pow2(-static_cast<int>(k + 1))) ok = false;
                if (!ok) continue;
                r.positive = true;
                r.coset = j;
                r.coset_rep = cs.rep(j);
                r.telescoping = {0};
                if (s > 0) r.telescoping.push_back(s);
                for (const auto& w : W) {
                    r.telescoping.push_back(w.second);
                    r.window_masses.push_back(M[j][w.first][w.second]);
                }
                break;
            }

    Verdict v;
    v.depth = D;
    if (r.positive) {
        v = series_verdict(r.window_masses, default_threshold(), 1);
        const bool zero = std::all_of(r.window_masses.begin(), r.window_masses.end(), [](const Rational& q) { return q == 0; });
        v.tag = zero ? VerdictTag::TermwiseZero : VerdictTag::ConvergentIndicated;
        v.note = "window masses below 2^-k along the reported telescoping";
    } else {
        for (const auto& ev : r.evidence) v.terms.push_back(ev.min_mass);
        if (r.evidence_min > 0) {
            v.tag = VerdictTag::DivergentIndicated;
            v.lower_bound = r.evidence_min;
            v.note = "every window mass, over all cosets, is bounded below";
        } else {
            v.note = "no admissible schedule found within depth";
        }
    }
    r.verdict = v;
    return r;
}

TotalErgodicityReport total_ergodicity_scan(const CFParams& T, const std::vector<Subgroup>& subgroups,
                                            const ScanOptions& opt) {
    TotalErgodicityReport r;
    r.totally_ergodic_relative = true;
    for (const auto& s : subgroups) {
        if (s.index() < 2) fail(ErrorKind::Precondition, "subgroup " + s.describe() + " is not proper");
        r.scans.push_back(finite_factor_scan(T, s, opt));
        if (r.scans.back().verdict.tag != VerdictTag::DivergentIndicated) r.totally_ergodic_relative = false;
    }
    return r;
}

}  // namespace cf
