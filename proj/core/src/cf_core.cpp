#include <algorithm>
#include <map>
#include <mutex>
#include <unordered_set>

#include "cfforge/cf.hpp"

namespace cf {

// ---------------------------------------------------------------- shapes

std::vector<Element> Shape::elements(size_t cap) const {
    if (size() > BigInt(static_cast<unsigned long>(cap)))
        fail(ErrorKind::Resource, "shape with " + size().get_str() + " elements exceeds enumeration cap");
    std::vector<Element> out;
    for_each([&](const Element& e) { out.push_back(e); });
    return out;
}

namespace {

class ExplicitShape final : public Shape {
public:
    ExplicitShape(const GroupCtx& g, std::vector<Element> elems) : elems_(std::move(elems)) {
        for (const auto& e : elems_) g.check(e);
        std::sort(elems_.begin(), elems_.end());
        elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
        set_.insert(elems_.begin(), elems_.end());
        if (g.kind() == GroupKind::IntLattice && g.dim() == 1 && !elems_.empty() &&
            elems_.back()[0] - elems_.front()[0] + 1 == static_cast<int64_t>(elems_.size()))
            iv_ = std::make_pair(elems_.front()[0], elems_.back()[0] + 1);
    }
    bool contains(const Element& e) const override { return set_.count(e) > 0; }
    BigInt size() const override { return BigInt(static_cast<unsigned long>(elems_.size())); }
    void for_each(const std::function<void(const Element&)>& f) const override {
        for (const auto& e : elems_) f(e);
    }
    std::optional<std::pair<int64_t, int64_t>> interval() const override { return iv_; }

private:
    std::vector<Element> elems_;
    std::unordered_set<Element, ElementHash> set_;
    std::optional<std::pair<int64_t, int64_t>> iv_;
};

class IntervalShape final : public Shape {
public:
    IntervalShape(int64_t lo, int64_t hi) : lo_(lo), hi_(hi) {
        if (hi <= lo) fail(ErrorKind::Usage, "empty interval shape");
    }
    bool contains(const Element& e) const override { return e.n == 1 && e[0] >= lo_ && e[0] < hi_; }
    BigInt size() const override { return BigInt(std::to_string(hi_ - lo_)); }
    void for_each(const std::function<void(const Element&)>& f) const override {
        for (int64_t i = lo_; i < hi_; ++i) f(Element{i});
    }
    std::optional<std::pair<int64_t, int64_t>> interval() const override { return std::make_pair(lo_, hi_); }

private:
    int64_t lo_, hi_;
};

class BoxShape final : public Shape {
public:
    BoxShape(int64_t a, int64_t b, int64_t c) : a_(a), b_(b), c_(c) {
        if (a <= 0 || b <= 0 || c <= 0) fail(ErrorKind::Usage, "empty box shape");
    }
    bool contains(const Element& e) const override {
        return e.n == 3 && e[0] >= 0 && e[0] < a_ && e[1] >= 0 && e[1] < b_ && e[2] >= 0 && e[2] < c_;
    }
    BigInt size() const override {
        return BigInt(std::to_string(a_)) * BigInt(std::to_string(b_)) * BigInt(std::to_string(c_));
    }
    void for_each(const std::function<void(const Element&)>& f) const override {
        for (int64_t x = 0; x < a_; ++x)
            for (int64_t y = 0; y < b_; ++y)
                for (int64_t z = 0; z < c_; ++z) f(Element{x, y, z});
    }
    std::optional<std::array<int64_t, 3>> box() const override { return std::array<int64_t, 3>{a_, b_, c_}; }

private:
    int64_t a_, b_, c_;
};

}  // namespace

std::shared_ptr<const Shape> explicit_shape(const GroupCtx& g, std::vector<Element> elems) {
    return std::make_shared<ExplicitShape>(g, std::move(elems));
}
std::shared_ptr<const Shape> interval_shape(int64_t lo, int64_t hi) { return std::make_shared<IntervalShape>(lo, hi); }
std::shared_ptr<const Shape> box_shape(int64_t a, int64_t b, int64_t c) { return std::make_shared<BoxShape>(a, b, c); }

// ---------------------------------------------------------------- sources

Rational StageSource::nu_total(int n) const {
    if (auto w = uniform_nu(n)) return *w * Rational(F(n).size());
    Rational t = 0;
    F(n).for_each([&](const Element& f) { t += nu(n, f); });
    return t;
}

Rational nu_by_decomposition(const StageSource& s, int n, const Element& f,
                             const std::function<Rational(int, const Element&)>& spacer) {
    const GroupCtx& g = s.group();
    if (n == 0) return g.is_identity(f) ? Rational(1) : Rational(0);
    if (!s.F(n).contains(f)) return 0;
    const Shape& prev = s.F(n - 1);
    for (const auto& c : s.C(n)) {
        const Element fp = g.mul(f, g.inv(c));
        if (prev.contains(fp)) return s.nu(n - 1, fp) * s.kappa(n).at(c);
    }
    return spacer(n, f);
}

namespace {

class ExplicitSource final : public StageSource {
public:
    ExplicitSource(GroupCtx g, std::string name, std::vector<std::vector<Element>> C, std::vector<FinMeasure> kappa,
                   std::vector<std::vector<Element>> F, std::vector<FinMeasure> nu)
        : g_(std::move(g)), name_(std::move(name)), kappa_(std::move(kappa)), nu_(std::move(nu)) {
        if (C.size() != kappa_.size()) fail(ErrorKind::Usage, "explicit params: |C| and |kappa| differ");
        if (F.size() != nu_.size()) fail(ErrorKind::Usage, "explicit params: |F| and |nu| differ");
        if (F.empty()) fail(ErrorKind::Usage, "explicit params need at least F_0");
        for (auto& c : C) {
            for (const auto& e : c) g_.check(e);
            std::sort(c.begin(), c.end());
            c.erase(std::unique(c.begin(), c.end()), c.end());
        }
        C_ = std::move(C);
        for (auto& f : F) F_.push_back(explicit_shape(g_, std::move(f)));
    }
    const GroupCtx& group() const override { return g_; }
    std::string name() const override { return name_; }
    int c_cap() const override { return static_cast<int>(C_.size()); }
    int f_cap() const override { return static_cast<int>(F_.size()) - 1; }
    const std::vector<Element>& C(int n) const override { return C_[n - 1]; }
    const FinMeasure& kappa(int n) const override { return kappa_[n - 1]; }
    const Shape& F(int n) const override { return *F_[n]; }
    Rational nu(int n, const Element& f) const override { return nu_[n].at(f); }

private:
    GroupCtx g_;
    std::string name_;
    std::vector<std::vector<Element>> C_;
    std::vector<FinMeasure> kappa_;
    std::vector<std::shared_ptr<const Shape>> F_;
    std::vector<FinMeasure> nu_;
};

}  // namespace

CFParams explicit_params(const GroupCtx& g, std::string name, std::vector<std::vector<Element>> C,
                         std::vector<FinMeasure> kappa, std::vector<std::vector<Element>> F, std::vector<FinMeasure> nu) {
    return CFParams(std::make_shared<ExplicitSource>(g, std::move(name), std::move(C), std::move(kappa), std::move(F),
                                                     std::move(nu)));
}

CFParams explicit_params_spacer_fill(const GroupCtx& g, std::string name, std::vector<std::vector<Element>> C,
                                     std::vector<FinMeasure> kappa, std::vector<std::vector<Element>> F,
                                     const std::vector<Rational>& spacer_total) {
    if (F.empty()) fail(ErrorKind::Usage, "explicit params need at least F_0");
    std::vector<FinMeasure> nu;
    nu.push_back(FinMeasure::delta(g, g.identity()));
    for (size_t n = 1; n < F.size(); ++n) {
        if (n > C.size()) fail(ErrorKind::Usage, "spacer fill needs C_n for every F_n");
        FinMeasure m(g);
        std::unordered_set<Element, ElementHash> inF(F[n].begin(), F[n].end());
        std::unordered_set<Element, ElementHash> covered;
        for (const auto& [f, w] : nu[n - 1].atoms())
            for (const auto& c : C[n - 1]) {
                const Element p = g.mul(f, c);
                if (inF.count(p)) {
                    m.add(p, w * kappa[n - 1].at(c));
                    covered.insert(p);
                }
            }
        std::vector<Element> spacers;
        for (const auto& f : F[n])
            if (!covered.count(f)) spacers.push_back(f);
        if (!spacers.empty()) {
            const Rational tot = n < spacer_total.size() ? spacer_total[n] : Rational(0);
            if (tot <= 0) fail(ErrorKind::Usage, "spacer total must be positive at stage " + std::to_string(n));
            for (const auto& f : spacers) m.add(f, tot / static_cast<unsigned long>(spacers.size()));
        }
        nu.push_back(std::move(m));
    }
    return explicit_params(g, std::move(name), std::move(C), std::move(kappa), std::move(F), std::move(nu));
}

static void stage_guard(bool ok, const std::string& what, int n) {
    if (!ok) fail(ErrorKind::Precondition, what + " at stage " + std::to_string(n) + " is beyond the realizable prefix");
}

const std::vector<Element>& CFParams::C(int n) const {
    stage_guard(n >= 1 && n <= c_cap(), "C_n", n);
    return s_->C(n);
}
const FinMeasure& CFParams::kappa(int n) const {
    stage_guard(n >= 1 && n <= c_cap(), "kappa_n", n);
    return s_->kappa(n);
}
const Shape& CFParams::F(int n) const {
    stage_guard(n >= 0 && n <= f_cap(), "F_n", n);
    return s_->F(n);
}
Rational CFParams::nu(int n, const Element& f) const {
    stage_guard(n >= 0 && n <= f_cap(), "nu_n", n);
    return s_->nu(n, f);
}
Rational CFParams::nu_total(int n) const {
    stage_guard(n >= 0 && n <= f_cap(), "nu_n", n);
    return s_->nu_total(n);
}

// ---------------------------------------------------------------- verdicts

std::string tag_name(VerdictTag t) {
    switch (t) {
        case VerdictTag::TermwiseZero: return "TermwiseZero";
        case VerdictTag::ConvergentIndicated: return "ConvergentIndicated";
        case VerdictTag::DivergentIndicated: return "DivergentIndicated";
        case VerdictTag::Inconclusive: return "Inconclusive";
    }
    return "?";
}

Verdict series_verdict(std::vector<Rational> terms, const Rational& threshold, int zero_window) {
    Verdict v;
    v.depth = static_cast<int>(terms.size());
    Rational s = 0;
    for (const auto& t : terms) {
        if (t < 0) fail(ErrorKind::Precondition, "negative series term");
        s += t;
        v.partial_sums.push_back(s);
    }
    v.terms = std::move(terms);
    const int D = v.depth;
    if (D == 0) {
        v.note = "no probes";
        return v;
    }
    int last_nonzero = 0;
    for (int i = 0; i < D; ++i)
        if (v.terms[i] != 0) last_nonzero = i + 1;
    if (D - last_nonzero >= std::min(zero_window, D)) {
        v.tag = VerdictTag::TermwiseZero;
        v.zero_beyond = last_nonzero;
        return v;
    }
    // Probe window: the second half of the probed stages.
    const int w0 = D / 2;
    Rational lo = v.terms[w0], hi = v.terms[w0];
    bool nonincreasing = true;
    for (int i = w0; i < D; ++i) {
        lo = std::min(lo, v.terms[i]);
        hi = std::max(hi, v.terms[i]);
        if (i > w0 && v.terms[i] > v.terms[i - 1]) nonincreasing = false;
    }
    if (lo > 0 && 2 * lo >= hi) {
        v.tag = VerdictTag::DivergentIndicated;
        v.lower_bound = lo;
        v.note = "terms bounded below across the probe window";
    } else if (nonincreasing && (v.terms.back() <= threshold || 2 * v.terms.back() <= v.terms[w0])) {
        v.tag = VerdictTag::ConvergentIndicated;
        v.note = "terms decaying across the probe window";
    }
    return v;
}

// ---------------------------------------------------------------- validation

ValidationReport validate_params(const CFParams& T, int depth, const Rational& threshold) {
    if (depth < 0 || depth > T.c_cap() || depth > T.f_cap())
        fail(ErrorKind::Precondition, "validation depth " + std::to_string(depth) + " exceeds the realizable stages");
    const GroupCtx& g = T.group();
    const Element one = g.identity();
    ValidationReport r;
    r.depth = depth;
    auto invalid = [&](int n, const std::string& msg) {
        r.ok = false;
        r.failure = msg;
        r.failure_stage = n;
        return r;
    };
    if (T.F(0).size() != 1 || !T.F(0).contains(one)) return invalid(0, "F_0 must be {1_G}");
    if (T.nu(0, one) != 1) return invalid(0, "nu_0 must be the point mass at 1_G");
    for (int n = 1; n <= depth; ++n) {
        const auto& C = T.C(n);
        if (C.size() < 2) return invalid(n, "|C_n| must exceed 1");
        if (!std::binary_search(C.begin(), C.end(), one)) return invalid(n, "1_G must lie in C_n");
        if (T.kappa(n).support() != C) return invalid(n, "supp kappa_n must equal C_n");
        if (T.kappa(n).total() != 1) return invalid(n, "kappa_n must be a probability measure");
        if (!T.F(n).contains(one)) return invalid(n, "1_G must lie in F_n");
    }
    for (int n = 0; n < depth; ++n) {
        StageCheck sc;
        sc.n = n;
        const Shape& Fn = T.F(n);
        const Shape& Fn1 = T.F(n + 1);
        const auto& C = T.C(n + 1);
        const FinMeasure& k = T.kappa(n + 1);
        std::unordered_set<Element, ElementHash> seen;
        bool support_ok = true;
        Fn.for_each([&](const Element& f) {
            const Rational nf = T.nu(n, f);
            if (nf <= 0) support_ok = false;
            for (const auto& c : C) {
                const Element p = g.mul(f, c);
                if (sc.inclusion && !Fn1.contains(p)) {
                    sc.inclusion = false;
                    sc.detail = "F_n c not inside F_{n+1}: " + f.str() + "*" + c.str();
                }
                if (!seen.insert(p).second && sc.disjoint) {
                    sc.disjoint = false;
                    sc.detail = "translates F_n c overlap at " + p.str();
                }
                if (sc.measure && T.nu(n + 1, p) != nf * k.at(c)) {
                    sc.measure = false;
                    sc.detail = "nu_{n+1}(fc) != nu_n(f) kappa(c) at " + f.str() + "*" + c.str();
                }
            }
        });
        if (!support_ok) return invalid(n, "supp nu_n must equal F_n");
        if (!(sc.inclusion && sc.disjoint && sc.measure) && r.ok) {
            r.ok = false;
            r.failure = sc.detail;
            r.failure_stage = n;
        }
        r.stages.push_back(sc);
    }
    const auto bound = T.source().kappa_max_bound();
    bool bounded = bound && *bound < 1;
    for (int n = 1; n <= depth; ++n) {
        const Rational mk = T.kappa(n).max_atom();
        r.max_kappa.push_back(mk);
        r.partial_product *= mk;
        if (bound && mk > *bound) bounded = false;
    }
    Verdict v;
    v.depth = depth;
    v.terms = r.max_kappa;
    Rational acc = 1;
    for (const auto& t : r.max_kappa) v.partial_sums.push_back(acc *= t);
    if (r.partial_product < threshold && bounded) {
        v.tag = VerdictTag::ConvergentIndicated;
        v.note = "partial product below threshold with max kappa_n uniformly bounded below 1";
    } else {
        v.note = "partial product " + rat_str(r.partial_product);
    }
    r.max_kappa_product = v;
    return r;
}

MinimalDomainReport check_minimal_domain(const CFParams& T, const Element& g, int n, int depth) {
    const GroupCtx& G = T.group();
    G.check(g);
    if (n < 0 || depth < n || depth > T.f_cap() || depth > T.c_cap())
        fail(ErrorKind::Precondition, "check_minimal_domain needs n <= depth <= realizable stages");
    MinimalDomainReport r;
    // Once g s ∈ F_m, every extension stays inside by F_m C_{m+1} ⊂ F_{m+1}; track the rest only.
    std::vector<Element> frontier;
    T.F(n).for_each([&](const Element& f) {
        if (!T.F(n).contains(G.mul(g, f))) frontier.push_back(f);
    });
    r.frontier.push_back(frontier.size());
    r.checked_to = n;
    if (frontier.empty()) {
        r.holds = true;
        r.m = n;
        return r;
    }
    for (int m = n + 1; m <= depth; ++m) {
        std::vector<Element> next;
        const Shape& Fm = T.F(m);
        for (const auto& s : frontier)
            for (const auto& c : T.C(m)) {
                const Element p = G.mul(s, c);
                if (!Fm.contains(G.mul(g, p))) next.push_back(p);
            }
        if (next.size() > (size_t(1) << 24)) fail(ErrorKind::Resource, "minimal-domain frontier exceeds cap");
        frontier = std::move(next);
        r.frontier.push_back(frontier.size());
        r.checked_to = m;
        if (frontier.empty()) {
            r.holds = true;
            r.m = m;
            return r;
        }
    }
    return r;
}

namespace {

// Pushes a frontier distribution (keyed by g·s) one stage forward and drops what lands in F_m.
std::map<Element, Rational> advance_frontier(const CFParams& T, const std::map<Element, Rational>& d, int m) {
    const GroupCtx& G = T.group();
    std::map<Element, Rational> out;
    const Shape& Fm = T.F(m);
    for (const auto& [e, w] : d)
        for (const auto& [c, k] : T.kappa(m).atoms()) {
            const Element p = G.mul(e, c);
            if (!Fm.contains(p)) out[p] += w * k;
        }
    return out;
}

Rational total_of(const std::map<Element, Rational>& d) {
    Rational t = 0;
    for (const auto& [e, w] : d) t += w;
    return t;
}

bool nonincreasing(const std::vector<Rational>& v) {
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1]) return false;
    return true;
}

}  // namespace

MeasureDomainReport check_measure_domain(const CFParams& T, const Element& g, int depth, const Rational& threshold,
                                         int ii_max_n) {
    const GroupCtx& G = T.group();
    G.check(g);
    if (depth < 1 || depth > T.f_cap() || depth > T.c_cap())
        fail(ErrorKind::Precondition, "check_measure_domain depth exceeds the realizable stages");
    MeasureDomainReport r;
    std::map<Element, Rational> d;
    if (!T.F(0).contains(g)) d[g] = 1;
    for (int m = 1; m <= depth; ++m) {
        d = advance_frontier(T, d, m);
        const Rational out = total_of(d);
        r.values.push_back(1 - out);
        r.deficits.push_back(out);
    }
    bool agree = nonincreasing(r.deficits);
    for (int n = 0; n <= std::min(ii_max_n, depth - 1); ++n) {
        std::map<Element, Rational> e;
        T.F(n).for_each([&](const Element& f) {
            const Element gf = G.mul(g, f);
            if (!T.F(n).contains(gf)) e[gf] += T.nu(n, f);
        });
        const Rational lim = T.nu_total(n);
        r.ii_limits.push_back(lim);
        std::vector<Rational> vals, defs;
        for (int m = n + 1; m <= depth; ++m) {
            e = advance_frontier(T, e, m);
            const Rational out = total_of(e);
            vals.push_back(lim - out);
            defs.push_back(out);
        }
        agree = agree && nonincreasing(defs);
        r.ii_values.push_back(std::move(vals));
    }
    r.ii_iii_agree = agree;
    Verdict v;
    v.depth = depth;
    v.terms = r.deficits;
    v.partial_sums = r.values;
    if (nonincreasing(r.deficits) && r.deficits.back() < threshold) {
        v.tag = VerdictTag::ConvergentIndicated;
        v.note = "deficit monotone and below threshold";
    } else if (r.deficits.back() > 0 && r.deficits.back() >= r.deficits.front()) {
        v.tag = VerdictTag::DivergentIndicated;
        v.lower_bound = r.deficits.back();
        v.note = "deficit not decreasing";
    }
    r.verdict = v;
    return r;
}

// ---------------------------------------------------------------- points

void validate_point(const CFParams& T, const CFPoint& x) {
    if (x.n < 0 || x.n > T.f_cap()) fail(ErrorKind::Precondition, "point base stage out of range");
    if (!T.F(x.n).contains(x.f)) fail(ErrorKind::Precondition, "point coordinate f is not in F_n");
    for (size_t i = 0; i < x.tail.size(); ++i) {
        const int k = x.n + 1 + static_cast<int>(i);
        const auto& C = T.C(k);
        if (!std::binary_search(C.begin(), C.end(), x.tail[i]))
            fail(ErrorKind::Precondition, "tail entry " + x.tail[i].str() + " is not in C_" + std::to_string(k));
    }
}

CFPoint rebase(const CFParams& T, const CFPoint& x, int m) {
    if (m < x.n || m > x.horizon()) fail(ErrorKind::Precondition, "rebase target outside [n, horizon]");
    const GroupCtx& G = T.group();
    CFPoint y;
    y.n = m;
    y.f = x.f;
    for (int k = x.n; k < m; ++k) y.f = G.mul(y.f, x.tail[k - x.n]);
    y.tail.assign(x.tail.begin() + (m - x.n), x.tail.end());
    return y;
}

bool same_point(const CFParams& T, const CFPoint& x, const CFPoint& y) {
    const int k = std::max(x.n, y.n);
    if (k > x.horizon() || k > y.horizon()) fail(ErrorKind::Precondition, "points share no common stage");
    const CFPoint a = rebase(T, x, k), b = rebase(T, y, k);
    if (!(a.f == b.f)) return false;
    const size_t L = std::min(a.tail.size(), b.tail.size());
    return std::equal(a.tail.begin(), a.tail.begin() + L, b.tail.begin());
}

std::optional<CFPoint> act(const CFParams& T, const Element& g, const CFPoint& x) {
    const GroupCtx& G = T.group();
    G.check(g);
    Element f = x.f;
    for (int m = x.n; m <= x.horizon() && m <= T.f_cap(); ++m) {
        if (m > x.n) f = G.mul(f, x.tail[m - x.n - 1]);
        const Element gf = G.mul(g, f);
        if (T.F(m).contains(gf)) {
            CFPoint y;
            y.n = m;
            y.f = gf;
            y.tail.assign(x.tail.begin() + (m - x.n), x.tail.end());
            return y;
        }
    }
    return std::nullopt;
}

Rational rn_cocycle(const CFParams& T, const CFPoint& x, const CFPoint& y) {
    if (x.horizon() != y.horizon()) fail(ErrorKind::Precondition, "points not tail-equivalent at the given depth");
    int k = std::max(x.n, y.n);
    for (int j = k + 1; j <= x.horizon(); ++j)
        if (!(x.tail[j - x.n - 1] == y.tail[j - y.n - 1])) k = j;
    const CFPoint a = rebase(T, x, k), b = rebase(T, y, k);
    const Rational na = T.nu(k, a.f), nb = T.nu(k, b.f);
    if (na == 0 || nb == 0) fail(ErrorKind::Precondition, "point outside the support of nu_n");
    return na / nb;
}

std::optional<Rational> rn_derivative(const CFParams& T, const Element& g, const CFPoint& x) {
    auto y = act(T, g, x);
    if (!y) return std::nullopt;
    return rn_cocycle(T, *y, x);
}

Rational cylinder_measure(const CFParams& T, const Element& f, int n) {
    if (!T.F(n).contains(f)) fail(ErrorKind::Precondition, "cylinder base " + f.str() + " is not in F_n");
    return T.nu(n, f);
}

namespace {

BigInt count_translate_inside(const Shape& F, const Element& g) {
    if (auto iv = F.interval(); iv && g.n == 1) {
        const int64_t len = iv->second - iv->first;
        const int64_t s = std::llabs(g[0]);
        return BigInt(std::to_string(std::max<int64_t>(0, len - s)));
    }
    if (auto bx = F.box(); bx && g.n == 3) {
        // g·(x,y,z) = (gx+x, gy+y, gz+z+gx·y) stays in Π(A,B,C).
        const auto [A, B, C] = *bx;
        auto overlap = [](int64_t L, int64_t t) -> int64_t { return std::max<int64_t>(0, L - std::llabs(t)); };
        BigInt total = 0;
        const BigInt ox(std::to_string(overlap(A, g[0])));
        for (int64_t y = 0; y < B; ++y) {
            if (g[1] + y < 0 || g[1] + y >= B) continue;
            const int64_t oz = overlap(C, add_ck(g[2], mul_ck(g[0], y)));
            total += ox * BigInt(std::to_string(oz));
        }
        return total;
    }
    return -1;
}

}  // namespace

Rational folner_defect(const CFParams& T, const Element& g, int n) {
    const GroupCtx& G = T.group();
    G.check(g);
    const Shape& F = T.F(n);
    const Element gi = G.inv(g);
    if (T.source().uniform_nu(n)) {
        const BigInt in_g = count_translate_inside(F, g), in_gi = count_translate_inside(F, gi);
        if (in_g >= 0 && in_gi >= 0) {
            const BigInt sz = F.size();
            Rational q(2 * sz - in_g - in_gi, sz);
            q.canonicalize();
            return q;
        }
    }
    // ν_n(F ∖ g^-1F) + ν_n(F ∖ gF), normalized by ν_n(F).
    Rational out = 0, tot = 0;
    F.for_each([&](const Element& f) {
        const Rational w = T.nu(n, f);
        tot += w;
        if (!F.contains(G.mul(g, f))) out += w;
        if (!F.contains(G.mul(gi, f))) out += w;
    });
    return out / tot;
}

HaarTotals haar_totals(const CFParams& T, int N) {
    if (N < 0 || N > T.f_cap() || N > T.c_cap()) fail(ErrorKind::Precondition, "haar_totals depth exceeds realizable stages");
    HaarTotals h;
    Rational acc = 1;
    for (int n = 0; n < N; ++n) {
        Rational f(T.F(n + 1).size(), T.F(n).size() * BigInt(static_cast<unsigned long>(T.C(n + 1).size())));
        f.canonicalize();
        h.factors.push_back(f);
        h.partial_products.push_back(acc *= f);
        const Rational u(1, static_cast<unsigned long>(T.C(n + 1).size()));
        for (const auto& [c, w] : T.kappa(n + 1).atoms())
            if (w != u) h.uniform_kappa = false;
    }
    for (int n = 0; n <= N; ++n) h.nu_totals.push_back(T.nu_total(n));
    return h;
}

// ---------------------------------------------------------------- telescoping

namespace {

class TelescopedSource final : public StageSource {
public:
    TelescopedSource(CFParams T, std::vector<int> l) : T_(std::move(T)), l_(std::move(l)) {
        if (l_.empty() || l_[0] != 0) fail(ErrorKind::Usage, "telescoping sequence must start with l_0 = 0");
        for (size_t i = 1; i < l_.size(); ++i)
            if (l_[i] <= l_[i - 1]) fail(ErrorKind::Usage, "telescoping sequence must be strictly increasing");
        if (l_.back() > T_.c_cap()) fail(ErrorKind::Precondition, "telescoping exceeds realizable stages");
        fcap_ = 0;
        while (fcap_ + 1 < static_cast<int>(l_.size()) && l_[fcap_ + 1] <= T_.f_cap()) ++fcap_;
    }
    const GroupCtx& group() const override { return T_.group(); }
    std::string name() const override { return T_.name() + "/telescoped"; }
    int c_cap() const override { return static_cast<int>(l_.size()) - 1; }
    int f_cap() const override { return fcap_; }
    const std::vector<Element>& C(int n) const override { return stage(n).C; }
    const FinMeasure& kappa(int n) const override { return stage(n).kappa; }
    const Shape& F(int n) const override { return T_.F(l_[n]); }
    Rational nu(int n, const Element& f) const override { return T_.nu(l_[n], f); }
    Rational nu_total(int n) const override { return T_.nu_total(l_[n]); }
    std::optional<Rational> uniform_nu(int n) const override { return T_.source().uniform_nu(l_[n]); }
    std::optional<Rational> kappa_max_bound() const override { return T_.source().kappa_max_bound(); }

private:
    struct Stage {
        std::vector<Element> C;
        FinMeasure kappa;
    };
    const Stage& stage(int n) const {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = cache_.find(n);
        if (it != cache_.end()) return it->second;
        std::vector<const FinMeasure*> ms;
        for (int k = l_[n - 1] + 1; k <= l_[n]; ++k) ms.push_back(&T_.kappa(k));
        Stage s;
        s.kappa = convolve_all(ms);
        s.C = s.kappa.support();
        return cache_.emplace(n, std::move(s)).first->second;
    }
    CFParams T_;
    std::vector<int> l_;
    int fcap_ = 0;
    mutable std::mutex mu_;
    mutable std::map<int, Stage> cache_;
};

class ReducedSource final : public StageSource {
public:
    ReducedSource(CFParams T, std::vector<std::vector<Element>> A, std::vector<Rational> kA)
        : T_(std::move(T)), A_(std::move(A)), kA_(std::move(kA)) {
        prefix_.push_back(1);
        for (const auto& k : kA_) prefix_.push_back(prefix_.back() * k);
        for (size_t n = 1; n <= A_.size(); ++n) {
            const auto& a = A_[n - 1];
            kappa_.push_back(normalize(restrict_to(T_.kappa(static_cast<int>(n)), [&](const Element& e) {
                return std::binary_search(a.begin(), a.end(), e);
            })));
        }
    }
    const GroupCtx& group() const override { return T_.group(); }
    std::string name() const override { return T_.name() + "/reduced"; }
    int c_cap() const override { return static_cast<int>(A_.size()); }
    int f_cap() const override { return std::min(T_.f_cap(), c_cap()); }
    const std::vector<Element>& C(int n) const override { return A_[n - 1]; }
    const FinMeasure& kappa(int n) const override { return kappa_[n - 1]; }
    const Shape& F(int n) const override { return T_.F(n); }
    Rational nu(int n, const Element& f) const override { return T_.nu(n, f) / prefix_[n]; }
    Rational nu_total(int n) const override { return T_.nu_total(n) / prefix_[n]; }
    std::optional<Rational> uniform_nu(int n) const override {
        if (auto w = T_.source().uniform_nu(n)) return *w / prefix_[n];
        return std::nullopt;
    }

private:
    CFParams T_;
    std::vector<std::vector<Element>> A_;
    std::vector<Rational> kA_;
    std::vector<Rational> prefix_;
    std::vector<FinMeasure> kappa_;
};

}  // namespace

CFParams telescope(const CFParams& T, const std::vector<int>& l) {
    return CFParams(std::make_shared<TelescopedSource>(T, l));
}

std::optional<CFPoint> iota(const CFParams& T, const std::vector<int>& l, const CFPoint& x) {
    const GroupCtx& G = T.group();
    size_t k = 0;
    while (k < l.size() && l[k] < x.n) ++k;
    if (k == l.size() || l[k] > x.horizon()) return std::nullopt;
    CFPoint base = rebase(T, x, l[k]);
    CFPoint y;
    y.n = static_cast<int>(k);
    y.f = base.f;
    for (size_t j = k + 1; j < l.size() && l[j] <= x.horizon(); ++j) {
        Element c = G.identity();
        for (int i = l[j - 1] + 1; i <= l[j]; ++i) c = G.mul(c, x.tail[i - x.n - 1]);
        y.tail.push_back(c);
    }
    return y;
}

std::vector<int> compose_l(const std::vector<int>& l, const std::vector<int>& m) {
    std::vector<int> out;
    for (int mi : m) {
        if (mi < 0 || mi >= static_cast<int>(l.size())) fail(ErrorKind::Precondition, "composition index out of range");
        out.push_back(l[mi]);
    }
    return out;
}

Reduction reduce(const CFParams& T, const SubsetRule& A, int depth, const Rational& bound, const Rational& threshold) {
    if (depth < 0 || depth > T.c_cap()) fail(ErrorKind::Precondition, "reduction depth exceeds realizable stages");
    const Element one = T.group().identity();
    std::vector<std::vector<Element>> sets;
    std::vector<Rational> kA, defects;
    for (int n = 1; n <= T.c_cap(); ++n) {
        auto a = A(n);
        std::vector<Element> s = a ? *a : T.C(n);
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        const auto& C = T.C(n);
        for (const auto& e : s)
            if (!std::binary_search(C.begin(), C.end(), e))
                fail(ErrorKind::Precondition, "A_" + std::to_string(n) + " is not a subset of C_n");
        if (!std::binary_search(s.begin(), s.end(), one))
            fail(ErrorKind::Precondition, "1_G is not in A_" + std::to_string(n));
        const Rational k = mass(T.kappa(n), [&](const Element& e) { return std::binary_search(s.begin(), s.end(), e); });
        if (n <= depth) defects.push_back(1 - k);
        kA.push_back(k);
        sets.push_back(std::move(s));
    }
    Reduction r;
    r.depth = depth;
    r.summability = series_verdict(defects, threshold);
    const bool summable = r.summability.tag == VerdictTag::TermwiseZero || r.summability.tag == VerdictTag::ConvergentIndicated;
    const Rational psum = r.summability.partial_sums.empty() ? Rational(0) : r.summability.partial_sums.back();
    if (!summable || psum > bound)
        fail(ErrorKind::Precondition, "reduction rejected: sum of 1 - kappa_n(A_n) is not indicated summable (" +
                                          tag_name(r.summability.tag) + ", partial sum " + rat_str(psum) + ")");
    for (int n = 0; n < depth; ++n) r.scaling *= kA[n];
    r.params = CFParams(std::make_shared<ReducedSource>(T, std::move(sets), std::move(kA)));
    return r;
}

}  // namespace cf
