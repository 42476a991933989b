#include "cfforge/odometers.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace cf {

// ---------------------------------------------------------------- chains

OdometerSpec::OdometerSpec(GroupCtx g, std::string name, Rule rule, int depth_cap) : d_(std::make_shared<Data>()) {
    d_->g = std::move(g);
    d_->name = std::move(name);
    d_->rule = std::move(rule);
    d_->cap = depth_cap;
}

const Subgroup& OdometerSpec::gamma(int n) const {
    if (n < 0 || n > d_->cap) fail(ErrorKind::Precondition, "chain level " + std::to_string(n) + " beyond depth cap");
    std::lock_guard<std::mutex> lk(d_->mu);
    auto it = d_->cache.find(n);
    if (it != d_->cache.end()) return it->second;
    Subgroup s = n == 0 ? Subgroup::whole(d_->g) : d_->rule(n);
    if (!s.group().same(d_->g)) fail(ErrorKind::Type, "chain subgroup lives in a different group");
    return d_->cache.emplace(n, std::move(s)).first->second;
}

bool chain_consistent(const OdometerSpec& spec, const CosetChain& y) {
    for (size_t k = 0; k + 1 < y.idx.size(); ++k) {
        const int n = static_cast<int>(k) + 1;
        const auto next = spec.gamma(n + 1).cosets();
        if (y.idx[k + 1] >= next.size()) return false;
        if (spec.gamma(n).cosets().locate(next.rep(y.idx[k + 1])) != y.idx[k]) return false;
    }
    return true;
}

CosetChain chain_of(const OdometerSpec& spec, const Element& g, int N) {
    CosetChain y;
    for (int n = 1; n <= N; ++n) y.idx.push_back(spec.gamma(n).cosets().locate(g));
    return y;
}

CosetChain odometer_act(const OdometerSpec& spec, const Element& g, const CosetChain& y) {
    spec.group().check(g);
    CosetChain out;
    for (size_t k = 0; k < y.idx.size(); ++k)
        out.idx.push_back(spec.gamma(static_cast<int>(k) + 1).cosets().act(g, y.idx[k]));
    return out;
}

ChainReport validate_chain(const OdometerSpec& spec, int depth) {
    if (depth < 1 || depth > spec.depth_cap()) fail(ErrorKind::Precondition, "chain depth exceeds cap");
    const GroupCtx& G = spec.group();
    ChainReport r;
    r.depth = depth;
    for (int n = 1; n <= depth; ++n) {
        ChainLevelCheck c;
        c.n = n;
        const Subgroup& prev = spec.gamma(n - 1);
        const Subgroup& cur = spec.gamma(n);
        for (const auto& x : cur.generators())
            if (!prev.member(x)) c.nested = false;
        c.strict = false;
        for (const auto& x : prev.generators())
            if (!cur.member(x)) {
                c.strict = true;
                c.witness = x;
                break;
            }
        c.index = cur.index();
        if (!c.nested || !c.strict) r.ok = false;
        r.levels.push_back(c);
    }
    if (r.ok) {
        const Subgroup core = normal_core(spec.gamma(depth));
        for (const auto& e : G.ball(2))
            if (!G.is_identity(e) && core.member(e)) {
                r.faithful_window = false;
                r.unfaithful_witness = e;
                r.ok = false;
                break;
            }
    }
    return r;
}

CrossSections cross_sections(const OdometerSpec& spec, int N) {
    if (N < 0 || N > spec.depth_cap()) fail(ErrorKind::Precondition, "cross-section depth exceeds cap");
    const GroupCtx& G = spec.group();
    CrossSections r;
    std::vector<Element> prefix{G.identity()};
    for (int n = 1; n <= N; ++n) {
        r.D.push_back(relative_transversal(spec.gamma(n - 1), spec.gamma(n)));
        const auto cs = spec.gamma(n).cosets();
        std::vector<Element> next;
        std::vector<char> hit(cs.size(), 0);
        bool bij = true;
        bool square = true;
        const auto prev_cs = spec.gamma(n - 1).cosets();
        for (const auto& p : prefix)
            for (const auto& d : r.D.back()) {
                const Element q = G.mul(p, d);
                const uint32_t j = cs.locate(q);
                if (hit[j]) bij = false;
                hit[j] = 1;
                if (n > 1 && prev_cs.locate(q) != prev_cs.locate(p)) square = false;
                next.push_back(q);
            }
        if (next.size() != cs.size()) bij = false;
        r.omega_bijective.push_back(bij);
        if (n > 1) r.square_commutes.push_back(square);
        prefix = std::move(next);
    }
    return r;
}

CFParams rank_one_odometer_params(const OdometerSpec& spec, const std::vector<FinMeasure>& kappas) {
    const GroupCtx& G = spec.group();
    const int N = static_cast<int>(kappas.size());
    if (N > spec.depth_cap()) fail(ErrorKind::Precondition, "more measures than chain levels");
    std::vector<std::vector<Element>> C, F{{G.identity()}};
    std::vector<FinMeasure> nu{FinMeasure::delta(G, G.identity())};
    for (int n = 1; n <= N; ++n) {
        // supp κ_n must be a Γ_n-cross-section in Γ_{n-1} containing 1_G.
        const auto D = kappas[n - 1].support();
        const Subgroup& outer = spec.gamma(n - 1);
        const Subgroup& inner = spec.gamma(n);
        const auto bad = [&](const std::string& why) {
            fail(ErrorKind::Precondition, "supp kappa_" + std::to_string(n) + " is not a cross-section: " + why);
        };
        if (!std::binary_search(D.begin(), D.end(), G.identity())) bad("1_G missing");
        std::set<Key> keys;
        for (const auto& d : D) {
            if (!outer.member(d)) bad(d.str() + " not in Gamma_{n-1}");
            if (!keys.insert(inner.key(d)).second) bad("two atoms in one Gamma_n-coset");
        }
        if (D.size() * outer.index() != inner.index()) bad("size differs from [Gamma_{n-1} : Gamma_n]");
        const ProductSet ps = product_set(G, F.back(), D);
        if (!ps.disjoint) fail(ErrorKind::Precondition, "cross-section products overlap at stage " + std::to_string(n));
        F.push_back(ps.elements);
        C.push_back(D);
        nu.push_back(convolve(nu.back(), kappas[n - 1]));
    }
    return explicit_params(G, spec.name() + "/odometer", std::move(C), std::vector<FinMeasure>(kappas), std::move(F),
                           std::move(nu));
}

// ---------------------------------------------------------------- normal cover

namespace {

size_t orbit_size(const CosetSpace& cs, const std::vector<Element>& gens) {
    std::vector<char> seen(cs.size(), 0);
    std::deque<uint32_t> q{0};
    seen[0] = 1;
    size_t count = 1;
    while (!q.empty()) {
        const uint32_t i = q.front();
        q.pop_front();
        for (const auto& s : gens) {
            const uint32_t j = cs.act(s, i);
            if (!seen[j]) {
                seen[j] = 1;
                ++count;
                q.push_back(j);
            }
        }
    }
    return count;
}

std::vector<Element> with_inverses(const GroupCtx& G, std::vector<Element> s) {
    const size_t k = s.size();
    for (size_t i = 0; i < k; ++i) s.push_back(G.inv(s[i]));
    return s;
}

}  // namespace

NormalCover normal_cover(const OdometerSpec& spec, int N) {
    if (N < 1 || N > spec.depth_cap()) fail(ErrorKind::Precondition, "normal cover depth exceeds cap");
    const GroupCtx& G = spec.group();
    NormalCover r;
    r.N = N;
    for (int n = 1; n <= N; ++n) r.cores.push_back(normal_core(spec.gamma(n)));
    const auto gN = with_inverses(G, spec.gamma(N).generators());
    for (int n = 1; n <= N; ++n) {
        NormalCoverLevel L;
        L.n = n;
        L.index_gamma = spec.gamma(n).index();
        L.index_core = r.cores[n - 1].index();
        L.ratio = L.index_core / L.index_gamma;
        if (n + 1 <= spec.depth_cap()) {
            L.next_inside_core = true;
            for (const auto& x : spec.gamma(n + 1).generators())
                if (!r.cores[n - 1].member(x)) L.next_inside_core = false;
        }
        L.h_image = orbit_size(r.cores[n - 1].cosets(), gN);
        r.levels.push_back(L);
    }
    r.levelwise_injective = r.levels.back().ratio == 1;
    if (N + 1 <= spec.depth_cap()) {
        const auto deep = normal_core(spec.gamma(N + 1)).cosets();
        const auto gcs = spec.gamma(N + 1).cosets();
        const auto ccs = r.cores.back().cosets();
        std::unordered_map<uint32_t, uint32_t> seen;
        r.limit_injective = true;
        for (const auto& rep : deep.reps()) {
            auto [it, fresh] = seen.emplace(gcs.locate(rep), ccs.locate(rep));
            if (!fresh && it->second != ccs.locate(rep)) {
                r.limit_injective = false;
                break;
            }
        }
    }
    return r;
}

CosetChain cover_project(const OdometerSpec& spec, const NormalCover& cover, const CosetChain& cc) {
    if (cc.idx.size() > cover.cores.size()) fail(ErrorKind::Precondition, "cover chain longer than the cover depth");
    CosetChain out;
    for (size_t k = 0; k < cc.idx.size(); ++k) {
        const Element& r = cover.cores[k].cosets().rep(cc.idx[k]);
        out.idx.push_back(spec.gamma(static_cast<int>(k) + 1).cosets().locate(r));
    }
    return out;
}

std::vector<Rational> cover_measure(const OdometerSpec& spec, const NormalCover& cover,
                                    const std::vector<Rational>& level) {
    const auto gcs = spec.gamma(cover.N).cosets();
    if (level.size() != gcs.size()) fail(ErrorKind::Usage, "level measure has the wrong number of cosets");
    const auto ccs = cover.cores.back().cosets();
    const Rational fiber(static_cast<unsigned long>(cover.levels.back().ratio));
    std::vector<Rational> out;
    for (const auto& r : ccs.reps()) out.push_back(level[gcs.locate(r)] / fiber);
    return out;
}

// ---------------------------------------------------------------- rank-one cover

namespace {

// F_N = B·F_{N-1}·C_N without materializing it.
class ProductShape final : public Shape {
public:
    ProductShape(GroupCtx g, std::vector<Element> B, std::shared_ptr<const Shape> prev, std::vector<Element> C)
        : g_(std::move(g)), B_(std::move(B)), prev_(std::move(prev)), C_(std::move(C)) {}
    bool contains(const Element& x) const override {
        for (const auto& b : B_) {
            const Element bx = g_.mul(g_.inv(b), x);
            for (const auto& c : C_)
                if (prev_->contains(g_.mul(bx, g_.inv(c)))) return true;
        }
        return false;
    }
    BigInt size() const override { return BigInt(static_cast<unsigned long>(materialize().size())); }
    void for_each(const std::function<void(const Element&)>& f) const override {
        for (const auto& e : materialize()) f(e);
    }

private:
    const std::vector<Element>& materialize() const {
        std::call_once(once_, [this] {
            std::unordered_set<Element, ElementHash> s;
            prev_->for_each([&](const Element& f) {
                for (const auto& c : C_) {
                    const Element fc = g_.mul(f, c);
                    for (const auto& b : B_) s.insert(g_.mul(b, fc));
                }
            });
            elems_.assign(s.begin(), s.end());
            std::sort(elems_.begin(), elems_.end());
        });
        return elems_;
    }
    GroupCtx g_;
    std::vector<Element> B_;
    std::shared_ptr<const Shape> prev_;
    std::vector<Element> C_;
    mutable std::once_flag once_;
    mutable std::vector<Element> elems_;
};

class RankOneSource final : public StageSource {
public:
    RankOneSource(GroupCtx g, std::string name, std::vector<std::vector<Element>> C,
                  std::vector<std::shared_ptr<const Shape>> F)
        : g_(std::move(g)), name_(std::move(name)), C_(std::move(C)), F_(std::move(F)) {
        w_.push_back(1);
        for (auto& c : C_) {
            std::sort(c.begin(), c.end());
            kappa_.push_back(FinMeasure::uniform(g_, c));
            w_.push_back(w_.back() / static_cast<unsigned long>(c.size()));
        }
    }
    const GroupCtx& group() const override { return g_; }
    std::string name() const override { return name_; }
    int c_cap() const override { return static_cast<int>(C_.size()); }
    int f_cap() const override { return static_cast<int>(F_.size()) - 1; }
    const std::vector<Element>& C(int n) const override { return C_[n - 1]; }
    const FinMeasure& kappa(int n) const override { return kappa_[n - 1]; }
    const Shape& F(int n) const override { return *F_[n]; }
    Rational nu(int n, const Element& f) const override { return F_[n]->contains(f) ? w_[n] : Rational(0); }
    std::optional<Rational> uniform_nu(int n) const override { return w_[n]; }

private:
    GroupCtx g_;
    std::string name_;
    std::vector<std::vector<Element>> C_;
    std::vector<std::shared_ptr<const Shape>> F_;
    std::vector<FinMeasure> kappa_;
    std::vector<Rational> w_;
};

// Elements of Γ in BFS order over its symmetric family generators.
class SubgroupWalk {
public:
    SubgroupWalk(const GroupCtx& g, const Subgroup& s) : g_(g), gens_(with_inverses(g, s.generators())) {
        out_.push_back(g.identity());
        seen_.insert(g.identity());
    }
    const Element& at(size_t i) {
        while (out_.size() <= i) {
            const size_t before = out_.size();
            for (const auto& s : gens_) {
                Element e = g_.mul(out_[head_], s);
                if (seen_.insert(e).second) out_.push_back(e);
            }
            ++head_;
            if (out_.size() == before && head_ >= out_.size()) fail(ErrorKind::Resource, "subgroup walk exhausted");
        }
        return out_[i];
    }

private:
    GroupCtx g_;
    std::vector<Element> gens_;
    std::vector<Element> out_;
    std::unordered_set<Element, ElementHash> seen_;
    size_t head_ = 0;
};

}  // namespace

RankOneCover rank_one_cover(const OdometerSpec& spec, int N, int radius, size_t spread_cap) {
    if (N < 0 || N > spec.depth_cap()) fail(ErrorKind::Precondition, "cover depth exceeds chain cap");
    const GroupCtx& G = spec.group();
    RankOneCover r;
    r.N = N;
    const std::vector<Element> B = G.ball(radius);
    std::vector<std::vector<Element>> C;
    std::vector<std::shared_ptr<const Shape>> F{explicit_shape(G, {G.identity()})};
    std::vector<Element> Fprev{G.identity()};
    for (int n = 1; n <= N; ++n) {
        const auto D = relative_transversal(spec.gamma(n - 1), spec.gamma(n));
        r.D.push_back(D);
        SubgroupWalk walk(G, spec.gamma(n));
        std::unordered_set<Element, ElementHash> placed;
        std::vector<Element> Cn;
        for (const auto& d : D) {
            bool done = false;
            for (size_t t = 0; t < spread_cap && !done; ++t) {
                const Element delta = walk.at(t);
                const Element c = G.mul(d, delta);
                bool clash = false;
                for (const auto& f : Fprev)
                    if (placed.count(G.mul(f, c))) {
                        clash = true;
                        break;
                    }
                if (clash) continue;
                for (const auto& f : Fprev) placed.insert(G.mul(f, c));
                Cn.push_back(c);
                r.shifts_used.push_back(delta);
                done = true;
            }
            if (!done)
                fail(ErrorKind::Resource, "rank-one cover: no disjoint translate for " + d.str() + " at stage " +
                                              std::to_string(n) + " within the spread cap");
        }
        C.push_back(Cn);
        if (n < N) {
            std::unordered_set<Element, ElementHash> s;
            for (const auto& fc : placed)
                for (const auto& b : B) s.insert(G.mul(b, fc));
            Fprev.assign(s.begin(), s.end());
            std::sort(Fprev.begin(), Fprev.end());
            F.push_back(explicit_shape(G, Fprev));
        } else {
            F.push_back(std::make_shared<ProductShape>(G, B, F.back(), Cn));
        }
    }
    r.params = CFParams(std::make_shared<RankOneSource>(G, spec.name() + "/rank-one-cover", C, F));

    std::vector<Element> prefix{G.identity()};
    for (int k = 1; k <= N; ++k) {
        const auto cs = spec.gamma(k).cosets();
        std::vector<Element> next;
        std::vector<Rational> mass_at(cs.size());
        const Rational w = Rational(1) / static_cast<unsigned long>(prefix.size() * C[k - 1].size());
        for (const auto& p : prefix)
            for (const auto& c : C[k - 1]) {
                next.push_back(G.mul(p, c));
                mass_at[cs.locate(next.back())] += w;
            }
        bool bij = next.size() == cs.size();
        bool uni = true;
        const Rational u = Rational(1) / static_cast<unsigned long>(cs.size());
        for (const auto& m : mass_at) {
            if (m == 0) bij = false;
            if (m != u) uni = false;
        }
        r.tau_bijective.push_back(bij);
        r.tau_uniform.push_back(uni);
        prefix = std::move(next);
    }
    return r;
}

CosetChain tau(const OdometerSpec& spec, const CFParams& T, const CFPoint& x, int levels) {
    CosetChain y;
    for (int k = 1; k <= levels; ++k) {
        const int m = std::max(x.n, k);
        if (m > x.horizon()) fail(ErrorKind::Precondition, "point not realized deep enough for tau");
        y.idx.push_back(spec.gamma(k).cosets().locate(rebase(T, x, m).f));
    }
    return y;
}

// ---------------------------------------------------------------- compatibility and factor maps

ChainRule identity_chain(const GroupCtx& g) {
    const Element e = g.identity();
    return [e](int) { return e; };
}

namespace {

void check_chain_rule(const OdometerSpec& spec, const ChainRule& y, int depth) {
    const GroupCtx& G = spec.group();
    for (int n = 1; n < depth; ++n)
        if (!spec.gamma(n).member(G.mul(G.inv(y(n)), y(n + 1))))
            fail(ErrorKind::Precondition, "inconsistent chain point at level " + std::to_string(n));
}

}  // namespace

Verdict odometer_compatibility(const CFParams& T0, const OdometerSpec& spec, const ChainRule& y, int depth,
                               const std::vector<int>& l, const Rational& threshold) {
    const CFParams T = l.empty() ? T0 : telescope(T0, l);
    if (depth < 1 || depth > T.c_cap() || depth > spec.depth_cap())
        fail(ErrorKind::Precondition, "compatibility depth exceeds realizable stages");
    check_chain_rule(spec, y, depth);
    const GroupCtx& G = T.group();
    std::vector<Rational> terms;
    for (int n = 1; n <= depth; ++n) {
        const Element g = y(n), gi = G.inv(g);
        const Subgroup& gam = spec.gamma(n);
        terms.push_back(mass(T.kappa(n), [&](const Element& c) { return !gam.member(G.mul(G.mul(gi, c), g)); }));
    }
    return series_verdict(std::move(terms), threshold);
}

std::optional<CosetChain> odometer_factor_map(const CFParams& T, const OdometerSpec& spec, const ChainRule& y,
                                              const CFPoint& x, int levels, int window) {
    check_chain_rule(spec, y, levels);
    CosetChain out;
    for (int n = 1; n <= levels; ++n) {
        const auto s = finite_factor_map(T, y(n), spec.gamma(n), x, window);
        if (!s.coset) return std::nullopt;
        out.idx.push_back(*s.coset);
    }
    return out;
}

// ---------------------------------------------------------------- isomorphism evidence

namespace {

struct CosetSplit {
    std::vector<Rational> a;    // ν_m mass of C_{n+1}···C_m in each coset
    std::vector<Rational> tot;  // ν_m mass of F_m in each coset
};

std::vector<Element> block_product(const CFParams& T, int n, int m) {
    const GroupCtx& G = T.group();
    std::vector<Element> S{G.identity()};
    for (int k = n + 1; k <= m; ++k) {
        std::vector<Element> nx;
        nx.reserve(S.size() * T.C(k).size());
        for (const auto& s : S)
            for (const auto& c : T.C(k)) nx.push_back(G.mul(s, c));
        S = std::move(nx);
    }
    return S;
}

CosetSplit split(const CFParams& T, const CosetSpace& cs, const Element& gl, const std::vector<Element>& S, int m) {
    const GroupCtx& G = T.group();
    CosetSplit r{std::vector<Rational>(cs.size()), std::vector<Rational>(cs.size())};
    if (auto w = T.source().uniform_nu(m)) {
        std::vector<uint64_t> ca(cs.size()), ct(cs.size());
        T.F(m).for_each([&](const Element& f) { ++ct[cs.locate(G.mul(f, gl))]; });
        for (const auto& s : S) ++ca[cs.locate(G.mul(s, gl))];
        for (size_t j = 0; j < cs.size(); ++j) {
            r.a[j] = *w * Rational(std::to_string(ca[j]));
            r.tot[j] = *w * Rational(std::to_string(ct[j]));
        }
        return r;
    }
    T.F(m).for_each([&](const Element& f) { r.tot[cs.locate(G.mul(f, gl))] += T.nu(m, f); });
    for (const auto& s : S) r.a[cs.locate(G.mul(s, gl))] += T.nu(m, s);
    return r;
}

}  // namespace

IsoReport isomorphism_check(const CFParams& T, const OdometerSpec& spec, const ChainRule& y, int n, const Rational& eps,
                            int l_max, int m_max) {
    IsoReport r;
    const int m_lo = n + 1;
    if (l_max < 1 || m_max < m_lo) {
        r.inconclusive = true;
        return r;
    }
    if (m_max > T.f_cap() || m_max > T.c_cap() || l_max > spec.depth_cap())
        fail(ErrorKind::Precondition, "isomorphism probes exceed realizable stages");
    check_chain_rule(spec, y, l_max);
    std::vector<std::vector<Rational>> val(l_max + 1);
    for (int m = m_lo; m <= m_max; ++m) {
        const auto S = block_product(T, n, m);
        for (int l = 1; l <= l_max; ++l) {
            const auto cs = spec.gamma(l).cosets();
            const CosetSplit sp = split(T, cs, y(l), S, m);
            IsoProbe p;
            p.l = l;
            p.m = m;
            p.value = 0;
            for (size_t j = 0; j < cs.size(); ++j) {
                const Rational b = sp.tot[j] - sp.a[j];
                if (sp.a[j] >= b) {
                    ++p.d_size;
                    p.value += b;
                } else {
                    p.value += sp.a[j];
                }
            }
            val[l].push_back(p.value);
            r.probes.push_back(p);
        }
    }
    // For fixed l the condition concerns m → ∞: E_l = max of the tail values, envelope_min = min_l E_l.
    const int count = m_max - m_lo + 1;
    for (int l = 1; l <= l_max; ++l) {
        Rational e = val[l][count / 2];
        for (int i = count / 2; i < count; ++i) e = std::max(e, val[l][i]);
        r.envelope.push_back(e);
        if (e < eps && !r.passes) {
            r.passes = true;
            r.best_l = l;
        }
    }
    r.envelope_min = *std::min_element(r.envelope.begin(), r.envelope.end());
    return r;
}

Rational iso_value_bruteforce(const CFParams& T, const OdometerSpec& spec, const ChainRule& y, int n, int l, int m) {
    const GroupCtx& G = T.group();
    const auto cs = spec.gamma(l).cosets();
    if (cs.size() > 16) fail(ErrorKind::Resource, "brute-force subset search limited to 16 cosets");
    const auto Svec = block_product(T, n, m);
    const std::unordered_set<Element, ElementHash> S(Svec.begin(), Svec.end());
    const Element gl = y(l);
    // in[j], out[j]: ν_m-mass of cells landing on coset j inside / outside C_{n+1}···C_m.
    std::vector<Rational> in(cs.size()), out(cs.size());
    T.F(m).for_each([&](const Element& f) {
        const uint32_t j = cs.locate(G.mul(f, gl));
        (S.count(f) ? in[j] : out[j]) += T.nu(m, f);
    });
    std::optional<Rational> best;
    for (uint32_t mask = 0; mask < (1u << cs.size()); ++mask) {
        Rational v = 0;
        for (size_t j = 0; j < cs.size(); ++j) v += ((mask >> j) & 1u) ? out[j] : in[j];
        if (!best || v < *best) best = v;
    }
    return *best;
}

}  // namespace cf
