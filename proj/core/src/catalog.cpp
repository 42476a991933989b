#include "cfforge/catalog.hpp"

#include <algorithm>
#include <set>

namespace cf {

namespace {

int64_t pow_i(int64_t b, int e) {
    int64_t r = 1;
    for (int i = 0; i < e; ++i) r = mul_ck(r, b);
    return r;
}

// Closed-form stage data for G = Z: interval F_n = [0, h_n), C_n and κ_n precomputed up to cap.
class FgswSource : public StageSource {
public:
    explicit FgswSource(int cap, std::string name = "fgsw") : g_(GroupCtx::integers()), name_(std::move(name)) {
        if (cap < 1 || cap > 28) fail(ErrorKind::Usage, "fgsw stage cap must be in 1..28");
        for (int n = 0; n <= cap; ++n) F_.push_back(interval_shape(0, fgsw_h(n)));
        for (int n = 1; n <= cap; ++n) {
            const int64_t h = fgsw_h(n - 1), t = int64_t(1) << n;
            C_.push_back({Element{0}, Element{h}, Element{2 * h + t}, Element{3 * h + t}});
        }
    }
    const GroupCtx& group() const override { return g_; }
    std::string name() const override { return name_; }
    int c_cap() const override { return static_cast<int>(C_.size()); }
    int f_cap() const override { return static_cast<int>(F_.size()) - 1; }
    const std::vector<Element>& C(int n) const override { return C_[n - 1]; }
    const FinMeasure& kappa(int n) const override { return kappa_[n - 1]; }
    const Shape& F(int n) const override { return *F_[n]; }

protected:
    GroupCtx g_;
    std::string name_;
    std::vector<std::vector<Element>> C_;
    std::vector<FinMeasure> kappa_;
    std::vector<std::shared_ptr<const Shape>> F_;
};

class FgswUniform final : public FgswSource {
public:
    explicit FgswUniform(int cap) : FgswSource(cap) {
        for (const auto& c : C_) kappa_.push_back(FinMeasure::uniform(g_, c));
    }
    Rational nu(int n, const Element& f) const override { return F_[n]->contains(f) ? pow2(-2 * n) : Rational(0); }
    Rational nu_total(int n) const override { return 2 - pow2(-n); }
    std::optional<Rational> uniform_nu(int n) const override { return pow2(-2 * n); }
    std::optional<Rational> kappa_max_bound() const override { return Rational(1, 4); }
};

class FgswSplit final : public FgswSource {
public:
    FgswSplit(WeightRule p, int cap) : FgswSource(cap, "fgsw-split") {
        bool uniform = true;
        w0_.push_back(1);
        totals_.push_back(1);
        for (int n = 1; n <= cap; ++n) {
            const Rational pn = p ? p(n) : Rational(1, 2);
            if (pn <= 0 || pn >= 1) fail(ErrorKind::Usage, "fgsw-split weight must lie in (0, 1)");
            if (pn != Rational(1, 2)) uniform = false;
            kappa_.push_back(convolve(fgsw_kappa1(n), fgsw_kappa2(n, pn)));
            w0_.push_back(w0_.back() * kappa_.back().at(Element{0}));
            // 2^n spacer levels per stage, each weighted like the bottom level.
            totals_.push_back(totals_.back() + Rational(std::to_string(int64_t(1) << n)) * w0_.back());
        }
        if (uniform) bound_ = Rational(1, 4);
    }
    Rational nu(int n, const Element& f) const override {
        return nu_by_decomposition(*this, n, f, [this](int k, const Element&) { return w0_[k]; });
    }
    Rational nu_total(int n) const override { return totals_[n]; }
    std::optional<Rational> kappa_max_bound() const override { return bound_; }

private:
    std::vector<Rational> w0_, totals_;
    std::optional<Rational> bound_;
};

class HeisRankOne final : public StageSource {
public:
    explicit HeisRankOne(int cap) : g_(GroupCtx::heisenberg()) {
        if (cap < 1 || cap > 14) fail(ErrorKind::Usage, "heisenberg-rank-one stage cap must be in 1..14");
        for (int n = 0; n <= cap; ++n) F_.push_back(box_shape(int64_t(1) << n, int64_t(1) << n, heis_h(n)));
        for (int n = 0; n < cap; ++n) {
            // C_{n+1} = {(a,b,0)} · {(0,0,j h_n)} · {(0,0,0), (0,0,8h_n + 2·4^{n+1})}.
            const int64_t h = heis_h(n), s = int64_t(1) << n, e = 8 * h + 2 * pow_i(4, n + 1);
            std::vector<Element> c;
            for (int64_t a : {int64_t(0), s})
                for (int64_t b : {int64_t(0), s})
                    for (int64_t j = 0; j < 8; ++j)
                        for (int64_t z : {int64_t(0), e}) c.push_back(Element{a, b, j * h + z});
            std::sort(c.begin(), c.end());
            kappa_.push_back(FinMeasure::uniform(g_, c));
            C_.push_back(std::move(c));
        }
    }
    const GroupCtx& group() const override { return g_; }
    std::string name() const override { return "heisenberg-rank-one"; }
    int c_cap() const override { return static_cast<int>(C_.size()); }
    int f_cap() const override { return static_cast<int>(F_.size()) - 1; }
    const std::vector<Element>& C(int n) const override { return C_[n - 1]; }
    const FinMeasure& kappa(int n) const override { return kappa_[n - 1]; }
    const Shape& F(int n) const override { return *F_[n]; }
    Rational nu(int n, const Element& f) const override { return F_[n]->contains(f) ? w(n) : Rational(0); }
    Rational nu_total(int n) const override { return w(n) * Rational(F_[n]->size()); }
    std::optional<Rational> uniform_nu(int n) const override { return w(n); }
    std::optional<Rational> kappa_max_bound() const override { return Rational(1, 64); }

private:
    static Rational w(int n) { return pow2(-6 * n); }
    GroupCtx g_;
    std::vector<std::vector<Element>> C_;
    std::vector<FinMeasure> kappa_;
    std::vector<std::shared_ptr<const Shape>> F_;
};

}  // namespace

int64_t fgsw_h(int n) {
    if (n < 0 || n > 30) fail(ErrorKind::Usage, "fgsw height index out of range");
    int64_t h = 1;
    for (int k = 0; k < n; ++k) h = add_ck(mul_ck(4, h), int64_t(1) << (k + 1));
    return h;
}

CFParams fgsw(int cap) { return CFParams(std::make_shared<FgswUniform>(cap)); }

FinMeasure fgsw_kappa1(int n) {
    const GroupCtx g = GroupCtx::integers();
    return FinMeasure::uniform(g, {Element{0}, Element{fgsw_h(n - 1)}});
}

FinMeasure fgsw_kappa2(int n, const Rational& p) {
    const GroupCtx g = GroupCtx::integers();
    return FinMeasure::weighted(g, {Element{0}, Element{pow_i(4, n)}}, {p, 1 - p});
}

CFParams fgsw_split(WeightRule p, int cap) { return CFParams(std::make_shared<FgswSplit>(std::move(p), cap)); }

int64_t heis_h(int n) {
    if (n < 0 || n > 15) fail(ErrorKind::Usage, "heisenberg height index out of range");
    int64_t h = 1;
    for (int k = 0; k < n; ++k) h = add_ck(mul_ck(16, h), mul_ck(9, pow_i(4, k + 1)));
    return h;
}

CFParams heisenberg_rank_one(int cap) { return CFParams(std::make_shared<HeisRankOne>(cap)); }

OdometerSpec heisenberg_2adic_chain(int cap) {
    const GroupCtx g = GroupCtx::heisenberg();
    return OdometerSpec(g, "heisenberg-2adic-chain", [g](int n) {
        const int64_t t = int64_t(1) << n;
        return Subgroup::heis_congruence(g, t, t, t);
    }, cap);
}

OdometerSpec heisenberg_nonnormal(int cap) {
    const GroupCtx g = GroupCtx::heisenberg();
    return OdometerSpec(g, "heisenberg-nonnormal", [g](int n) {
        const int64_t t = int64_t(1) << n;
        return Subgroup::heis_congruence(g, t / 2, t, t);
    }, cap);
}

Subgroup heisenberg_sigma(int q) {
    return Subgroup::heis_congruence(GroupCtx::heisenberg(), int64_t(1) << q, int64_t(1) << q, pow_i(4, q));
}

OdometerSpec z_product_odometer(std::vector<int64_t> a) {
    if (a.empty()) fail(ErrorKind::Usage, "z-product-odometer needs at least one a_n");
    for (int64_t x : a)
        if (x < 2) fail(ErrorKind::Usage, "z-product-odometer needs a_n > 1");
    const GroupCtx g = GroupCtx::integers();
    std::vector<int64_t> prod{1};
    for (int64_t x : a) prod.push_back(mul_ck(prod.back(), x));
    const int cap = static_cast<int>(a.size());
    return OdometerSpec(g, "z-product-odometer", [g, prod](int n) { return Subgroup::modulus(g, prod[n]); }, cap);
}

CFParams z_product_params(const std::vector<int64_t>& a, const std::vector<std::vector<Rational>>& weights) {
    const OdometerSpec spec = z_product_odometer(a);
    const GroupCtx& g = spec.group();
    std::vector<FinMeasure> kappas;
    int64_t base = 1;
    for (size_t n = 0; n < a.size(); ++n) {
        std::vector<Element> D;
        for (int64_t i = 0; i < a[n]; ++i) D.push_back(Element{i * base});
        if (n < weights.size() && !weights[n].empty())
            kappas.push_back(FinMeasure::weighted(g, D, weights[n]));
        else
            kappas.push_back(FinMeasure::uniform(g, D));
        base = mul_ck(base, a[n]);
    }
    return rank_one_odometer_params(spec, kappas);
}

// ---------------------------------------------------------------- Z_3 ⋊ Z_2

int S3Scenario::act_z3(const Element& g, int t) const {
    const int a = static_cast<int>(g[0] % 3), b = static_cast<int>(g[0] / 3);
    return ((a + (b ? -t : t)) % 3 + 3) % 3;
}

std::pair<int, int> S3Scenario::act(const Element& g, std::pair<int, int> y) const {
    return {act_z3(g, y.first), act_z3(g, y.second)};
}

S3Scenario s3_two_factors() {
    // (a, b)(a', b') = (a + (-1)^b a', b + b'), element index a + 3b.
    std::vector<std::vector<int>> table(6, std::vector<int>(6));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const int a = i % 3, b = i / 3, a2 = j % 3, b2 = j / 3;
            const int ra = ((a + (b ? -a2 : a2)) % 3 + 3) % 3, rb = (b + b2) % 2;
            table[i][j] = ra + 3 * rb;
        }
    const GroupCtx grp = GroupCtx::finite_table("Z3xZ2", table, {1, 3});
    S3Scenario s{grp, Subgroup::finite_subset(grp, {Element{0}, Element{3}}), {}};
    for (int t1 = 0; t1 < 3; ++t1)
        for (int t2 = 0; t2 < 3; ++t2)
            if (t1 != t2) s.Y.emplace_back(t1, t2);
    const auto G = s.group.elements();
    // Transitive: one orbit; free: only the identity fixes a point.
    std::set<std::pair<int, int>> orbit;
    for (const auto& g : G) orbit.insert(s.act(g, s.Y[0]));
    s.transitive = orbit.size() == s.Y.size();
    s.free_action = true;
    for (const auto& y : s.Y)
        for (const auto& g : G)
            if (!s.group.is_identity(g) && s.act(g, y) == y) s.free_action = false;
    // Partitions of Y by each coordinate, as sets of blocks.
    auto blocks = [&](bool first) {
        std::set<std::set<std::pair<int, int>>> out;
        for (int t = 0; t < 3; ++t) {
            std::set<std::pair<int, int>> b;
            for (const auto& y : s.Y)
                if ((first ? y.first : y.second) == t) b.insert(y);
            out.insert(b);
        }
        return out;
    };
    s.partitions_distinct = blocks(true) != blocks(false);
    // Z_3 = G/Γ via t ↦ coset of (t, 0); projections commute with the action.
    const auto cs = s.gamma.cosets();
    s.projections_equivariant = true;
    for (const auto& g : G) {
        for (int t = 0; t < 3; ++t) {
            const uint32_t lhs = cs.locate(s.group.mul(g, Element{t}));
            const uint32_t rhs = cs.locate(Element{s.act_z3(g, t)});
            if (lhs != rhs) s.projections_equivariant = false;
        }
        for (const auto& y : s.Y) {
            const auto gy = s.act(g, y);
            if (gy.first != s.act_z3(g, y.first) || gy.second != s.act_z3(g, y.second)) s.projections_equivariant = false;
        }
    }
    return s;
}

// ---------------------------------------------------------------- tree

TreeScenario tree_nonfree(int N) {
    const GroupCtx g = GroupCtx::tree(N);
    // Node (level 1, prefix 1) has id (1 << 1) - 1 + 1 = 2.
    TreeScenario s{g, OdometerSpec(g, "tree-nonfree", [g](int n) { return Subgroup::tree_stabilizer(g, n); }, N),
                   g.tree_element(uint64_t(1) << 2)};
    s.R_nontrivial = !g.is_identity(s.R) && N >= 2;
    s.R_fixes_zero = s.chain.gamma(N).member(s.R);
    s.stabilizer_order = g.order() / s.chain.gamma(N).index();
    return s;
}

// ---------------------------------------------------------------- registry

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = {
        {"fgsw", "params", "Rank-one Z-action: h_{n+1} = 4h_n + 2^{n+1}, C_{n+1} = {0, h_n, 2h_n+2^{n+1}, 3h_n+2^{n+1}}, uniform measures", 8},
        {"fgsw-split", "params", "fgsw with kappa_n = kappa1_n * kappa2_n on {0,h_{n-1}} + {0,4^n}; kappa2 weights configurable", 8},
        {"heisenberg-rank-one", "params", "Rank-one H3(Z)-action on boxes F_n = Pi(2^n, 2^n, h_n), |C_n| = 64, uniform measures", 3},
        {"heisenberg-2adic-chain", "chain", "Normal chain Gamma_n = {(i 2^n, j 2^n, k 2^n)} in H3(Z)", 4},
        {"heisenberg-nonnormal", "chain", "Non-normal chain Gamma_n = {(i 2^{n-1}, j 2^n, k 2^n)} in H3(Z)", 4},
        {"s3-two-factors", "scenario", "Z3 x| Z2 acting on off-diagonal pairs of Z3 x Z3; two distinct 2-to-1 factors", 1},
        {"z-product-odometer", "chain", "Z-odometer Gamma_n = a_1...a_n Z (default a_n = 2) with product measures", 8},
        {"tree-nonfree", "scenario", "Finitary binary-tree group at depth N with point-stabilizer chain; non-free witness R", 4},
    };
    return entries;
}

const CatalogEntry& catalog_entry(const std::string& name) {
    for (const auto& e : catalog())
        if (e.name == name) return e;
    fail(ErrorKind::Usage, "unknown catalog entry '" + name + "'");
}

CFParams catalog_params(const std::string& name) {
    if (name == "fgsw") return fgsw();
    if (name == "fgsw-split") return fgsw_split();
    if (name == "heisenberg-rank-one") return heisenberg_rank_one();
    if (name == "z-product-odometer") return z_product_params(std::vector<int64_t>(12, 2));
    catalog_entry(name);
    fail(ErrorKind::Usage, "catalog entry '" + name + "' does not define (C,F) parameters");
}

OdometerSpec catalog_chain(const std::string& name) {
    if (name == "heisenberg-2adic-chain") return heisenberg_2adic_chain();
    if (name == "heisenberg-nonnormal") return heisenberg_nonnormal();
    if (name == "z-product-odometer") return z_product_odometer(std::vector<int64_t>(20, 2));
    if (name == "tree-nonfree") return tree_nonfree().chain;
    catalog_entry(name);
    fail(ErrorKind::Usage, "catalog entry '" + name + "' does not define an odometer chain");
}

}  // namespace cf
