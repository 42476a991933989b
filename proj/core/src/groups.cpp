#include "cfforge/groups.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace cf {

// ---------------------------------------------------------------- base helpers

std::string Element::str() const {
    if (n == 1) return std::to_string(v[0]);
    std::string s = "(";
    for (int i = 0; i < n; ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s + ")";
}

std::string rat_str(const Rational& q) { return q.get_str(); }

Rational parse_rational(const std::string& s) {
    Rational q;
    if (s.empty() || q.set_str(s, 10) != 0) fail(ErrorKind::Usage, "malformed rational '" + s + "'");
    if (q.get_den() == 0) fail(ErrorKind::Usage, "zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
}

Rational pow2(int k) {
    Rational r = 1;
    if (k >= 0) {
        mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(), k);
    } else {
        mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), -k);
    }
    return r;
}

Rational rpow(const Rational& base, int k) {
    Rational r = 1, b = base;
    bool neg = k < 0;
    unsigned e = neg ? -k : k;
    while (e) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return neg ? Rational(1 / r) : r;
}

// ---------------------------------------------------------------- GroupCtx

GroupCtx GroupCtx::integers() { return lattice(1); }

GroupCtx GroupCtx::lattice(int d) {
    if (d < 1 || d > Element::kMax) fail(ErrorKind::Usage, "lattice dimension must be in 1..4");
    auto data = std::make_shared<Data>();
    data->kind = GroupKind::IntLattice;
    data->dim = d;
    data->name = d == 1 ? "Z" : "Z^" + std::to_string(d);
    for (int i = 0; i < d; ++i) {
        Element e;
        e.n = d;
        e.v[i] = 1;
        data->gens.push_back(e);
    }
    GroupCtx g;
    g.d_ = data;
    return g;
}

GroupCtx GroupCtx::heisenberg() {
    auto data = std::make_shared<Data>();
    data->kind = GroupKind::Heisenberg;
    data->dim = 3;
    data->name = "H3(Z)";
    data->gens = {Element{1, 0, 0}, Element{0, 1, 0}, Element{0, 0, 1}};
    GroupCtx g;
    g.d_ = data;
    return g;
}

GroupCtx GroupCtx::finite_table(std::string name, std::vector<std::vector<int>> table, std::vector<int> generators) {
    const int n = static_cast<int>(table.size());
    if (n == 0) fail(ErrorKind::Usage, "empty multiplication table");
    for (auto& row : table) {
        if (static_cast<int>(row.size()) != n) fail(ErrorKind::Usage, "multiplication table is not square");
        for (int x : row)
            if (x < 0 || x >= n) fail(ErrorKind::Usage, "multiplication table entry out of range");
    }
    for (int i = 0; i < n; ++i)
        if (table[0][i] != i || table[i][0] != i) fail(ErrorKind::Usage, "element 0 is not the identity");
    auto data = std::make_shared<Data>();
    data->kind = GroupKind::FiniteTable;
    data->name = std::move(name);
    data->dim = n;
    data->inverse.assign(n, -1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (table[i][j] == 0) data->inverse[i] = j;
    for (int i = 0; i < n; ++i)
        if (data->inverse[i] < 0) fail(ErrorKind::Usage, "table element without inverse");
    for (int gi : generators) {
        if (gi < 0 || gi >= n) fail(ErrorKind::Usage, "generator out of range");
        data->gens.push_back(Element{gi});
    }
    data->table = std::move(table);
    GroupCtx g;
    g.d_ = data;
    return g;
}

GroupCtx GroupCtx::tree(int depth) {
    if (depth < 1 || depth > 6) fail(ErrorKind::Usage, "tree depth must be in 1..6");
    auto data = std::make_shared<Data>();
    data->kind = GroupKind::TreeDepth;
    data->dim = depth;
    data->name = "Tree(" + std::to_string(depth) + ")";
    // Swap at the leftmost node of each level; together they generate the full tree group.
    for (int k = 0; k < depth; ++k) data->gens.push_back(Element{int64_t(1) << ((1 << k) - 1)});
    GroupCtx g;
    g.d_ = data;
    return g;
}

size_t GroupCtx::order() const {
    if (kind() == GroupKind::FiniteTable) return d_->table.size();
    if (kind() == GroupKind::TreeDepth) return size_t(1) << ((1 << dim()) - 1);
    return 0;
}

Element GroupCtx::identity() const {
    Element e;
    switch (kind()) {
        case GroupKind::IntLattice: e.n = dim(); break;
        case GroupKind::Heisenberg: e.n = 3; break;
        case GroupKind::FiniteTable:
        case GroupKind::TreeDepth: e.n = 1; break;
    }
    return e;
}

void GroupCtx::check(const Element& a) const {
    switch (kind()) {
        case GroupKind::IntLattice:
            if (a.n != dim()) fail(ErrorKind::Type, "element " + a.str() + " is not in " + name());
            return;
        case GroupKind::Heisenberg:
            if (a.n != 3) fail(ErrorKind::Type, "element " + a.str() + " is not in " + name());
            return;
        case GroupKind::FiniteTable:
            if (a.n != 1 || a.v[0] < 0 || a.v[0] >= dim()) fail(ErrorKind::Type, "element " + a.str() + " is not in " + name());
            return;
        case GroupKind::TreeDepth: {
            const int nodes = (1 << dim()) - 1;
            if (a.n != 1 || a.v[0] < 0 || (nodes < 63 && (a.v[0] >> nodes) != 0))
                fail(ErrorKind::Type, "element " + a.str() + " is not in " + name());
            return;
        }
    }
}

uint64_t GroupCtx::tree_apply(const Element& g, uint64_t z, int k) const {
    const uint64_t sw = static_cast<uint64_t>(g.v[0]);
    uint64_t out = z;
    for (int i = 0; i < k; ++i) {
        const uint64_t prefix = z & ((uint64_t(1) << i) - 1);
        const uint64_t node = ((uint64_t(1) << i) - 1) + prefix;
        out ^= ((sw >> node) & 1u) << i;
    }
    return out;
}

Element GroupCtx::tree_element(uint64_t swaps) const {
    Element e{static_cast<int64_t>(swaps)};
    check(e);
    return e;
}

Element GroupCtx::mul(const Element& a, const Element& b) const {
    switch (kind()) {
        case GroupKind::IntLattice: {
            Element r;
            r.n = a.n;
            for (int i = 0; i < a.n; ++i) r.v[i] = add_ck(a.v[i], b.v[i]);
            return r;
        }
        case GroupKind::Heisenberg:
            return Element{add_ck(a.v[0], b.v[0]), add_ck(a.v[1], b.v[1]),
                           add_ck(add_ck(a.v[2], b.v[2]), mul_ck(a.v[0], b.v[1]))};
        case GroupKind::FiniteTable: return Element{d_->table[a.v[0]][b.v[0]]};
        case GroupKind::TreeDepth: {
            // (g∘h) swap at node (i,p) = h swap at (i,p) xor g swap at (i, h(p)).
            const int N = dim();
            uint64_t out = 0;
            const uint64_t ga = static_cast<uint64_t>(a.v[0]), hb = static_cast<uint64_t>(b.v[0]);
            for (int i = 0; i < N; ++i)
                for (uint64_t p = 0; p < (uint64_t(1) << i); ++p) {
                    const uint64_t node = ((uint64_t(1) << i) - 1) + p;
                    const uint64_t hp = tree_apply(b, p, i);
                    const uint64_t gnode = ((uint64_t(1) << i) - 1) + hp;
                    const uint64_t bit = ((hb >> node) & 1u) ^ ((ga >> gnode) & 1u);
                    out |= bit << node;
                }
            return Element{static_cast<int64_t>(out)};
        }
    }
    return {};
}

Element GroupCtx::inv(const Element& a) const {
    switch (kind()) {
        case GroupKind::IntLattice: {
            Element r;
            r.n = a.n;
            for (int i = 0; i < a.n; ++i) r.v[i] = sub_ck(0, a.v[i]);
            return r;
        }
        case GroupKind::Heisenberg:
            return Element{sub_ck(0, a.v[0]), sub_ck(0, a.v[1]), add_ck(sub_ck(0, a.v[2]), mul_ck(a.v[0], a.v[1]))};
        case GroupKind::FiniteTable: return Element{d_->inverse[a.v[0]]};
        case GroupKind::TreeDepth: {
            const int N = dim();
            uint64_t out = 0;
            const uint64_t ga = static_cast<uint64_t>(a.v[0]);
            for (int i = 0; i < N; ++i)
                for (uint64_t p = 0; p < (uint64_t(1) << i); ++p) {
                    const uint64_t node = ((uint64_t(1) << i) - 1) + p;
                    const uint64_t q = tree_apply(a, p, i);
                    out |= ((ga >> node) & 1u) << (((uint64_t(1) << i) - 1) + q);
                }
            return Element{static_cast<int64_t>(out)};
        }
    }
    return {};
}

Element GroupCtx::pow(const Element& a, int64_t k) const {
    Element base = k < 0 ? inv(a) : a;
    uint64_t e = k < 0 ? static_cast<uint64_t>(-(k + 1)) + 1 : static_cast<uint64_t>(k);
    Element r = identity();
    while (e) {
        if (e & 1) r = mul(r, base);
        e >>= 1;
        if (e) base = mul(base, base);
    }
    return r;
}

std::vector<Element> GroupCtx::symmetric_generators() const {
    std::vector<Element> out = generators();
    for (const auto& g : generators()) {
        Element gi = inv(g);
        if (std::find(out.begin(), out.end(), gi) == out.end()) out.push_back(gi);
    }
    return out;
}

std::vector<Element> GroupCtx::ball(int r) const {
    const auto S = symmetric_generators();
    std::vector<Element> out{identity()};
    std::unordered_set<Element, ElementHash> seen{identity()};
    size_t begin = 0;
    for (int layer = 0; layer < r; ++layer) {
        const size_t end = out.size();
        for (size_t i = begin; i < end; ++i)
            for (const auto& s : S) {
                Element h = mul(out[i], s);
                if (seen.insert(h).second) out.push_back(h);
            }
        begin = end;
    }
    return out;
}

std::vector<Element> GroupCtx::elements() const {
    std::vector<Element> out;
    if (kind() == GroupKind::FiniteTable) {
        for (int i = 0; i < dim(); ++i) out.push_back(Element{i});
    } else if (kind() == GroupKind::TreeDepth) {
        if (dim() > 4) fail(ErrorKind::Resource, "tree group too large to enumerate");
        for (size_t i = 0; i < order(); ++i) out.push_back(Element{static_cast<int64_t>(i)});
    } else {
        fail(ErrorKind::Precondition, "cannot enumerate an infinite group");
    }
    return out;
}

Element evaluate(const GroupCtx& g, const Word& w) {
    Element r = g.identity();
    for (const auto& [e, s] : w.letters) {
        g.check(e);
        if (s != 1 && s != -1) fail(ErrorKind::Usage, "word exponent must be +1 or -1");
        r = g.mul(r, s == 1 ? e : g.inv(e));
    }
    return r;
}

ProductSet product_set(const GroupCtx& g, const std::vector<Element>& a, const std::vector<Element>& b) {
    ProductSet out;
    std::unordered_set<Element, ElementHash> seen;
    seen.reserve(a.size() * b.size() * 2);
    for (const auto& x : a)
        for (const auto& y : b) {
            Element p = g.mul(x, y);
            if (seen.insert(p).second)
                out.elements.push_back(p);
            else
                out.disjoint = false;
        }
    std::sort(out.elements.begin(), out.elements.end());
    return out;
}

// ---------------------------------------------------------------- Subgroup

struct Subgroup::Impl {
    GroupCtx g;
    Family fam = Family::Whole;
    int64_t m = 0;
    std::vector<std::vector<int64_t>> basis;  // echelon rows, pivot of row i at coordinate i
    int64_t a = 1, b = 1, c = 1;
    Element h;
    std::optional<Subgroup> base;
    std::vector<Element> core_reps;
    std::vector<Element> elems;
    std::unordered_set<Element, ElementHash> elem_set;
    int level = 0;
    std::vector<Element> fam_gens;
    bool has_gens = false;
    std::string desc;

    mutable std::once_flag once;
    mutable std::shared_ptr<const CosetData> cosets;
};

namespace {

std::shared_ptr<Subgroup::Impl> make_impl(const GroupCtx& g, Family f) {
    auto p = std::make_shared<Subgroup::Impl>();
    p->g = g;
    p->fam = f;
    return p;
}

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

Key lattice_reduce(const std::vector<std::vector<int64_t>>& basis, const Element& g) {
    Key v(g.v.begin(), g.v.begin() + g.n);
    for (size_t i = 0; i < basis.size(); ++i) {
        const int64_t q = floor_div(v[i], basis[i][i]);
        if (q != 0)
            for (size_t j = i; j < v.size(); ++j) v[j] = sub_ck(v[j], mul_ck(q, basis[i][j]));
    }
    return v;
}

}  // namespace

Subgroup Subgroup::whole(const GroupCtx& g) {
    auto p = make_impl(g, Family::Whole);
    p->fam_gens = g.generators();
    p->has_gens = true;
    p->desc = "whole";
    return Subgroup(p);
}

Subgroup Subgroup::modulus(const GroupCtx& g, int64_t m) {
    if (g.kind() != GroupKind::IntLattice || g.dim() != 1) fail(ErrorKind::Type, "mod family requires the integers");
    if (m <= 0) fail(ErrorKind::Usage, "modulus must be positive");
    auto p = make_impl(g, Family::ZModulus);
    p->m = m;
    p->basis = {{m}};
    p->fam_gens = {Element{m}};
    p->has_gens = true;
    p->desc = std::to_string(m) + "Z";
    return Subgroup(p);
}

Subgroup Subgroup::lattice_cols(const GroupCtx& g, std::vector<std::vector<int64_t>> cols) {
    if (g.kind() != GroupKind::IntLattice) fail(ErrorKind::Type, "lattice family requires Z^d");
    const int d = g.dim();
    std::vector<std::vector<int64_t>> rows;
    for (auto& c : cols) {
        if (static_cast<int>(c.size()) != d) fail(ErrorKind::Usage, "lattice column has wrong dimension");
        rows.push_back(c);
    }
    auto p = make_impl(g, Family::LatticeCols);
    for (const auto& r : rows) p->fam_gens.push_back(Element::of(r));
    p->has_gens = true;
    // Integer row echelon form (pivot of basis row i at coordinate i).
    for (int i = 0; i < d; ++i) {
        for (;;) {
            std::vector<size_t> nz;
            for (size_t k = 0; k < rows.size(); ++k)
                if (rows[k][i] != 0) nz.push_back(k);
            if (nz.empty()) fail(ErrorKind::Usage, "lattice columns do not span a finite-index sublattice");
            if (nz.size() == 1) {
                auto piv = rows[nz[0]];
                if (piv[i] < 0)
                    for (auto& x : piv) x = -x;
                p->basis.push_back(piv);
                rows.erase(rows.begin() + nz[0]);
                break;
            }
            size_t best = nz[0];
            for (size_t k : nz)
                if (std::llabs(rows[k][i]) < std::llabs(rows[best][i])) best = k;
            for (size_t k : nz) {
                if (k == best) continue;
                const int64_t q = rows[k][i] / rows[best][i];
                for (int j = 0; j < d; ++j) rows[k][j] = sub_ck(rows[k][j], mul_ck(q, rows[best][j]));
            }
        }
    }
    std::ostringstream os;
    os << "lattice[";
    for (size_t i = 0; i < p->basis.size(); ++i) {
        os << (i ? ";" : "");
        for (int j = 0; j < d; ++j) os << (j ? "," : "") << p->basis[i][j];
    }
    os << "]";
    p->desc = os.str();
    return Subgroup(p);
}

Subgroup Subgroup::heis_congruence(const GroupCtx& g, int64_t a, int64_t b, int64_t c) {
    if (g.kind() != GroupKind::Heisenberg) fail(ErrorKind::Type, "heis_congruence requires H3(Z)");
    if (a <= 0 || b <= 0 || c <= 0) fail(ErrorKind::Usage, "heis_congruence moduli must be positive");
    if (mul_ck(a, b) % c != 0) fail(ErrorKind::Usage, "heis_congruence needs c | a*b to be a subgroup");
    auto p = make_impl(g, Family::HeisCongruence);
    p->a = a;
    p->b = b;
    p->c = c;
    p->fam_gens = {Element{a, 0, 0}, Element{0, b, 0}, Element{0, 0, c}};
    p->has_gens = true;
    p->desc = "heis(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
    return Subgroup(p);
}

Subgroup Subgroup::conjugated(const Element& h, const Subgroup& base) {
    const GroupCtx& g = base.group();
    g.check(h);
    auto p = make_impl(g, Family::Conjugated);
    p->h = h;
    p->base = base;
    p->has_gens = base.has_family_generators();
    if (p->has_gens)
        for (const auto& x : base.generators()) p->fam_gens.push_back(g.conj(h, x));
    p->desc = h.str() + "*" + base.describe() + "*" + h.str() + "^-1";
    return Subgroup(p);
}

Subgroup Subgroup::normal_core(const Subgroup& base) {
    const GroupCtx& g = base.group();
    auto p = make_impl(g, Family::NormalCore);
    p->base = base;
    const auto cs = base.cosets();
    const auto bg = base.generators();
    // Keep one representative per distinct conjugate r Γ r^-1 (r ~ s iff s^-1 r normalizes Γ).
    for (const auto& r : cs.reps()) {
        bool dup = false;
        for (const auto& k : p->core_reps) {
            const Element s = g.mul(g.inv(k), r);
            bool normalizes = true;
            for (const auto& x : bg)
                if (!base.member(g.conj(s, x))) {
                    normalizes = false;
                    break;
                }
            if (normalizes) {
                dup = true;
                break;
            }
        }
        if (!dup) p->core_reps.push_back(r);
    }
    p->desc = "core(" + base.describe() + ")";
    return Subgroup(p);
}

Subgroup Subgroup::finite_subset(const GroupCtx& g, std::vector<Element> elems) {
    if (g.kind() != GroupKind::FiniteTable && g.kind() != GroupKind::TreeDepth)
        fail(ErrorKind::Type, "finite subset family requires a finite group");
    auto p = make_impl(g, Family::FiniteSubset);
    for (auto& e : elems) g.check(e);
    std::sort(elems.begin(), elems.end());
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    p->elem_set.insert(elems.begin(), elems.end());
    if (!p->elem_set.count(g.identity())) fail(ErrorKind::Usage, "finite subset lacks the identity");
    for (const auto& x : elems)
        for (const auto& y : elems)
            if (!p->elem_set.count(g.mul(x, g.inv(y)))) fail(ErrorKind::Usage, "finite subset is not a subgroup");
    p->elems = elems;
    p->fam_gens = elems;
    p->has_gens = true;
    std::string d = "{";
    for (size_t i = 0; i < elems.size(); ++i) d += (i ? "," : "") + elems[i].str();
    p->desc = d + "}";
    return Subgroup(p);
}

Subgroup Subgroup::tree_stabilizer(const GroupCtx& g, int level) {
    if (g.kind() != GroupKind::TreeDepth) fail(ErrorKind::Type, "tree stabilizer requires a tree group");
    if (level < 0 || level > g.tree_depth()) fail(ErrorKind::Usage, "stabilizer level out of range");
    auto p = make_impl(g, Family::TreeStabilizer);
    p->level = level;
    p->desc = "stab(0^" + std::to_string(level) + ")";
    return Subgroup(p);
}

const GroupCtx& Subgroup::group() const { return p_->g; }
Family Subgroup::family() const { return p_->fam; }
std::string Subgroup::describe() const { return p_->desc; }
bool Subgroup::has_family_generators() const { return p_->has_gens; }
const Subgroup* Subgroup::base() const { return p_->base ? &*p_->base : nullptr; }
std::optional<Element> Subgroup::conjugator() const {
    if (p_->fam == Family::Conjugated) return p_->h;
    return std::nullopt;
}
const std::vector<Element>& Subgroup::core_reps() const { return p_->core_reps; }

bool Subgroup::member(const Element& x) const {
    const Impl& p = *p_;
    p.g.check(x);
    switch (p.fam) {
        case Family::Whole: return true;
        case Family::ZModulus: return x.v[0] % p.m == 0;
        case Family::LatticeCols: {
            Key k = lattice_reduce(p.basis, x);
            return std::all_of(k.begin(), k.end(), [](int64_t v) { return v == 0; });
        }
        case Family::HeisCongruence: return x.v[0] % p.a == 0 && x.v[1] % p.b == 0 && x.v[2] % p.c == 0;
        case Family::Conjugated: return p.base->member(p.g.mul(p.g.mul(p.g.inv(p.h), x), p.h));
        case Family::NormalCore:
            for (const auto& k : p.core_reps)
                if (!p.base->member(p.g.mul(p.g.mul(p.g.inv(k), x), k))) return false;
            return true;
        case Family::FiniteSubset: return p.elem_set.count(x) > 0;
        case Family::TreeStabilizer: return p.g.tree_apply(x, 0, p.level) == 0;
    }
    return false;
}

Key Subgroup::key(const Element& x) const {
    const Impl& p = *p_;
    switch (p.fam) {
        case Family::Whole: return {};
        case Family::ZModulus: return {floor_mod(x.v[0], p.m)};
        case Family::LatticeCols: return lattice_reduce(p.basis, x);
        case Family::HeisCongruence: {
            // x·(ia, jb, kc) = (x+ia, y+jb, z+kc+x·jb): fix i, j by the first two residues.
            const int64_t xr = floor_mod(x.v[0], p.a);
            const int64_t yr = floor_mod(x.v[1], p.b);
            const __int128 z = static_cast<__int128>(x.v[2]) + static_cast<__int128>(x.v[0]) * (yr - x.v[1]);
            __int128 zr = z % p.c;
            if (zr < 0) zr += p.c;
            return {xr, yr, static_cast<int64_t>(zr)};
        }
        case Family::Conjugated: return p.base->key(p.g.mul(x, p.h));
        case Family::NormalCore: {
            Key out;
            for (const auto& k : p.core_reps) {
                Key part = p.base->key(p.g.mul(x, k));
                out.insert(out.end(), part.begin(), part.end());
            }
            return out;
        }
        case Family::FiniteSubset: {
            int64_t best = INT64_MAX;
            for (const auto& e : p.elems) best = std::min(best, p.g.mul(x, e).v[0]);
            return {best};
        }
        case Family::TreeStabilizer: return {static_cast<int64_t>(p.g.tree_apply(x, 0, p.level))};
    }
    return {};
}

CosetSpace Subgroup::cosets() const {
    std::call_once(p_->once, [this] { p_->cosets = CosetSpace(*this).d_; });
    return CosetSpace(*this, p_->cosets);
}

size_t Subgroup::index() const { return cosets().size(); }

std::vector<Element> Subgroup::generators() const {
    if (p_->has_gens) return p_->fam_gens;
    return cosets().schreier_generators();
}

// ---------------------------------------------------------------- cosets

CosetSpace::CosetSpace(const Subgroup& sub, size_t cap) : sub_(sub) {
    const GroupCtx& g = sub.group();
    const auto S = g.symmetric_generators();
    auto d = std::make_shared<CosetData>();
    d->perm.assign(S.size(), {});
    d->reps.push_back(g.identity());
    d->index.emplace(sub.key(g.identity()), 0);
    for (size_t i = 0; i < d->reps.size(); ++i) {
        for (size_t s = 0; s < S.size(); ++s) {
            Element h = g.mul(S[s], d->reps[i]);
            auto [it, fresh] = d->index.emplace(sub.key(h), static_cast<uint32_t>(d->reps.size()));
            if (fresh) {
                if (d->reps.size() >= cap)
                    fail(ErrorKind::Resource, "coset enumeration of " + sub.describe() + " exceeded cap " + std::to_string(cap));
                d->reps.push_back(h);
            }
            d->perm[s].push_back(it->second);
        }
    }
    d_ = d;
}

uint32_t CosetSpace::locate(const Element& g) const {
    auto it = d_->index.find(sub_.key(g));
    if (it == d_->index.end()) fail(ErrorKind::Precondition, "element " + g.str() + " has no coset in the table");
    return it->second;
}

std::vector<Element> CosetSpace::schreier_generators() const {
    const GroupCtx& g = sub_.group();
    const auto S = g.symmetric_generators();
    std::vector<Element> out;
    std::unordered_set<Element, ElementHash> seen;
    for (size_t i = 0; i < size(); ++i)
        for (size_t s = 0; s < S.size(); ++s) {
            const uint32_t j = d_->perm[s][i];
            Element x = g.mul(g.mul(g.inv(d_->reps[j]), S[s]), d_->reps[i]);
            if (!g.is_identity(x) && seen.insert(x).second) out.push_back(x);
        }
    if (out.empty()) out.push_back(g.identity());
    return out;
}

CosetSpace coset_table(const Subgroup& sub, size_t cap) {
    if (cap == Subgroup::kDefaultCosetCap) return sub.cosets();
    return CosetSpace(sub, cap);
}

Subgroup normal_core(const Subgroup& sub) { return Subgroup::normal_core(sub); }

Subgroup conjugate(const Element& g, const Subgroup& sub) { return Subgroup::conjugated(g, sub); }

size_t permutation_group_order(const std::vector<std::vector<uint32_t>>& perms, size_t cap) {
    if (perms.empty()) return 1;
    const size_t n = perms[0].size();
    std::vector<uint32_t> id(n);
    for (size_t i = 0; i < n; ++i) id[i] = static_cast<uint32_t>(i);
    struct VH {
        size_t operator()(const std::vector<uint32_t>& v) const noexcept {
            uint64_t h = 1469598103934665603ull;
            for (uint32_t x : v) h = (h ^ x) * 1099511628211ull;
            return h;
        }
    };
    std::unordered_set<std::vector<uint32_t>, VH> seen{id};
    std::deque<std::vector<uint32_t>> q{id};
    while (!q.empty()) {
        auto cur = std::move(q.front());
        q.pop_front();
        for (const auto& p : perms) {
            std::vector<uint32_t> nx(n);
            for (size_t i = 0; i < n; ++i) nx[i] = p[cur[i]];
            if (seen.insert(nx).second) {
                if (seen.size() > cap) fail(ErrorKind::Resource, "permutation group order exceeds cap");
                q.push_back(std::move(nx));
            }
        }
    }
    return seen.size();
}

std::vector<Element> relative_transversal(const Subgroup& outer, const Subgroup& inner, size_t cap) {
    const GroupCtx& g = outer.group();
    std::vector<Element> S = outer.generators();
    {
        const size_t k = S.size();
        for (size_t i = 0; i < k; ++i) {
            Element x = g.inv(S[i]);
            if (std::find(S.begin(), S.end(), x) == S.end()) S.push_back(x);
        }
    }
    std::vector<Element> reps{g.identity()};
    std::unordered_set<Key, KeyHash> seen{inner.key(g.identity())};
    for (size_t i = 0; i < reps.size(); ++i)
        for (const auto& s : S) {
            Element h = g.mul(s, reps[i]);
            if (seen.insert(inner.key(h)).second) {
                if (reps.size() >= cap) fail(ErrorKind::Resource, "relative transversal exceeded cap");
                reps.push_back(h);
            }
        }
    return reps;
}

}  // namespace cf
