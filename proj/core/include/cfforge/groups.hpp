#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cfforge/base.hpp"

namespace cf {

enum class GroupKind { IntLattice, Heisenberg, FiniteTable, TreeDepth };

// A concrete countable group with exact arithmetic. Cheap to copy (shared data).
class GroupCtx {
public:
    static GroupCtx integers();
    static GroupCtx lattice(int d);
    static GroupCtx heisenberg();
    // table[i][j] = index of e_i * e_j; element 0 must be the identity.
    static GroupCtx finite_table(std::string name, std::vector<std::vector<int>> table,
                                 std::vector<int> generators);
    // Finitary automorphisms of the binary tree truncated at depth N (N <= 6).
    static GroupCtx tree(int depth);

    GroupKind kind() const { return d_->kind; }
    const std::string& name() const { return d_->name; }
    int dim() const { return d_->dim; }
    int tree_depth() const { return d_->dim; }
    size_t order() const;  // finite groups only, 0 otherwise

    Element identity() const;
    Element mul(const Element& a, const Element& b) const;
    Element inv(const Element& a) const;
    Element conj(const Element& g, const Element& h) const { return mul(mul(g, h), inv(g)); }
    Element pow(const Element& a, int64_t k) const;
    bool is_identity(const Element& a) const { return a == identity(); }
    void check(const Element& a) const;  // throws Type error if a is not of this group

    // Generators in a fixed order; `symmetric_generators` appends the inverses (deduplicated).
    const std::vector<Element>& generators() const { return d_->gens; }
    std::vector<Element> symmetric_generators() const;
    // Elements of word length <= r in the symmetric generators, BFS order.
    std::vector<Element> ball(int r) const;
    // All group elements (finite groups only).
    std::vector<Element> elements() const;

    // TreeDepth: image of the point z in {0,1}^k (bit i = z_{i+1}) for k <= depth.
    uint64_t tree_apply(const Element& g, uint64_t z, int k) const;
    // TreeDepth: element from per-node swap bits (node id (1<<k)-1+prefix).
    Element tree_element(uint64_t swaps) const;

    bool same(const GroupCtx& o) const { return d_ == o.d_ || (d_->kind == o.d_->kind && d_->dim == o.d_->dim && d_->kind != GroupKind::FiniteTable); }

private:
    struct Data {
        GroupKind kind;
        std::string name;
        int dim = 0;
        std::vector<Element> gens;
        std::vector<std::vector<int>> table;
        std::vector<int> inverse;
    };
    std::shared_ptr<const Data> d_;
};

struct Word {
    std::vector<std::pair<Element, int>> letters;  // (element, ±1)
};
Element evaluate(const GroupCtx& g, const Word& w);

struct ProductSet {
    std::vector<Element> elements;  // sorted canonical order
    bool disjoint = true;           // |AB| == |A||B|
};
ProductSet product_set(const GroupCtx& g, const std::vector<Element>& a, const std::vector<Element>& b);

enum class Family { Whole, ZModulus, LatticeCols, HeisCongruence, Conjugated, NormalCore, FiniteSubset, TreeStabilizer };

class CosetSpace;
struct CosetData;

// Finite-index subgroup given by a closed-form membership family.
class Subgroup {
public:
    static Subgroup whole(const GroupCtx& g);
    static Subgroup modulus(const GroupCtx& g, int64_t m);                               // mZ in Z
    static Subgroup lattice_cols(const GroupCtx& g, std::vector<std::vector<int64_t>> cols);  // columns
    static Subgroup heis_congruence(const GroupCtx& g, int64_t a, int64_t b, int64_t c);
    static Subgroup conjugated(const Element& h, const Subgroup& base);  // h base h^-1
    static Subgroup normal_core(const Subgroup& base);
    static Subgroup finite_subset(const GroupCtx& g, std::vector<Element> elems);
    static Subgroup tree_stabilizer(const GroupCtx& g, int level);  // stabilizer of 0^level

    const GroupCtx& group() const;
    Family family() const;
    std::string describe() const;
    bool member(const Element& g) const;
    // Left-coset key: key(a) == key(b) iff a^-1 b is a member.
    Key key(const Element& g) const;
    // Family generators when available (else Schreier generators from the coset table).
    std::vector<Element> generators() const;
    bool has_family_generators() const;

    static constexpr size_t kDefaultCosetCap = 1u << 20;
    CosetSpace cosets() const;  // cached coset table at the default cap
    size_t index() const;

    const Subgroup* base() const;  // Conjugated / NormalCore base
    std::optional<Element> conjugator() const;
    const std::vector<Element>& core_reps() const;  // NormalCore: conjugation-distinct reps

    bool operator==(const Subgroup& o) const { return p_ == o.p_; }

    struct Impl;

private:
    std::shared_ptr<const Impl> p_;
    explicit Subgroup(std::shared_ptr<const Impl> p) : p_(std::move(p)) {}
    friend class CosetSpace;
};

struct CosetData {
    std::vector<Element> reps;
    std::unordered_map<Key, uint32_t, KeyHash> index;
    std::vector<std::vector<uint32_t>> perm;  // per symmetric generator
};

// The finite left G-set G/Γ with a BFS transversal.
class CosetSpace {
public:
    CosetSpace(const Subgroup& sub, size_t cap = Subgroup::kDefaultCosetCap);

    const Subgroup& subgroup() const { return sub_; }
    size_t size() const { return d_->reps.size(); }
    const std::vector<Element>& reps() const { return d_->reps; }
    const Element& rep(size_t i) const { return d_->reps[i]; }
    // Index of the coset containing g.
    uint32_t locate(const Element& g) const;
    // Index of g·(coset i).
    uint32_t act(const Element& g, uint32_t i) const { return locate(sub_.group().mul(g, d_->reps[i])); }
    const std::vector<std::vector<uint32_t>>& generator_perms() const { return d_->perm; }
    // r_j^-1 s r_i for every edge; generates the subgroup.
    std::vector<Element> schreier_generators() const;

private:
    CosetSpace(Subgroup sub, std::shared_ptr<const CosetData> d) : sub_(std::move(sub)), d_(std::move(d)) {}
    Subgroup sub_;
    std::shared_ptr<const CosetData> d_;
    friend class Subgroup;
};

CosetSpace coset_table(const Subgroup& sub, size_t cap = Subgroup::kDefaultCosetCap);
Subgroup normal_core(const Subgroup& sub);
Subgroup conjugate(const Element& g, const Subgroup& sub);

// Order of the permutation group generated by `perms` (closure by BFS, capped).
size_t permutation_group_order(const std::vector<std::vector<uint32_t>>& perms, size_t cap);

// Cosets of `inner` inside `outer` (inner ⊂ outer), BFS within `outer` using its generators.
// The identity comes first.
std::vector<Element> relative_transversal(const Subgroup& outer, const Subgroup& inner, size_t cap = 1u << 20);

}  // namespace cf
