#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cfforge/factors.hpp"

namespace cf {

// Strictly decreasing chain Γ_1 ⊋ Γ_2 ⊋ … of cofinite subgroups, produced on demand; Γ_0 := G.
class OdometerSpec {
public:
    using Rule = std::function<Subgroup(int n)>;
    OdometerSpec() = default;
    OdometerSpec(GroupCtx g, std::string name, Rule rule, int depth_cap);

    const GroupCtx& group() const { return d_->g; }
    const std::string& name() const { return d_->name; }
    int depth_cap() const { return d_->cap; }
    // Γ_n for 0 <= n <= depth_cap (memoized).
    const Subgroup& gamma(int n) const;

private:
    struct Data {
        GroupCtx g;
        std::string name;
        Rule rule;
        int cap = 0;
        mutable std::mutex mu;
        mutable std::map<int, Subgroup> cache;
    };
    std::shared_ptr<Data> d_;
};

// (g_1Γ_1, …, g_NΓ_N) as transversal indices of each G/Γ_n.
struct CosetChain {
    std::vector<uint32_t> idx;
    friend bool operator==(const CosetChain& a, const CosetChain& b) { return a.idx == b.idx; }
};

bool chain_consistent(const OdometerSpec& spec, const CosetChain& y);
CosetChain chain_of(const OdometerSpec& spec, const Element& g, int N);  // (gΓ_1, …, gΓ_N)
CosetChain odometer_act(const OdometerSpec& spec, const Element& g, const CosetChain& y);

struct ChainLevelCheck {
    int n = 0;
    bool nested = true;   // Γ_{n+1} ⊂ Γ_n on generators of Γ_{n+1}
    bool strict = true;   // a proper coset witness exists
    size_t index = 0;     // [G : Γ_n]
    std::optional<Element> witness;
};
struct ChainReport {
    int depth = 0;
    bool ok = true;
    std::vector<ChainLevelCheck> levels;
    bool faithful_window = true;  // no nonidentity radius-2 element in the core of Γ_depth
    std::optional<Element> unfaithful_witness;
};
ChainReport validate_chain(const OdometerSpec& spec, int depth);

struct CrossSections {
    std::vector<std::vector<Element>> D;  // D_1..D_N, identity first
    std::vector<bool> omega_bijective;    // ω_n : G/Γ_n → D_1···D_n
    std::vector<bool> square_commutes;    // diagram (n → n+1) for n < N
};
CrossSections cross_sections(const OdometerSpec& spec, int N);

// C_n = D_n, F_n = D_1···D_n, ν_n = κ_1*…*κ_n; kappas[n-1] must be supported on D_n.
CFParams rank_one_odometer_params(const OdometerSpec& spec, const std::vector<FinMeasure>& kappas);

struct NormalCoverLevel {
    int n = 0;
    size_t index_gamma = 0;         // [G : Γ_n]
    size_t index_core = 0;          // [G : Γ̃_n]
    size_t ratio = 0;               // [Γ_n : Γ̃_n] = |Γ_n/Γ̃_n|
    bool next_inside_core = false;  // Γ_{n+1} ⊆ Γ̃_n (generator test)
    size_t h_image = 0;             // |Γ_N Γ̃_n / Γ̃_n|: consistent H-entries at level n
};
struct NormalCover {
    int N = 0;
    std::vector<Subgroup> cores;  // Γ̃_1..Γ̃_N
    std::vector<NormalCoverLevel> levels;
    bool levelwise_injective = false;  // [Γ_N : Γ̃_N] == 1
    bool limit_injective = false;      // the level-(N+1) Γ-chain determines the level-N Γ̃-chain
};
NormalCover normal_cover(const OdometerSpec& spec, int N);
// Cover chain of g projected by coset coarsening (Γ̃_n ↦ Γ_n).
CosetChain cover_project(const OdometerSpec& spec, const NormalCover& cover, const CosetChain& cover_chain);
// Splits each G/Γ_N coset's mass uniformly over the Γ̃_N-cosets it contains.
std::vector<Rational> cover_measure(const OdometerSpec& spec, const NormalCover& cover,
                                    const std::vector<Rational>& level_measure);

struct RankOneCover {
    CFParams params;
    int N = 0;
    std::vector<std::vector<Element>> D;  // untranslated cross-sections of Γ_{n-1}/Γ_n
    std::vector<Element> shifts_used;     // right translates applied (per C element, flattened)
    std::vector<bool> tau_bijective;      // τ_k : C_1×…×C_k → G/Γ_k, k = 1..N
    std::vector<bool> tau_uniform;        // pushforward of the uniform product measure is uniform
};
// Builds C_n ⊂ Γ_{n-1} (cross-section of Γ_{n-1}/Γ_n, spread by right translates inside Γ_n)
// and F_n = B·F_{n-1}C_n with B the radius-`radius` ball; F_N is kept implicit.
RankOneCover rank_one_cover(const OdometerSpec& spec, int N, int radius = 1, size_t spread_cap = 4096);
// τ(x)_k = f_n c_{n+1}···c_k Γ_k for a point realized deep enough.
CosetChain tau(const OdometerSpec& spec, const CFParams& T, const CFPoint& x, int levels);

// Rule y: n ↦ g_n with g_n^-1 g_{n+1} ∈ Γ_n.
using ChainRule = std::function<Element(int n)>;
ChainRule identity_chain(const GroupCtx& g);

// Terms κ̃_n({c ∉ g_nΓ_ng_n^-1}) for n = 1..depth, optionally after telescoping by l.
Verdict odometer_compatibility(const CFParams& T, const OdometerSpec& spec, const ChainRule& y, int depth,
                               const std::vector<int>& l = {}, const Rational& threshold = default_threshold());

// Per-level stabilized cosets; nullopt if some level is unstabilized.
std::optional<CosetChain> odometer_factor_map(const CFParams& T, const OdometerSpec& spec, const ChainRule& y,
                                              const CFPoint& x, int levels, int window = 2);

struct IsoProbe {
    int l = 0, m = 0;
    Rational value;   // min over D_l of ν_m(C_{n+1}···C_m △ {f : f g_l Γ_l ∈ D_l})
    size_t d_size = 0;
};
struct IsoReport {
    bool passes = false;
    bool inconclusive = false;  // no probes
    int best_l = -1;
    std::vector<IsoProbe> probes;
    std::vector<Rational> envelope;  // per l: max over the tail m ∈ [m_lo + count/2, m_max]
    Rational envelope_min;
};
IsoReport isomorphism_check(const CFParams& T, const OdometerSpec& spec, const ChainRule& y, int n,
                            const Rational& eps, int l_max, int m_max);
// Same quantity by brute force over all subsets D ⊂ G/Γ_l (small indices only).
Rational iso_value_bruteforce(const CFParams& T, const OdometerSpec& spec, const ChainRule& y, int n, int l, int m);

}  // namespace cf
