#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfforge/cf.hpp"

namespace cf {

// Terms κ_n({c ∈ C_n : c ∉ gΓg^-1}) for n = 1..depth with a verdict on their sum.
Verdict coset_compatibility(const CFParams& T, const Element& g, const Subgroup& gamma, int depth,
                            const Rational& threshold = default_threshold());

struct StabilizedCoset {
    std::optional<uint32_t> coset;  // nullopt: Unstabilized
    int stabilized_at = -1;         // least m from which the coset is constant up to the horizon
    std::vector<uint32_t> trail;    // coset index at m = n..horizon
};
// Coset of f_n c_{n+1}···c_m g Γ, accepted once constant over the last `window` probed stages.
StabilizedCoset finite_factor_map(const CFParams& T, const Element& g, const Subgroup& gamma, const CFPoint& x,
                                  int window = 2);

// Mass of κ_a*…*κ_b outside gΓg^-1 where gΓ is coset j of G/Γ.
Rational window_mass(const CFParams& T, const CosetSpace& cs, uint32_t j, int a, int b);

struct WindowEvidence {
    int a = 0, b = 0;
    Rational min_mass;   // min over cosets j
    uint32_t argmin = 0;
};

struct ScanOptions {
    int max_depth = 10;
    int max_offset = -1;  // -1: max_depth / 2
};

struct FactorReport {
    std::string target;
    size_t index = 0;
    bool positive = false;
    uint32_t coset = 0;
    Element coset_rep;
    std::vector<int> telescoping;        // l = (0, q_1, q_2, …) when positive
    std::vector<Rational> window_masses; // masses along the accepted schedule
    std::vector<WindowEvidence> evidence;  // every window [a, b] ⊂ [1, max_depth]
    Rational evidence_min;
    Verdict verdict;
};
// Searches cosets (least index first), offsets and schedules (identity, then growing windows)
// for window masses below 2^-k; otherwise reports window minima as refutation evidence.
FactorReport finite_factor_scan(const CFParams& T, const Subgroup& gamma, const ScanOptions& opt = {});

struct TotalErgodicityReport {
    std::vector<FactorReport> scans;
    bool totally_ergodic_relative = false;  // every scan refuted
};
TotalErgodicityReport total_ergodicity_scan(const CFParams& T, const std::vector<Subgroup>& subgroups,
                                            const ScanOptions& opt = {});

}  // namespace cf
