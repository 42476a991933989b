#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cfforge/odometers.hpp"

namespace cf {

// ---------------------------------------------------------------- Z, cutting and stacking

int64_t fgsw_h(int n);  // h_0 = 1, h_{n+1} = 4h_n + 2^{n+1}
CFParams fgsw(int cap = 28);

// κ_n = κ¹_n * κ²_n with κ¹_n uniform on {0, h_{n-1}} and κ²_n = (p_n, 1 - p_n) on {0, 4^n}.
using WeightRule = std::function<Rational(int n)>;
FinMeasure fgsw_kappa1(int n);
FinMeasure fgsw_kappa2(int n, const Rational& p);
CFParams fgsw_split(WeightRule p = {}, int cap = 28);

// ---------------------------------------------------------------- Heisenberg group

int64_t heis_h(int n);  // h_0 = 1, h_{n+1} = 16h_n + 9·4^{n+1}
CFParams heisenberg_rank_one(int cap = 14);
OdometerSpec heisenberg_2adic_chain(int cap = 8);   // Γ_n = (2^n, 2^n, 2^n)
OdometerSpec heisenberg_nonnormal(int cap = 8);     // Γ_n = (2^{n-1}, 2^n, 2^n)
Subgroup heisenberg_sigma(int q);                   // Σ_q = (2^q, 2^q, 4^q)

// ---------------------------------------------------------------- odometers of Z

OdometerSpec z_product_odometer(std::vector<int64_t> a);  // Γ_n = a_1···a_n Z
// Uniform (or given) κ_n on the cross-section D_n = a_1···a_{n-1}·{0, …, a_n - 1}.
CFParams z_product_params(const std::vector<int64_t>& a, const std::vector<std::vector<Rational>>& weights = {});

// ---------------------------------------------------------------- finite scenarios

struct S3Scenario {
    GroupCtx group;                         // Z_3 ⋊ Z_2, element a + 3b
    Subgroup gamma;                         // {0} × Z_2
    std::vector<std::pair<int, int>> Y;     // off-diagonal pairs of Z_3 × Z_3
    std::pair<int, int> act(const Element& g, std::pair<int, int> y) const;
    int act_z3(const Element& g, int t) const;  // G on G/Γ = Z_3
    bool transitive = false;
    bool free_action = false;
    bool partitions_distinct = false;
    bool projections_equivariant = false;
};
S3Scenario s3_two_factors();

struct TreeScenario {
    GroupCtx group;  // TreeDepth(N)
    OdometerSpec chain;  // stabilizers of 0^n
    Element R;           // flips z_2 when z_1 = 1
    bool R_nontrivial = false;
    bool R_fixes_zero = false;   // R ∈ Γ_N
    size_t stabilizer_order = 0; // |Γ_N|
};
TreeScenario tree_nonfree(int N = 4);

// ---------------------------------------------------------------- registry

struct CatalogEntry {
    std::string name;
    std::string kind;  // "params", "chain", "scenario"
    std::string description;
    int default_depth = 8;
};
const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(const std::string& name);
CFParams catalog_params(const std::string& name);
OdometerSpec catalog_chain(const std::string& name);

}  // namespace cf
