#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfforge/measures.hpp"

namespace cf {

inline Rational default_threshold() { return Rational(1, 1000000); }
constexpr int kDefaultProbeDepth = 12;

// ---------------------------------------------------------------- shapes F_n

class Shape {
public:
    virtual ~Shape() = default;
    virtual bool contains(const Element& e) const = 0;
    virtual BigInt size() const = 0;
    // Visits every element once, in canonical order for explicit/interval/box shapes.
    virtual void for_each(const std::function<void(const Element&)>& f) const = 0;
    // [lo, hi) when the shape is an integer interval.
    virtual std::optional<std::pair<int64_t, int64_t>> interval() const { return std::nullopt; }
    // (a, b, c) when the shape is the Heisenberg box Π(a, b, c).
    virtual std::optional<std::array<int64_t, 3>> box() const { return std::nullopt; }
    std::vector<Element> elements(size_t cap = size_t(1) << 26) const;
};

std::shared_ptr<const Shape> explicit_shape(const GroupCtx& g, std::vector<Element> elems);
std::shared_ptr<const Shape> interval_shape(int64_t lo, int64_t hi);
std::shared_ptr<const Shape> box_shape(int64_t a, int64_t b, int64_t c);

// ---------------------------------------------------------------- stage sources

// Stage data (C_n, F_{n-1}, κ_n, ν_{n-1}) produced on demand.
class StageSource {
public:
    virtual ~StageSource() = default;
    virtual const GroupCtx& group() const = 0;
    virtual std::string name() const = 0;
    virtual int c_cap() const = 0;  // C_n, κ_n realizable for 1 <= n <= c_cap
    virtual int f_cap() const = 0;  // F_n, ν_n realizable for 0 <= n <= f_cap
    virtual const std::vector<Element>& C(int n) const = 0;
    virtual const FinMeasure& kappa(int n) const = 0;
    virtual const Shape& F(int n) const = 0;
    virtual Rational nu(int n, const Element& f) const = 0;  // 0 off F_n
    virtual Rational nu_total(int n) const;
    // Constant value of ν_n on F_n when known in closed form.
    virtual std::optional<Rational> uniform_nu(int) const { return std::nullopt; }
    // Rule-asserted bound max κ_n <= bound < 1 at every stage (used by the max-κ product verdict).
    virtual std::optional<Rational> kappa_max_bound() const { return std::nullopt; }
};

// Computes ν_n(f) from ν_n(fc) = ν_{n-1}(f)κ_n(c) by peeling a copy c ∈ C_n with f c^-1 ∈ F_{n-1}; `spacer` weighs the rest.
Rational nu_by_decomposition(const StageSource& s, int n, const Element& f,
                             const std::function<Rational(int, const Element&)>& spacer);

class CFParams {
public:
    CFParams() = default;
    explicit CFParams(std::shared_ptr<const StageSource> s) : s_(std::move(s)) {}

    const StageSource& source() const { return *s_; }
    const std::shared_ptr<const StageSource>& ptr() const { return s_; }
    const GroupCtx& group() const { return s_->group(); }
    std::string name() const { return s_->name(); }
    int c_cap() const { return s_->c_cap(); }
    int f_cap() const { return s_->f_cap(); }
    const std::vector<Element>& C(int n) const;
    const FinMeasure& kappa(int n) const;
    const Shape& F(int n) const;
    Rational nu(int n, const Element& f) const;
    Rational nu_total(int n) const;

private:
    std::shared_ptr<const StageSource> s_;
};

// Explicit prefix: C = (C_1..C_N), kappa likewise, F = (F_0..F_M), nu likewise.
CFParams explicit_params(const GroupCtx& g, std::string name, std::vector<std::vector<Element>> C,
                         std::vector<FinMeasure> kappa, std::vector<std::vector<Element>> F, std::vector<FinMeasure> nu);
// Convenience: ν from ν_n(fc) = ν_{n-1}(f)κ_n(c) on F_{n-1}C_n, spacers filled uniformly with `spacer_total[n]` (n >= 1).
CFParams explicit_params_spacer_fill(const GroupCtx& g, std::string name, std::vector<std::vector<Element>> C,
                                     std::vector<FinMeasure> kappa, std::vector<std::vector<Element>> F,
                                     const std::vector<Rational>& spacer_total);

// ---------------------------------------------------------------- verdicts

enum class VerdictTag { TermwiseZero, ConvergentIndicated, DivergentIndicated, Inconclusive };
std::string tag_name(VerdictTag t);

struct Verdict {
    VerdictTag tag = VerdictTag::Inconclusive;
    int depth = 0;
    int zero_beyond = -1;  // TermwiseZero: every term after this stage is exactly 0
    std::vector<Rational> terms;
    std::vector<Rational> partial_sums;
    std::optional<Rational> lower_bound;  // DivergentIndicated evidence
    std::string note;
};

// Bounded-depth verdict for Σ terms (terms[i] is the stage-(i+1) term).
Verdict series_verdict(std::vector<Rational> terms, const Rational& threshold = default_threshold(), int zero_window = 2);

// ---------------------------------------------------------------- validation

struct StageCheck {
    int n = 0;  // checks F_n C_{n+1} ⊂ F_{n+1} etc.
    bool inclusion = true;
    bool disjoint = true;
    bool measure = true;
    std::string detail;
};

struct ValidationReport {
    int depth = 0;
    bool ok = true;
    std::vector<StageCheck> stages;
    std::vector<Rational> max_kappa;
    Rational partial_product = 1;
    Verdict max_kappa_product;
    std::string failure;
    int failure_stage = -1;
};

ValidationReport validate_params(const CFParams& T, int depth, const Rational& threshold = default_threshold());

struct MinimalDomainReport {
    bool holds = false;
    int m = -1;  // least m with g F_n C_{n+1}···C_m ⊂ F_m
    int checked_to = 0;
    std::vector<size_t> frontier;  // |{s ∈ F_nC_{n+1}···C_m : g s ∉ F_m}| per m
};
MinimalDomainReport check_minimal_domain(const CFParams& T, const Element& g, int n, int depth);

struct MeasureDomainReport {
    std::vector<Rational> values;                 // κ_1*…*κ_m(g^-1 F_m), m = 1..depth
    std::vector<Rational> deficits;               // 1 - values
    std::vector<std::vector<Rational>> ii_values; // [n][m-n-1] = ν_m(F_nC_{n+1}···C_m ∩ g^-1 F_m)
    std::vector<Rational> ii_limits;              // ν_n(F_n)
    bool ii_iii_agree = true;
    Verdict verdict;
};
MeasureDomainReport check_measure_domain(const CFParams& T, const Element& g, int depth,
                                         const Rational& threshold = default_threshold(), int ii_max_n = 3);

// ---------------------------------------------------------------- points and the action

struct CFPoint {
    int n = 0;
    Element f;
    std::vector<Element> tail;  // c_{n+1}, …, c_{n+D}
    int horizon() const { return n + static_cast<int>(tail.size()); }
    friend bool operator==(const CFPoint& a, const CFPoint& b) { return a.n == b.n && a.f == b.f && a.tail == b.tail; }
};

void validate_point(const CFParams& T, const CFPoint& x);
CFPoint rebase(const CFParams& T, const CFPoint& x, int m);
// Same point of X (compared on the common horizon after re-basing to a common stage).
bool same_point(const CFParams& T, const CFPoint& x, const CFPoint& y);
std::optional<CFPoint> act(const CFParams& T, const Element& g, const CFPoint& x);
Rational rn_cocycle(const CFParams& T, const CFPoint& x, const CFPoint& y);
std::optional<Rational> rn_derivative(const CFParams& T, const Element& g, const CFPoint& x);
Rational cylinder_measure(const CFParams& T, const Element& f, int n);
Rational folner_defect(const CFParams& T, const Element& g, int n);

struct HaarTotals {
    std::vector<Rational> factors;           // |F_{n+1}| / (|F_n||C_{n+1}|), n = 0..N-1
    std::vector<Rational> partial_products;  // running products
    std::vector<Rational> nu_totals;         // ν_n(F_n), n = 0..N
    bool uniform_kappa = true;
};
HaarTotals haar_totals(const CFParams& T, int N);

// ---------------------------------------------------------------- transforms

// l = (0 = l_0 < l_1 < … < l_K).
CFParams telescope(const CFParams& T, const std::vector<int>& l);
std::optional<CFPoint> iota(const CFParams& T, const std::vector<int>& l, const CFPoint& x);
std::vector<int> compose_l(const std::vector<int>& l, const std::vector<int>& m);  // (l_{m_n})

using SubsetRule = std::function<std::optional<std::vector<Element>>(int n)>;  // nullopt: A_n = C_n

struct Reduction {
    CFParams params;
    Rational scaling = 1;  // Π_{m<=depth} κ_m(A_m)
    int depth = 0;
    Verdict summability;   // on the terms 1 - κ_n(A_n)
};
Reduction reduce(const CFParams& T, const SubsetRule& A, int depth, const Rational& bound = Rational(1),
                 const Rational& threshold = default_threshold());

}  // namespace cf
