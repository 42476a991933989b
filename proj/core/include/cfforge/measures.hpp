#pragma once

#include <functional>
#include <map>
#include <vector>

#include "cfforge/groups.hpp"

namespace cf {

// Finitely supported measure with exact nonnegative rational weights; zero atoms are dropped.
class FinMeasure {
public:
    FinMeasure() = default;
    explicit FinMeasure(GroupCtx g) : g_(std::move(g)) {}
    FinMeasure(GroupCtx g, std::map<Element, Rational> atoms);

    static FinMeasure delta(const GroupCtx& g, const Element& e);
    static FinMeasure uniform(const GroupCtx& g, const std::vector<Element>& support);
    static FinMeasure weighted(const GroupCtx& g, const std::vector<Element>& support, const std::vector<Rational>& w);

    const GroupCtx& group() const { return g_; }
    const std::map<Element, Rational>& atoms() const { return atoms_; }
    size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }
    Rational at(const Element& e) const;
    std::vector<Element> support() const;
    Rational total() const;
    Rational max_atom() const;

    void add(const Element& e, const Rational& w);  // accumulates; removes if result is 0

    friend bool operator==(const FinMeasure& a, const FinMeasure& b) { return a.atoms_ == b.atoms_; }

private:
    GroupCtx g_;
    std::map<Element, Rational> atoms_;
};

FinMeasure convolve(const FinMeasure& a, const FinMeasure& b);
FinMeasure convolve_all(const std::vector<const FinMeasure*>& ms);
Rational mass(const FinMeasure& m, const std::function<bool(const Element&)>& pred);
FinMeasure normalize(const FinMeasure& m);
FinMeasure scale(const FinMeasure& m, const Rational& r);
FinMeasure restrict_to(const FinMeasure& m, const std::function<bool(const Element&)>& pred);
// Pushforward along an element map (e.g. an automorphism); atoms with equal images merge.
FinMeasure map_atoms(const FinMeasure& m, const std::function<Element(const Element&)>& f);

}  // namespace cf
