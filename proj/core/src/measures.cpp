#include "cfforge/measures.hpp"

#include <unordered_map>

namespace cf {

FinMeasure::FinMeasure(GroupCtx g, std::map<Element, Rational> atoms) : g_(std::move(g)) {
    for (auto& [e, w] : atoms) {
        g_.check(e);
        if (w < 0) fail(ErrorKind::Usage, "negative measure weight at " + e.str());
        w.canonicalize();
        if (w != 0) atoms_.emplace(e, w);
    }
}

FinMeasure FinMeasure::delta(const GroupCtx& g, const Element& e) { return FinMeasure(g, {{e, Rational(1)}}); }

FinMeasure FinMeasure::uniform(const GroupCtx& g, const std::vector<Element>& support) {
    if (support.empty()) fail(ErrorKind::Usage, "uniform measure on an empty set");
    std::map<Element, Rational> a;
    const Rational w(1, static_cast<unsigned long>(support.size()));
    for (const auto& e : support) a[e] = w;
    if (a.size() != support.size()) fail(ErrorKind::Usage, "uniform measure support has duplicates");
    return FinMeasure(g, std::move(a));
}

FinMeasure FinMeasure::weighted(const GroupCtx& g, const std::vector<Element>& support, const std::vector<Rational>& w) {
    if (support.size() != w.size()) fail(ErrorKind::Usage, "support and weight lengths differ");
    FinMeasure m(g);
    for (size_t i = 0; i < w.size(); ++i) {
        g.check(support[i]);
        if (w[i] < 0) fail(ErrorKind::Usage, "negative measure weight");
        m.add(support[i], w[i]);
    }
    return m;
}

Rational FinMeasure::at(const Element& e) const {
    auto it = atoms_.find(e);
    return it == atoms_.end() ? Rational(0) : it->second;
}

std::vector<Element> FinMeasure::support() const {
    std::vector<Element> s;
    s.reserve(atoms_.size());
    for (const auto& [e, w] : atoms_) s.push_back(e);
    return s;
}

Rational FinMeasure::total() const {
    Rational t = 0;
    for (const auto& [e, w] : atoms_) t += w;
    return t;
}

Rational FinMeasure::max_atom() const {
    Rational t = 0;
    for (const auto& [e, w] : atoms_)
        if (w > t) t = w;
    return t;
}

void FinMeasure::add(const Element& e, const Rational& w_in) {
    Rational w = w_in;
    w.canonicalize();
    if (w == 0) return;
    auto [it, fresh] = atoms_.emplace(e, w);
    if (!fresh) {
        it->second += w;
        if (it->second == 0) atoms_.erase(it);
    }
}

FinMeasure convolve(const FinMeasure& a, const FinMeasure& b) {
    if (!a.group().same(b.group())) fail(ErrorKind::Type, "convolution of measures on different groups");
    const GroupCtx& g = a.group();
    std::unordered_map<Element, Rational, ElementHash> acc;
    acc.reserve(a.size() * b.size() * 2);
    for (const auto& [x, wx] : a.atoms())
        for (const auto& [y, wy] : b.atoms()) acc[g.mul(x, y)] += wx * wy;
    std::map<Element, Rational> out(acc.begin(), acc.end());
    return FinMeasure(g, std::move(out));
}

FinMeasure convolve_all(const std::vector<const FinMeasure*>& ms) {
    if (ms.empty()) fail(ErrorKind::Usage, "convolution of an empty list");
    FinMeasure r = *ms[0];
    for (size_t i = 1; i < ms.size(); ++i) r = convolve(r, *ms[i]);
    return r;
}

Rational mass(const FinMeasure& m, const std::function<bool(const Element&)>& pred) {
    Rational t = 0;
    for (const auto& [e, w] : m.atoms())
        if (pred(e)) t += w;
    return t;
}

FinMeasure normalize(const FinMeasure& m) {
    const Rational t = m.total();
    if (t == 0) fail(ErrorKind::Precondition, "cannot normalize the zero measure");
    return scale(m, 1 / t);
}

FinMeasure scale(const FinMeasure& m, const Rational& r) {
    if (r < 0) fail(ErrorKind::Usage, "negative scale factor");
    std::map<Element, Rational> out;
    for (const auto& [e, w] : m.atoms()) out.emplace(e, w * r);
    return FinMeasure(m.group(), std::move(out));
}

FinMeasure restrict_to(const FinMeasure& m, const std::function<bool(const Element&)>& pred) {
    std::map<Element, Rational> out;
    for (const auto& [e, w] : m.atoms())
        if (pred(e)) out.emplace(e, w);
    return FinMeasure(m.group(), std::move(out));
}

FinMeasure map_atoms(const FinMeasure& m, const std::function<Element(const Element&)>& f) {
    FinMeasure out(m.group());
    for (const auto& [e, w] : m.atoms()) out.add(f(e), w);
    return out;
}

}  // namespace cf
