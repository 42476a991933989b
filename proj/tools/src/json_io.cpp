#include "cfforge/json_io.hpp"

#include <algorithm>
#include <sstream>

namespace cf::io {

namespace {

[[noreturn]] void bad(const std::string& msg) { fail(ErrorKind::Usage, msg); }

const json& need(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
    return j.at(key);
}

int64_t as_int(const json& j, const char* what) {
    if (!j.is_number_integer()) bad(std::string(what) + " must be an integer");
    return j.get<int64_t>();
}

std::vector<int64_t> as_ints(const json& j, const char* what) {
    if (!j.is_array()) bad(std::string(what) + " must be an integer array");
    std::vector<int64_t> v;
    for (const auto& x : j) v.push_back(as_int(x, what));
    return v;
}

}  // namespace

json rat(const Rational& q) {
    Rational c = q;
    c.canonicalize();
    return c.get_str();
}

Rational rat_in(const json& j) {
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (!j.is_string()) bad("rational must be a \"p/q\" string or an integer");
    return parse_rational(j.get<std::string>());
}

std::vector<json> rats(const std::vector<Rational>& v) {
    std::vector<json> out;
    for (const auto& q : v) out.push_back(rat(q));
    return out;
}

json elem(const GroupCtx&, const Element& e) {
    if (e.size() == 1) return e[0];
    json a = json::array();
    for (int i = 0; i < e.size(); ++i) a.push_back(e[i]);
    return a;
}

Element elem_in(const GroupCtx& g, const json& j) {
    Element e;
    if (j.is_number_integer())
        e = Element{j.get<int64_t>()};
    else if (j.is_array())
        e = Element::of(as_ints(j, "element"));
    else
        bad("element must be an integer or an integer array");
    g.check(e);
    return e;
}

json elems(const GroupCtx& g, const std::vector<Element>& v, size_t limit) {
    json a = json::array();
    for (size_t i = 0; i < v.size() && i < limit; ++i) a.push_back(elem(g, v[i]));
    return a;
}

Element parse_element(const GroupCtx& g, const std::string& s) {
    std::string t;
    for (char c : s)
        if (c != '(' && c != ')' && c != ' ') t += c;
    std::vector<int64_t> v;
    std::stringstream ss(t);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            size_t pos = 0;
            v.push_back(std::stoll(part, &pos));
            if (pos != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            bad("malformed element '" + s + "'");
        }
    }
    if (v.empty()) bad("empty element");
    const Element e = Element::of(v);
    g.check(e);
    return e;
}

std::vector<Element> parse_elements(const GroupCtx& g, const std::string& s) {
    std::vector<Element> out;
    std::string cur;
    auto flush = [&]() {
        if (!cur.empty()) out.push_back(parse_element(g, cur));
        cur.clear();
    };
    for (char c : s) {
        if (c == ' ' || c == ';' || c == '\t') flush();
        else cur += c;
    }
    flush();
    return out;
}

json measure(const FinMeasure& m, size_t limit) {
    json a = json::array();
    size_t i = 0;
    for (const auto& [e, w] : m.atoms()) {
        if (i++ >= limit) break;
        a.push_back(json::array({elem(m.group(), e), rat(w)}));
    }
    return a;
}

FinMeasure measure_in(const GroupCtx& g, const json& j) {
    if (!j.is_array()) bad("measure must be an array of [element, \"p/q\"] pairs");
    FinMeasure m(g);
    for (const auto& a : j) {
        if (!a.is_array() || a.size() != 2) bad("measure atom must be [element, \"p/q\"]");
        const Rational w = rat_in(a[1]);
        if (w < 0) bad("negative measure weight");
        m.add(elem_in(g, a[0]), w);
    }
    return m;
}

json verdict(const Verdict& v) {
    json j;
    j["tag"] = tag_name(v.tag);
    j["depth"] = v.depth;
    if (v.tag == VerdictTag::TermwiseZero) j["zero_beyond"] = v.zero_beyond;
    j["terms"] = rats(v.terms);
    j["partial_sums"] = rats(v.partial_sums);
    if (v.lower_bound) j["lower_bound"] = rat(*v.lower_bound);
    if (!v.note.empty()) j["note"] = v.note;
    return j;
}

json point(const GroupCtx& g, const CFPoint& x) {
    return {{"n", x.n}, {"f", elem(g, x.f)}, {"tail", elems(g, x.tail, x.tail.size())}};
}

CFPoint point_in(const GroupCtx& g, const json& j) {
    CFPoint x;
    x.n = static_cast<int>(as_int(need(j, "n"), "n"));
    x.f = elem_in(g, need(j, "f"));
    if (j.contains("tail")) {
        if (!j["tail"].is_array()) bad("tail must be an array");
        for (const auto& c : j["tail"]) x.tail.push_back(elem_in(g, c));
    }
    return x;
}

GroupCtx group_in(const json& j) {
    const json& spec = j.is_string() ? j : need(j, "group");
    const std::string name = spec.is_string() ? spec.get<std::string>() : "";
    if (name == "integers" || name == "Z") return GroupCtx::integers();
    if (name == "heisenberg" || name == "H3") return GroupCtx::heisenberg();
    if (name == "lattice") return GroupCtx::lattice(static_cast<int>(as_int(need(j, "dim"), "dim")));
    if (name == "tree") return GroupCtx::tree(static_cast<int>(as_int(need(j, "depth"), "depth")));
    if (name == "finite") {
        std::vector<std::vector<int>> table;
        for (const auto& row : need(j, "table")) {
            std::vector<int> r;
            for (int64_t v : as_ints(row, "table row")) r.push_back(static_cast<int>(v));
            table.push_back(r);
        }
        std::vector<int> gens;
        for (int64_t v : as_ints(need(j, "generators"), "generators")) gens.push_back(static_cast<int>(v));
        return GroupCtx::finite_table(j.value("name", std::string("finite")), table, gens);
    }
    bad("unknown group '" + name + "'");
}

json group_out(const GroupCtx& g) {
    switch (g.kind()) {
        case GroupKind::IntLattice:
            return g.dim() == 1 ? json{{"group", "integers"}} : json{{"group", "lattice"}, {"dim", g.dim()}};
        case GroupKind::Heisenberg: return {{"group", "heisenberg"}};
        case GroupKind::TreeDepth: return {{"group", "tree"}, {"depth", g.tree_depth()}};
        case GroupKind::FiniteTable: return {{"group", "finite"}, {"name", g.name()}, {"order", g.order()}};
    }
    return {};
}

Subgroup subgroup_in(const GroupCtx& g, const json& j0) {
    const json& j = j0.contains("subgroup") ? j0["subgroup"] : j0;
    const std::string fam = need(j, "family").get<std::string>();
    if (fam == "whole") return Subgroup::whole(g);
    if (fam == "modulus" || fam == "mod") return Subgroup::modulus(g, as_int(need(j, "m"), "m"));
    if (fam == "heis_congruence")
        return Subgroup::heis_congruence(g, as_int(need(j, "a"), "a"), as_int(need(j, "b"), "b"), as_int(need(j, "c"), "c"));
    if (fam == "lattice_cols") {
        std::vector<std::vector<int64_t>> cols;
        for (const auto& c : need(j, "cols")) cols.push_back(as_ints(c, "column"));
        return Subgroup::lattice_cols(g, cols);
    }
    if (fam == "conjugated") return Subgroup::conjugated(elem_in(g, need(j, "by")), subgroup_in(g, need(j, "base")));
    if (fam == "normal_core") return Subgroup::normal_core(subgroup_in(g, need(j, "base")));
    if (fam == "finite_subset") {
        std::vector<Element> es;
        for (const auto& e : need(j, "elements")) es.push_back(elem_in(g, e));
        return Subgroup::finite_subset(g, es);
    }
    if (fam == "tree_stabilizer") return Subgroup::tree_stabilizer(g, static_cast<int>(as_int(need(j, "level"), "level")));
    bad("unknown subgroup family '" + fam + "'");
}

Subgroup parse_subgroup(const GroupCtx& g, const std::string& s) {
    if (!s.empty() && s.front() == '{') {
        json j;
        try {
            j = json::parse(s);
        } catch (const json::exception& e) {
            bad(std::string("malformed subgroup JSON: ") + e.what());
        }
        return subgroup_in(g, j);
    }
    const auto colon = s.find(':');
    const std::string fam = s.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
    auto ints = [&](const std::string& t) {
        std::vector<int64_t> v;
        std::stringstream ss(t);
        std::string p;
        while (std::getline(ss, p, ',')) {
            try {
                v.push_back(std::stoll(p));
            } catch (const std::exception&) {
                bad("malformed subgroup '" + s + "'");
            }
        }
        return v;
    };
    if (fam == "whole") return Subgroup::whole(g);
    if (fam == "mod") {
        const auto v = ints(arg);
        if (v.size() != 1) bad("mod:M takes one modulus");
        return Subgroup::modulus(g, v[0]);
    }
    if (fam == "heis") {
        const auto v = ints(arg);
        if (v.size() != 3) bad("heis:a,b,c takes three moduli");
        return Subgroup::heis_congruence(g, v[0], v[1], v[2]);
    }
    if (fam == "lattice") {
        std::vector<std::vector<int64_t>> cols;
        std::stringstream ss(arg);
        std::string c;
        while (std::getline(ss, c, ';')) cols.push_back(ints(c));
        return Subgroup::lattice_cols(g, cols);
    }
    if (fam == "stab") {
        const auto v = ints(arg);
        if (v.size() != 1) bad("stab:L takes one level");
        return Subgroup::tree_stabilizer(g, static_cast<int>(v[0]));
    }
    bad("unknown subgroup shorthand '" + s + "'");
}

namespace {

std::vector<std::vector<Element>> element_lists(const GroupCtx& g, const json& j, const char* what) {
    if (!j.is_array()) bad(std::string(what) + " must be an array of element arrays");
    std::vector<std::vector<Element>> out;
    for (const auto& row : j) {
        if (!row.is_array()) bad(std::string(what) + " entries must be element arrays");
        std::vector<Element> r;
        for (const auto& e : row) r.push_back(elem_in(g, e));
        out.push_back(r);
    }
    return out;
}

std::vector<Rational> rational_list(const json& j, const char* what) {
    if (!j.is_array()) bad(std::string(what) + " must be an array");
    std::vector<Rational> v;
    for (const auto& x : j) v.push_back(rat_in(x));
    return v;
}

}  // namespace

CFParams params_in(const json& j) {
    if (j.contains("explicit")) {
        const json& e = j["explicit"];
        const GroupCtx g = group_in(e.contains("group") ? e["group"] : json("integers"));
        auto C = element_lists(g, need(e, "C"), "C");
        auto F = element_lists(g, need(e, "F"), "F");
        std::vector<FinMeasure> kappa;
        if (e.contains("kappa")) {
            for (const auto& k : e["kappa"]) kappa.push_back(measure_in(g, k));
        } else {
            for (const auto& c : C) kappa.push_back(FinMeasure::uniform(g, c));
        }
        const std::string name = e.value("name", std::string("explicit"));
        if (e.contains("nu")) {
            std::vector<FinMeasure> nu;
            for (const auto& m : e["nu"]) nu.push_back(measure_in(g, m));
            return explicit_params(g, name, C, kappa, F, nu);
        }
        std::vector<Rational> spacer{0};
        if (e.contains("spacer_total")) {
            const auto s = rational_list(e["spacer_total"], "spacer_total");
            spacer.insert(spacer.end(), s.begin(), s.end());
        }
        return explicit_params_spacer_fill(g, name, C, kappa, F, spacer);
    }
    const std::string rule = need(j, "rule").get<std::string>();
    const json p = j.value("params", json::object());
    if (rule == "fgsw") return fgsw(static_cast<int>(p.value("cap", 28)));
    if (rule == "fgsw-split" || rule == "fgsw_split") {
        std::vector<Rational> w;
        if (p.contains("p")) w = rational_list(p["p"], "p");
        WeightRule r;
        if (!w.empty()) r = [w](int n) { return w[std::min<size_t>(n - 1, w.size() - 1)]; };
        return fgsw_split(r, static_cast<int>(p.value("cap", 28)));
    }
    if (rule == "heisenberg-rank-one" || rule == "heisenberg_rank_one")
        return heisenberg_rank_one(static_cast<int>(p.value("cap", 14)));
    if (rule == "z-product-odometer" || rule == "z_product_odometer") {
        std::vector<int64_t> a(12, 2);
        if (p.contains("a")) a = as_ints(p["a"], "a");
        std::vector<std::vector<Rational>> w;
        if (p.contains("weights"))
            for (const auto& row : p["weights"]) w.push_back(rational_list(row, "weights"));
        return z_product_params(a, w);
    }
    bad("unknown params rule '" + rule + "'");
}

OdometerSpec chain_in(const json& j) {
    if (j.contains("explicit")) {
        const json& e = j["explicit"];
        const GroupCtx g = group_in(need(e, "group"));
        std::vector<Subgroup> subs;
        for (const auto& s : need(e, "subgroups")) subs.push_back(subgroup_in(g, s));
        if (subs.empty()) bad("explicit chain needs at least one subgroup");
        const int cap = static_cast<int>(subs.size());
        return OdometerSpec(g, e.value("name", std::string("explicit-chain")), [subs](int n) { return subs[n - 1]; }, cap);
    }
    const std::string name = need(j, "chain").get<std::string>();
    if (name == "z-product-odometer" && j.contains("a")) return z_product_odometer(as_ints(j["a"], "a"));
    if (name == "tree-nonfree" && j.contains("depth")) return tree_nonfree(static_cast<int>(as_int(j["depth"], "depth"))).chain;
    return catalog_chain(name);
}

json validation(const ValidationReport& r) {
    json st = json::array();
    for (const auto& s : r.stages) {
        json x{{"n", s.n}, {"inclusion", s.inclusion}, {"disjoint", s.disjoint}, {"measure", s.measure}};
        if (!s.detail.empty()) x["detail"] = s.detail;
        st.push_back(x);
    }
    json j{{"depth", r.depth},
           {"ok", r.ok},
           {"stages", st},
           {"max_kappa", rats(r.max_kappa)},
           {"partial_product", rat(r.partial_product)},
           {"max_kappa_product", verdict(r.max_kappa_product)}};
    if (!r.failure.empty()) {
        j["failure"] = r.failure;
        j["failure_stage"] = r.failure_stage;
    }
    return j;
}

json factor_report(const FactorReport& r) {
    json ev = json::array();
    for (const auto& w : r.evidence) ev.push_back({{"a", w.a}, {"b", w.b}, {"min_mass", rat(w.min_mass)}, {"argmin", w.argmin}});
    json j{{"target", r.target},          {"index", r.index},    {"positive", r.positive},
           {"verdict", verdict(r.verdict)}, {"evidence", ev},      {"evidence_min", rat(r.evidence_min)}};
    if (r.positive) {
        j["coset"] = r.coset;
        j["coset_rep"] = r.coset_rep.str();
        j["telescoping"] = r.telescoping;
        j["window_masses"] = rats(r.window_masses);
    }
    return j;
}

json layout(const ColumnLayout& L) {
    json lv = json::array();
    for (int64_t i = 0; i < L.h; ++i) lv.push_back({{"index", i}, {"lo", rat(L.lo[i])}, {"hi", rat(L.hi[i])}});
    json cp = json::array();
    for (const auto& [a, b] : L.copies) cp.push_back({a, b});
    return {{"stage", L.n}, {"h", L.h}, {"total", rat(L.total)}, {"levels", lv}, {"copies", cp}, {"spacer_levels", L.spacer_levels}};
}

}  // namespace cf::io
