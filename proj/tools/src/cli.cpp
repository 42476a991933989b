#include "cfforge/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "cfforge/json_io.hpp"

namespace cf {

namespace {

using io::json;

struct Opts {
    std::string example;
    std::string params;  // file path or inline JSON
    std::string chain;   // catalog name, file path or inline JSON
    int depth = -1;
    int N = -1;
    int n = 0;
    std::string threshold;
    uint64_t seed = 1;
    std::string json_path;
    std::string svg_path;
    std::string element;
    std::string point;
    std::string point2;
    std::string subgroup;
    std::vector<std::string> subgroups;
    std::string l;
    std::string eps = "1/4";
    int l_max = 8;
    int m_max = 8;
    int keep = 1;
    int stages = 1;
    int samples = 1;
    int max_offset = -1;
    std::string name;
    std::string config;
};

json slurp_json(const std::string& arg, const char* what) {
    std::string text = arg;
    if (arg.empty() || (arg.front() != '{' && arg.front() != '[')) {
        std::ifstream in(arg);
        if (!in) fail(ErrorKind::Usage, std::string("cannot read ") + what + " '" + arg + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Usage, std::string("malformed ") + what + " JSON: " + e.what());
    }
}

Rational threshold_of(const Opts& o) { return o.threshold.empty() ? default_threshold() : parse_rational(o.threshold); }

CFParams params_of(const Opts& o) {
    if (!o.params.empty()) return io::params_in(slurp_json(o.params, "params"));
    if (o.example.empty()) fail(ErrorKind::Usage, "need --example or --params");
    const auto& e = catalog_entry(o.example);
    if (e.kind != "params" && e.name != "z-product-odometer")
        fail(ErrorKind::Usage, "example '" + o.example + "' has no (C,F)-parameters");
    return catalog_params(o.example);
}

OdometerSpec chain_of_opts(const Opts& o) {
    if (o.chain.empty()) fail(ErrorKind::Usage, "need --chain");
    const char c = o.chain.front();
    if (c == '{' || o.chain.find(".json") != std::string::npos) return io::chain_in(slurp_json(o.chain, "chain"));
    return catalog_chain(o.chain);
}

int depth_or(const Opts& o, int d) { return o.depth >= 0 ? o.depth : d; }

int default_depth(const Opts& o, int fallback) {
    if (o.depth >= 0) return o.depth;
    if (!o.example.empty()) return catalog_entry(o.example).default_depth;
    return fallback;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> v;
    std::string t = s;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::stringstream ss(t);
    std::string p;
    while (ss >> p) {
        try {
            v.push_back(std::stoi(p));
        } catch (const std::exception&) {
            fail(ErrorKind::Usage, "malformed integer list '" + s + "'");
        }
    }
    return v;
}

// Point (n; f, c_{n+1}, …, c_{n+D}) with f ∈ F_n and c_k ∈ C_k drawn from the seeded generator.
CFPoint sample_point(const CFParams& T, int n, int D, std::mt19937_64& rng) {
    CFPoint x;
    x.n = n;
    const auto F = T.F(n).elements(size_t(1) << 22);
    x.f = F[rng() % F.size()];
    for (int k = n + 1; k <= n + D; ++k) {
        const auto& C = T.C(k);
        x.tail.push_back(C[rng() % C.size()]);
    }
    return x;
}

CFPoint point_arg(const CFParams& T, const std::string& spec, int D, std::mt19937_64& rng) {
    if (spec.empty()) return sample_point(T, 0, D, rng);
    CFPoint x = io::point_in(T.group(), slurp_json(spec, "point"));
    validate_point(T, x);
    return x;
}

Element element_arg(const GroupCtx& g, const std::string& s) { return s.empty() ? g.identity() : io::parse_element(g, s); }

json params_summary(const CFParams& T, int stages) {
    json st = json::array();
    for (int k = 1; k <= std::min(stages, T.c_cap()); ++k) {
        json s{{"n", k}, {"C_size", T.C(k).size()}, {"kappa_max", io::rat(T.kappa(k).max_atom())}};
        if (T.C(k).size() <= 64) s["C"] = io::elems(T.group(), T.C(k));
        if (k <= T.f_cap()) {
            s["F_size"] = T.F(k).size().get_str();
            s["nu_total"] = io::rat(T.nu_total(k));
        }
        st.push_back(s);
    }
    return {{"name", T.name()}, {"group", io::group_out(T.group())}, {"c_cap", T.c_cap()}, {"f_cap", T.f_cap()}, {"stages", st}};
}

json chain_summary(const OdometerSpec& spec, int N) {
    json lv = json::array();
    for (int n = 1; n <= std::min(N, spec.depth_cap()); ++n)
        lv.push_back({{"n", n}, {"gamma", spec.gamma(n).describe()}, {"index", spec.gamma(n).index()}});
    return {{"name", spec.name()}, {"group", io::group_out(spec.group())}, {"depth_cap", spec.depth_cap()}, {"levels", lv}};
}

json chain_json(const CosetChain& y) { return y.idx; }

json s3_json(const S3Scenario& s) {
    json Y = json::array();
    for (auto [a, b] : s.Y) Y.push_back({a, b});
    return {{"group", io::group_out(s.group)},
            {"gamma", s.gamma.describe()},
            {"Y", Y},
            {"Y_size", s.Y.size()},
            {"transitive", s.transitive},
            {"free_action", s.free_action},
            {"partitions_distinct", s.partitions_distinct},
            {"projections_equivariant", s.projections_equivariant}};
}

json tree_json(const TreeScenario& t) {
    return {{"group", io::group_out(t.group)},
            {"R", t.R.str()},
            {"R_nontrivial", t.R_nontrivial},
            {"R_fixes_zero", t.R_fixes_zero},
            {"stabilizer_order", t.stabilizer_order}};
}

// Result of a verb: the report body plus the exit code it implies.
struct Outcome {
    json body;
    int code = 0;
};

using Handler = std::function<Outcome(const Opts&)>;

// ---------------------------------------------------------------- verbs

Outcome do_validate(const Opts& o) {
    if (!o.example.empty() && o.params.empty()) {
        const auto& e = catalog_entry(o.example);
        if (e.kind == "scenario") {
            if (e.name == "s3-two-factors") {
                const auto s = s3_two_factors();
                const bool ok = s.Y.size() == 6 && s.transitive && s.free_action && s.partitions_distinct;
                return {{{"scenario", s3_json(s)}, {"ok", ok}}, ok ? 0 : 2};
            }
            const auto t = tree_nonfree(depth_or(o, e.default_depth));
            const bool ok = t.R_nontrivial && t.R_fixes_zero;
            return {{{"scenario", tree_json(t)}, {"ok", ok}}, ok ? 0 : 2};
        }
        if (e.kind == "chain" && e.name != "z-product-odometer") {
            Opts c = o;
            c.chain = e.name;
            c.depth = default_depth(o, e.default_depth);
            const auto r = validate_chain(catalog_chain(e.name), c.depth);
            json lv = json::array();
            for (const auto& L : r.levels)
                lv.push_back({{"n", L.n}, {"nested", L.nested}, {"strict", L.strict}, {"index", L.index}});
            return {{{"chain", {{"depth", r.depth}, {"ok", r.ok}, {"levels", lv}, {"faithful_window", r.faithful_window}}}},
                    r.ok ? 0 : 2};
        }
    }
    const CFParams T = params_of(o);
    const auto r = validate_params(T, default_depth(o, 8), threshold_of(o));
    return {{{"validation", io::validation(r)}}, r.ok ? 0 : 2};
}

Outcome do_measure(const Opts& o) {
    const CFParams T = params_of(o);
    const GroupCtx& g = T.group();
    const int depth = default_depth(o, 6);
    json body;
    json cyl = json::array();
    const Element f = element_arg(g, o.element);
    for (int n = 0; n <= std::min(depth, T.f_cap()); ++n) {
        if (!T.F(n).contains(f)) continue;
        cyl.push_back({{"n", n}, {"f", io::elem(g, f)}, {"cylinder", io::rat(cylinder_measure(T, f, n))}, {"nu_total", io::rat(T.nu_total(n))}});
    }
    body["cylinders"] = cyl;
    if (!o.point.empty() || !o.subgroup.empty() || !o.element.empty()) {
        const auto md = check_measure_domain(T, f, depth, threshold_of(o));
        body["measure_domain"] = {{"values", io::rats(md.values)},
                                  {"deficits", io::rats(md.deficits)},
                                  {"ii_limits", io::rats(md.ii_limits)},
                                  {"ii_iii_agree", md.ii_iii_agree},
                                  {"verdict", io::verdict(md.verdict)}};
        const auto mn = check_minimal_domain(T, f, o.n, depth);
        json fr = json::array();
        for (size_t x : mn.frontier) fr.push_back(x);
        body["minimal_domain"] = {{"n", o.n}, {"holds", mn.holds}, {"m", mn.m}, {"checked_to", mn.checked_to}, {"frontier", fr}};
    }
    return {body, 0};
}

Outcome do_act(const Opts& o) {
    const CFParams T = params_of(o);
    std::mt19937_64 rng(o.seed);
    const CFPoint x = point_arg(T, o.point, depth_or(o, 8), rng);
    const Element g = element_arg(T.group(), o.element);
    const auto y = act(T, g, x);
    json body{{"g", io::elem(T.group(), g)}, {"x", io::point(T.group(), x)}};
    body["gx"] = y ? io::point(T.group(), *y) : json(nullptr);
    const auto d = rn_derivative(T, g, x);
    body["rn_derivative"] = d ? io::rat(*d) : json(nullptr);
    return {body, 0};
}

Outcome do_rn(const Opts& o) {
    const CFParams T = params_of(o);
    std::mt19937_64 rng(o.seed);
    const CFPoint x = point_arg(T, o.point, depth_or(o, 8), rng);
    json body{{"x", io::point(T.group(), x)}};
    if (!o.point2.empty()) {
        const CFPoint y = point_arg(T, o.point2, 0, rng);
        body["y"] = io::point(T.group(), y);
        body["rn_cocycle"] = io::rat(rn_cocycle(T, x, y));
    } else {
        const Element g = element_arg(T.group(), o.element);
        body["g"] = io::elem(T.group(), g);
        const auto d = rn_derivative(T, g, x);
        body["rn_derivative"] = d ? io::rat(*d) : json(nullptr);
    }
    return {body, 0};
}

Outcome do_telescope(const Opts& o) {
    const CFParams T = params_of(o);
    const auto l = parse_ints(o.l.empty() ? "0,2,4,6" : o.l);
    const CFParams S = telescope(T, l);
    json body{{"l", l}, {"telescoped", params_summary(S, std::min<int>(l.size() - 1, 4))}};
    const int vd = std::min<int>(depth_or(o, static_cast<int>(l.size()) - 1), S.c_cap());
    if (vd >= 1) {
        const auto r = validate_params(S, vd, threshold_of(o));
        body["validation"] = io::validation(r);
    }
    std::mt19937_64 rng(o.seed);
    const CFPoint x = point_arg(T, o.point, l.back() + 2, rng);
    const auto ix = iota(T, l, x);
    body["x"] = io::point(T.group(), x);
    body["iota_x"] = ix ? io::point(T.group(), *ix) : json(nullptr);
    return {body, 0};
}

Outcome do_reduce(const Opts& o) {
    const CFParams T = params_of(o);
    const int depth = default_depth(o, 8);
    const int keep = std::max(1, o.keep), stages = o.stages;
    const GroupCtx g = T.group();
    // A_n: 1_G and the next keep-1 elements of C_n for n <= stages; C_n afterwards.
    SubsetRule A = [T, g, keep, stages](int n) -> std::optional<std::vector<Element>> {
        if (n > stages) return std::nullopt;
        std::vector<Element> a{g.identity()};
        for (const auto& c : T.C(n))
            if (static_cast<int>(a.size()) < keep && !g.is_identity(c)) a.push_back(c);
        return a;
    };
    const auto r = reduce(T, A, depth, Rational(10), threshold_of(o));
    json body{{"depth", r.depth}, {"keep", keep}, {"stages", stages}, {"scaling", io::rat(r.scaling)},
              {"summability", io::verdict(r.summability)}, {"reduced", params_summary(r.params, std::min(depth, 4))}};
    const auto v = validate_params(r.params, std::min(depth, r.params.c_cap()), threshold_of(o));
    body["validation"] = io::validation(v);
    return {body, v.ok ? 0 : 2};
}

Outcome do_folner(const Opts& o) {
    const CFParams T = params_of(o);
    const int depth = default_depth(o, 6);
    std::vector<Element> gs;
    if (o.element.empty()) gs = T.group().generators();
    else gs.push_back(io::parse_element(T.group(), o.element));
    json rows = json::array();
    for (const auto& g : gs) {
        std::vector<Rational> d;
        for (int n = 0; n <= std::min(depth, T.f_cap()); ++n) d.push_back(folner_defect(T, g, n));
        rows.push_back({{"g", io::elem(T.group(), g)}, {"defects", io::rats(d)}});
    }
    return {{{"folner", rows}}, 0};
}

Outcome do_haar(const Opts& o) {
    const CFParams T = params_of(o);
    const auto h = haar_totals(T, default_depth(o, 6));
    return {{{"factors", io::rats(h.factors)},
             {"partial_products", io::rats(h.partial_products)},
             {"nu_totals", io::rats(h.nu_totals)},
             {"uniform_kappa", h.uniform_kappa}},
            0};
}

Subgroup subgroup_arg(const GroupCtx& g, const std::string& s) {
    if (s.empty()) fail(ErrorKind::Usage, "need --subgroup");
    return io::parse_subgroup(g, s);
}

Outcome do_factor_sum(const Opts& o) {
    const CFParams T = params_of(o);
    const Subgroup G = subgroup_arg(T.group(), o.subgroup);
    const Element g = element_arg(T.group(), o.element);
    const auto v = coset_compatibility(T, g, G, depth_or(o, 10), threshold_of(o));
    return {{{"subgroup", G.describe()}, {"g", io::elem(T.group(), g)}, {"verdict", io::verdict(v)}}, 0};
}

ScanOptions scan_opts(const Opts& o) {
    ScanOptions s;
    s.max_depth = depth_or(o, 10);
    s.max_offset = o.max_offset;
    return s;
}

Outcome do_factor_scan(const Opts& o) {
    const CFParams T = params_of(o);
    const Subgroup G = subgroup_arg(T.group(), o.subgroup);
    return {{{"subgroup", G.describe()}, {"report", io::factor_report(finite_factor_scan(T, G, scan_opts(o)))}}, 0};
}

Outcome do_total_ergodicity(const Opts& o) {
    const CFParams T = params_of(o);
    std::vector<std::string> specs = o.subgroups;
    if (specs.empty()) {
        if (T.group().kind() != GroupKind::IntLattice || T.group().dim() != 1)
            fail(ErrorKind::Usage, "need --subgroups for non-integer groups");
        specs = {"mod:2", "mod:3", "mod:5", "mod:7"};
    }
    std::vector<Subgroup> subs;
    for (const auto& s : specs) subs.push_back(io::parse_subgroup(T.group(), s));
    const auto r = total_ergodicity_scan(T, subs, scan_opts(o));
    json scans = json::array();
    for (const auto& s : r.scans) scans.push_back(io::factor_report(s));
    return {{{"scans", scans}, {"totally_ergodic_relative", r.totally_ergodic_relative}}, 0};
}

Outcome do_stack(const Opts& o) {
    const CFParams T = params_of(o);
    const int N = o.N >= 0 ? o.N : depth_or(o, 4);
    const auto L = columns(T, N);
    json cols = json::array();
    for (const auto& c : L) cols.push_back(io::layout(c));
    json sp = json::array();
    for (int n = 0; n + 1 <= N; ++n) {
        json m = json::object();
        for (auto [c, s] : spacers(T, n)) m[std::to_string(c)] = s;
        sp.push_back({{"n", n}, {"spacers", m}});
    }
    if (!o.svg_path.empty()) {
        std::ofstream out(o.svg_path);
        if (!out) fail(ErrorKind::Usage, "cannot write '" + o.svg_path + "'");
        out << columns_svg(L);
    }
    return {{{"columns", cols}, {"spacers", sp}}, 0};
}

json example_show(const std::string& name, int depth) {
    const auto& e = catalog_entry(name);
    json j{{"name", e.name}, {"kind", e.kind}, {"description", e.description}, {"default_depth", e.default_depth}};
    const int d = depth >= 0 ? depth : e.default_depth;
    if (e.kind == "params") {
        const CFParams T = catalog_params(name);
        j["params"] = params_summary(T, std::min(d, 3));
        if (name == "fgsw" || name == "fgsw-split") {
            json h = json::array();
            for (int n = 0; n <= d; ++n) h.push_back(fgsw_h(n));
            j["h"] = h;
        } else if (name == "heisenberg-rank-one") {
            json h = json::array();
            for (int n = 0; n <= d; ++n) h.push_back(heis_h(n));
            j["h"] = h;
        }
    } else if (e.kind == "chain") {
        j["chain"] = chain_summary(catalog_chain(name), d);
        if (name == "z-product-odometer") j["params"] = params_summary(catalog_params(name), std::min(d, 3));
    } else if (name == "s3-two-factors") {
        j["scenario"] = s3_json(s3_two_factors());
    } else {
        j["scenario"] = tree_json(tree_nonfree(d));
    }
    return j;
}

// ---------------------------------------------------------------- odometer verbs

json chain_report(const ChainReport& r) {
    json lv = json::array();
    for (const auto& L : r.levels) {
        json x{{"n", L.n}, {"nested", L.nested}, {"strict", L.strict}, {"index", L.index}};
        if (L.witness) x["witness"] = L.witness->str();
        lv.push_back(x);
    }
    json j{{"depth", r.depth}, {"ok", r.ok}, {"levels", lv}, {"faithful_window", r.faithful_window}};
    if (r.unfaithful_witness) j["unfaithful_witness"] = r.unfaithful_witness->str();
    return j;
}

Outcome odo_validate(const Opts& o) {
    const auto spec = chain_of_opts(o);
    const auto r = validate_chain(spec, depth_or(o, std::min(4, spec.depth_cap())));
    return {{{"chain", chain_summary(spec, r.depth)}, {"report", chain_report(r)}}, r.ok ? 0 : 2};
}

Outcome odo_act(const Opts& o) {
    const auto spec = chain_of_opts(o);
    const int N = o.N >= 0 ? o.N : depth_or(o, 4);
    const GroupCtx& G = spec.group();
    const Element g = element_arg(G, o.element);
    const Element y0 = o.point.empty() ? G.identity() : io::parse_element(G, o.point);
    const auto y = chain_of(spec, y0, N);
    const auto gy = odometer_act(spec, g, y);
    return {{{"g", g.str()}, {"y_element", y0.str()}, {"y", chain_json(y)}, {"gy", chain_json(gy)},
             {"gy_equals_chain_of_gy0", gy == chain_of(spec, G.mul(g, y0), N)}},
            0};
}

Outcome odo_cross_sections(const Opts& o) {
    const auto spec = chain_of_opts(o);
    const int N = o.N >= 0 ? o.N : depth_or(o, 4);
    const auto cs = cross_sections(spec, N);
    json D = json::array();
    for (const auto& d : cs.D) D.push_back(io::elems(spec.group(), d));
    return {{{"D", D}, {"omega_bijective", cs.omega_bijective}, {"square_commutes", cs.square_commutes}}, 0};
}

Outcome odo_build_rank_one(const Opts& o) {
    const auto spec = chain_of_opts(o);
    const int N = o.N >= 0 ? o.N : depth_or(o, 4);
    const auto cs = cross_sections(spec, N);
    std::vector<FinMeasure> kappas;
    for (const auto& d : cs.D) kappas.push_back(FinMeasure::uniform(spec.group(), d));
    const CFParams T = rank_one_odometer_params(spec, kappas);
    const auto r = validate_params(T, N, threshold_of(o));
    return {{{"params", params_summary(T, N)}, {"validation", io::validation(r)}}, r.ok ? 0 : 2};
}

Outcome odo_normal_cover(const Opts& o) {
    const auto spec = chain_of_opts(o);
    const int N = o.N >= 0 ? o.N : depth_or(o, 4);
    const auto nc = normal_cover(spec, N);
    json lv = json::array();
    for (size_t i = 0; i < nc.levels.size(); ++i) {
        const auto& L = nc.levels[i];
        lv.push_back({{"n", L.n}, {"core", nc.cores[i].describe()}, {"index_gamma", L.index_gamma}, {"index_core", L.index_core},
                      {"ratio", L.ratio}, {"next_inside_core", L.next_inside_core}, {"h_image", L.h_image}});
    }
    return {{{"N", nc.N}, {"levels", lv}, {"levelwise_injective", nc.levelwise_injective}, {"limit_injective", nc.limit_injective}}, 0};
}

Outcome odo_cover(const Opts& o) {
    const auto spec = chain_of_opts(o);
    const int N = o.N >= 0 ? o.N : depth_or(o, 3);
    const auto rc = rank_one_cover(spec, N);
    const auto r = validate_params(rc.params, N, threshold_of(o));
    json D = json::array();
    for (const auto& d : rc.D) D.push_back(io::elems(spec.group(), d));
    const bool ok = r.ok && std::all_of(rc.tau_bijective.begin(), rc.tau_bijective.end(), [](bool b) { return b; }) &&
                    std::all_of(rc.tau_uniform.begin(), rc.tau_uniform.end(), [](bool b) { return b; });
    return {{{"N", rc.N},
             {"D", D},
             {"C", params_summary(rc.params, N)},
             {"tau_bijective", rc.tau_bijective},
             {"tau_uniform", rc.tau_uniform},
             {"validation", io::validation(r)},
             {"ok", ok}},
            ok ? 0 : 2};
}

Outcome odo_compat(const Opts& o) {
    const CFParams T = params_of(o);
    const auto spec = chain_of_opts(o);
    const auto l = o.l.empty() ? std::vector<int>{} : parse_ints(o.l);
    const auto v = odometer_compatibility(T, spec, identity_chain(spec.group()), depth_or(o, 8), l, threshold_of(o));
    return {{{"chain", spec.name()}, {"y", "identity"}, {"l", l}, {"verdict", io::verdict(v)}}, 0};
}

Outcome odo_factor_map(const Opts& o) {
    const CFParams T = params_of(o);
    const auto spec = chain_of_opts(o);
    const int levels = o.N >= 0 ? o.N : 3;
    std::mt19937_64 rng(o.seed);
    json rows = json::array();
    for (int s = 0; s < std::max(1, o.samples); ++s) {
        const CFPoint x = point_arg(T, s == 0 ? o.point : std::string(), depth_or(o, 10), rng);
        const auto y = odometer_factor_map(T, spec, identity_chain(spec.group()), x, levels);
        rows.push_back({{"x", io::point(T.group(), x)}, {"chain", y ? chain_json(*y) : json(nullptr)}});
    }
    return {{{"levels", levels}, {"points", rows}}, 0};
}

Outcome odo_iso_check(const Opts& o) {
    const CFParams T = params_of(o);
    const auto spec = chain_of_opts(o);
    const auto r = isomorphism_check(T, spec, identity_chain(spec.group()), o.n, parse_rational(o.eps), o.l_max, o.m_max);
    json pr = json::array();
    for (const auto& p : r.probes) pr.push_back({{"l", p.l}, {"m", p.m}, {"value", io::rat(p.value)}, {"d_size", p.d_size}});
    return {{{"passes", r.passes},
             {"inconclusive", r.inconclusive},
             {"best_l", r.best_l},
             {"probes", pr},
             {"envelope", io::rats(r.envelope)},
             {"envelope_min", io::rat(r.envelope_min)}},
            0};
}

// ---------------------------------------------------------------- dispatch

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Usage:
        case ErrorKind::Type: return 1;
        case ErrorKind::Validation:
        case ErrorKind::Precondition: return 2;
        case ErrorKind::Resource: return 3;
    }
    return 1;
}

int emit(const Opts& o, const std::string& command, const Outcome& r, std::ostream& out) {
    json report{{"schema", io::kSchema}, {"command", command}, {"result", r.body}, {"exit_code", r.code}};
    if (!o.example.empty()) report["example"] = o.example;
    if (!o.json_path.empty()) {
        std::ofstream f(o.json_path);
        if (!f) fail(ErrorKind::Usage, "cannot write '" + o.json_path + "'");
        f << report.dump(2) << "\n";
        out << command << ": wrote " << o.json_path << " (exit " << r.code << ")\n";
    } else {
        out << report.dump(2) << "\n";
    }
    return r.code;
}

// Translates a config object into argv: {"command": "odometer validate", "chain": "…", "depth": 4, …}.
std::vector<std::string> config_argv(const json& cfg) {
    if (!cfg.is_object() || !cfg.contains("command") || !cfg["command"].is_string())
        fail(ErrorKind::Usage, "config must be an object with a string 'command'");
    std::vector<std::string> argv;
    std::stringstream ss(cfg["command"].get<std::string>());
    std::string w;
    while (ss >> w) argv.push_back(w);
    if (!argv.empty() && argv[0] == "run") fail(ErrorKind::Usage, "config cannot nest 'run'");
    for (const auto& [k, v] : cfg.items()) {
        if (k == "command" || k == "schema") continue;
        const std::string flag = (k.size() == 1 ? "-" : "--") + k;
        if (v.is_boolean()) {
            if (v.get<bool>()) argv.push_back(flag);
        } else if (v.is_array() && k == "subgroups") {
            for (const auto& s : v) {
                argv.push_back(flag);
                argv.push_back(s.is_string() ? s.get<std::string>() : s.dump());
            }
        } else {
            argv.push_back(flag);
            argv.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
    }
    return argv;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Opts o;
    CLI::App app{"cf: exact (C,F)-actions, odometers and factor criteria", "cf"};
    app.require_subcommand(1);

    std::string command;
    Handler handler;

    auto params_flags = [&](CLI::App* s) {
        s->add_option("--example,-e", o.example, "Catalog entry name");
        s->add_option("--params,-p", o.params, "Params spec: JSON file or inline JSON");
    };
    auto common = [&](CLI::App* s) {
        s->add_option("--depth,-d", o.depth, "Depth");
        s->add_option("--threshold", o.threshold, "Verdict threshold as p/q");
        s->add_option("--seed", o.seed, "Sampling seed");
        s->add_option("--json", o.json_path, "Write the JSON report to PATH");
    };
    auto verb = [&](CLI::App* parent, const std::string& name, const std::string& desc, Handler h, bool params = true) {
        CLI::App* s = parent->add_subcommand(name, desc);
        if (params) params_flags(s);
        common(s);
        const std::string full = parent == &app ? name : parent->get_name() + " " + name;
        s->callback([&command, &handler, full, h]() {
            command = full;
            handler = h;
        });
        return s;
    };

    verb(&app, "validate", "Check nesting, disjointness and measure conditions", do_validate);
    auto* m = verb(&app, "measure", "Cylinder measures and domain checks", do_measure);
    m->add_option("--element,-g", o.element, "Group element");
    m->add_option("-n", o.n, "Stage for the minimal-domain check");
    auto* a = verb(&app, "act", "Apply g to a point", do_act);
    a->add_option("--element,-g", o.element, "Group element");
    a->add_option("--point", o.point, "Point JSON {n, f, tail}; sampled when omitted");
    auto* r = verb(&app, "rn", "Radon-Nikodym derivative or cocycle", do_rn);
    r->add_option("--element,-g", o.element, "Group element");
    r->add_option("--point", o.point, "Point JSON");
    r->add_option("--point2", o.point2, "Second point JSON (cocycle)");
    auto* t = verb(&app, "telescope", "Telescope along l = (0, l_1, …)", do_telescope);
    t->add_option("--l,-l", o.l, "Comma-separated l");
    t->add_option("--point", o.point, "Point JSON");
    auto* rd = verb(&app, "reduce", "Restrict C_n to subsets A_n", do_reduce);
    rd->add_option("--keep", o.keep, "|A_n| for reduced stages");
    rd->add_option("--stages", o.stages, "Number of reduced stages");
    auto* fo = verb(&app, "folner", "Følner defects of F_n", do_folner);
    fo->add_option("--element,-g", o.element, "Group element (default: each generator)");
    verb(&app, "haar", "Haar normalisation factors", do_haar);
    auto* fs = verb(&app, "factor-sum", "Coset compatibility series", do_factor_sum);
    fs->add_option("--subgroup,-s", o.subgroup, "Subgroup shorthand or JSON");
    fs->add_option("--element,-g", o.element, "Coset representative g");
    auto* fsc = verb(&app, "factor-scan", "Search for a finite factor G/Γ", do_factor_scan);
    fsc->add_option("--subgroup,-s", o.subgroup, "Subgroup shorthand or JSON");
    fsc->add_option("--max-offset", o.max_offset, "Largest schedule offset");
    auto* te = verb(&app, "total-ergodicity", "Factor scans over several subgroups", do_total_ergodicity);
    te->add_option("--subgroups", o.subgroups, "Subgroup shorthands (repeatable)");
    te->add_option("--max-offset", o.max_offset, "Largest schedule offset");
    auto* st = verb(&app, "stack", "Cutting-and-stacking columns (Z only)", do_stack);
    st->add_option("-N", o.N, "Last stage");
    st->add_option("--svg", o.svg_path, "Write an SVG rendering to PATH");

    auto* odo = app.add_subcommand("odometer", "Odometer chains")->require_subcommand(1);
    auto chain_flag = [&](CLI::App* s) {
        s->add_option("--chain,-c", o.chain, "Catalog chain name, chain JSON file or inline JSON");
        s->add_option("-N", o.N, "Levels");
        return s;
    };
    chain_flag(verb(odo, "validate", "Check nesting and strictness", odo_validate, false));
    chain_flag(verb(odo, "act", "Act on the chain of an element", odo_act, false))
        ->add_option("--element,-g", o.element, "Acting element");
    odo->get_subcommand("act")->add_option("--point", o.point, "Element whose chain is acted on");
    chain_flag(verb(odo, "cross-sections", "Cross-sections D_n and ω_n", odo_cross_sections, false));
    chain_flag(verb(odo, "build-rank-one", "Rank-one params from cross-sections", odo_build_rank_one, false));
    chain_flag(verb(odo, "normal-cover", "Normal cores and cover levels", odo_normal_cover, false));
    chain_flag(verb(odo, "cover", "Rank-one cover with τ checks", odo_cover, false));
    auto* oc = chain_flag(verb(odo, "compat", "Odometer compatibility series", odo_compat));
    oc->add_option("--l,-l", o.l, "Telescoping l");
    auto* of = chain_flag(verb(odo, "factor-map", "Odometer factor map on sampled points", odo_factor_map));
    of->add_option("--point", o.point, "Point JSON");
    of->add_option("--samples", o.samples, "Number of points");
    auto* oi = chain_flag(verb(odo, "iso-check", "Isomorphism probe", odo_iso_check));
    oi->add_option("-n", o.n, "Stage n");
    oi->add_option("--eps", o.eps, "ε as p/q");
    oi->add_option("--l-max", o.l_max, "Largest l");
    oi->add_option("--m-max", o.m_max, "Largest m");

    auto* ex = app.add_subcommand("example", "Catalog")->require_subcommand(1);
    auto* exl = ex->add_subcommand("list", "List catalog entries");
    exl->add_option("--json", o.json_path, "Write the JSON report to PATH");
    exl->callback([&]() {
        command = "example list";
        handler = [](const Opts&) {
            json rows = json::array();
            for (const auto& e : catalog())
                rows.push_back({{"name", e.name}, {"kind", e.kind}, {"description", e.description}, {"default_depth", e.default_depth}});
            return Outcome{{{"entries", rows}}, 0};
        };
    });
    auto* exs = ex->add_subcommand("show", "Show one catalog entry");
    exs->add_option("name", o.name, "Entry name")->required();
    exs->add_option("--depth,-d", o.depth, "Depth");
    exs->add_option("--json", o.json_path, "Write the JSON report to PATH");
    exs->callback([&]() {
        command = "example show";
        handler = [](const Opts& q) { return Outcome{example_show(q.name, q.depth), 0}; };
    });

    auto* run = app.add_subcommand("run", "Run a JSON config");
    run->add_option("config", o.config, "Config file")->required();
    run->callback([&]() { command = "run"; });

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (command == "run") {
            const json cfg = slurp_json(o.config, "config");
            return run_cli(config_argv(cfg), out, err);
        }
        return emit(o, command, handler(o), out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        err << "error: malformed JSON: " << e.what() << "\n";
        return 1;
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cf
