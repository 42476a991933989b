#include "cfforge/zstack.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace cf {

namespace {

void require_z(const CFParams& T) {
    const GroupCtx& G = T.group();
    if (G.kind() != GroupKind::IntLattice || G.dim() != 1) fail(ErrorKind::Type, "column geometry needs G = Z");
}

std::vector<int64_t> sorted_c(const CFParams& T, int n) {
    std::vector<int64_t> c;
    for (const auto& e : T.C(n)) c.push_back(e[0]);
    std::sort(c.begin(), c.end());
    return c;
}

}  // namespace

int64_t column_height(const CFParams& T, int n) {
    require_z(T);
    const auto iv = T.F(n).interval();
    if (!iv || iv->first != 0) fail(ErrorKind::Precondition, "F_" + std::to_string(n) + " is not an interval [0, h)");
    return iv->second;
}

std::vector<ColumnLayout> columns(const CFParams& T, int N) {
    require_z(T);
    if (N < 0 || N > T.f_cap() || N > T.c_cap()) fail(ErrorKind::Precondition, "column depth exceeds realizable stages");
    std::vector<ColumnLayout> out;
    ColumnLayout L0;
    L0.n = 0;
    L0.h = column_height(T, 0);
    if (L0.h != 1) fail(ErrorKind::Precondition, "F_0 must be {0}");
    L0.lo = {0};
    L0.hi = {1};
    L0.total = 1;
    out.push_back(L0);
    for (int n = 1; n <= N; ++n) {
        const ColumnLayout& P = out.back();
        ColumnLayout L;
        L.n = n;
        L.h = column_height(T, n);
        if (L.h > (int64_t(1) << 24)) fail(ErrorKind::Resource, "column too tall to lay out");
        L.lo.assign(L.h, Rational(-1));
        L.hi.assign(L.h, Rational(-1));
        const auto C = sorted_c(T, n);
        const FinMeasure& k = T.kappa(n);
        // Each I(i, n-1) is cut left to right in increasing c, proportionally to κ_n.
        Rational before = 0;
        for (int64_t c : C) {
            const Rational kc = k.at(Element{c});
            for (int64_t i = 0; i < P.h; ++i) {
                const Rational len = P.hi[i] - P.lo[i];
                const int64_t j = i + c;
                if (j >= L.h) fail(ErrorKind::Validation, "copy exceeds F_n");
                L.lo[j] = P.lo[i] + before * len;
                L.hi[j] = L.lo[j] + kc * len;
            }
            L.copies.emplace_back(c, c + P.h);
            before += kc;
        }
        // Spacers stack in [ν_{n-1}(F_{n-1}), ν_n(F_n)) in index order.
        Rational top = P.total;
        for (int64_t j = 0; j < L.h; ++j)
            if (L.lo[j] < 0) {
                L.spacer_levels.push_back(j);
                L.lo[j] = top;
                top += T.nu(n, Element{j});
                L.hi[j] = top;
            }
        L.total = top;
        out.push_back(std::move(L));
    }
    return out;
}

std::string columns_svg(const std::vector<ColumnLayout>& layouts) {
    const double col_w = 120, gap = 40, height = 600;
    std::ostringstream os;
    os << std::setprecision(6);
    const double width = gap + layouts.size() * (col_w + gap);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height + 40 << "\">\n";
    for (size_t s = 0; s < layouts.size(); ++s) {
        const auto& L = layouts[s];
        const double x0 = gap + s * (col_w + gap);
        // Fixed per-stage scale: the column's total mass fills the drawing height.
        const double scale = height / L.total.get_d();
        os << "  <g data-stage=\"" << L.n << "\" data-total=\"" << rat_str(L.total) << "\">\n";
        for (int64_t i = 0; i < L.h; ++i) {
            const double y0 = L.lo[i].get_d() * scale, y1 = L.hi[i].get_d() * scale;
            const bool spacer = std::binary_search(L.spacer_levels.begin(), L.spacer_levels.end(), i);
            os << "    <rect x=\"" << x0 << "\" y=\"" << height - y1 + 20 << "\" width=\"" << col_w << "\" height=\""
               << (y1 - y0) << "\" fill=\"" << (spacer ? "#e8a33d" : "#4a7ab5") << "\" stroke=\"#222\" stroke-width=\"0.2\""
               << " data-index=\"" << i << "\" data-lo=\"" << rat_str(L.lo[i]) << "\" data-hi=\"" << rat_str(L.hi[i])
               << "\"/>\n";
        }
        os << "  </g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::map<int64_t, int64_t> spacers(const CFParams& T, int n) {
    const int64_t hn = column_height(T, n), hn1 = column_height(T, n + 1);
    const auto C = sorted_c(T, n + 1);
    std::map<int64_t, int64_t> s;
    for (size_t i = 0; i < C.size(); ++i) {
        const int64_t next = i + 1 < C.size() ? C[i + 1] : hn1;
        s[C[i]] = next - C[i] - hn;
        if (s[C[i]] < 0) fail(ErrorKind::Validation, "overlapping copies in column " + std::to_string(n + 1));
    }
    return s;
}

std::optional<InducedStep> induced_base(const CFParams& T, const CFPoint& x) {
    require_z(T);
    if (x.n != 0) fail(ErrorKind::Precondition, "induced base expects a point of X_0");
    CFPoint r = x;
    for (size_t k = 0; k < x.tail.size(); ++k) {
        const int stage = static_cast<int>(k) + 1;
        const auto C = sorted_c(T, stage);
        const int64_t c = x.tail[k][0];
        if (c == C.back()) {
            r.tail[k] = Element{C.front()};
            continue;
        }
        // Next copy position c⁺ and the spacer ceiling s_stage(c).
        const auto it = std::upper_bound(C.begin(), C.end(), c);
        r.tail[k] = Element{*it};
        const int64_t ceiling = spacers(T, stage - 1).at(c);
        return InducedStep{r, ceiling};
    }
    return std::nullopt;
}

std::optional<std::vector<Element>> x0_decompose(const CFParams& T, int m, const Element& f) {
    const GroupCtx& G = T.group();
    std::vector<Element> rev;
    Element cur = f;
    for (int k = m; k >= 1; --k) {
        bool found = false;
        for (const auto& c : T.C(k)) {
            const Element p = G.mul(cur, G.inv(c));
            if (T.F(k - 1).contains(p)) {
                rev.push_back(c);
                cur = p;
                found = true;
                break;
            }
        }
        if (!found) return std::nullopt;
    }
    if (!G.is_identity(cur)) return std::nullopt;
    std::reverse(rev.begin(), rev.end());
    return rev;
}

std::optional<ReturnResult> first_return_oracle(const CFParams& T, const CFPoint& x, int64_t step_cap) {
    const GroupCtx& G = T.group();
    const Element one = G.generators().front();
    CFPoint y = x;
    for (int64_t t = 1; t <= step_cap; ++t) {
        auto nx = act(T, one, y);
        if (!nx) return std::nullopt;
        y = *nx;
        if (auto dec = x0_decompose(T, y.n, y.f)) {
            CFPoint p;
            p.n = 0;
            p.f = G.identity();
            p.tail = *dec;
            p.tail.insert(p.tail.end(), y.tail.begin(), y.tail.end());
            return ReturnResult{p, t};
        }
    }
    return std::nullopt;
}

}  // namespace cf
