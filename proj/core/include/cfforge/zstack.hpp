#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfforge/cf.hpp"

namespace cf {

// Stage-n column: level i ∈ [0, h_n) occupies [lo[i], hi[i]) ⊂ [0, ν_n(F_n)).
struct ColumnLayout {
    int n = 0;
    int64_t h = 0;
    std::vector<Rational> lo, hi;
    Rational total;
    std::vector<std::pair<int64_t, int64_t>> copies;  // per c ∈ C_n ascending: level range [c, c + h_{n-1})
    std::vector<int64_t> spacer_levels;               // levels of F_n not covered by copies
};

// h_n for interval shapes F_n = [0, h_n); throws on non-interval data.
int64_t column_height(const CFParams& T, int n);
std::vector<ColumnLayout> columns(const CFParams& T, int N);
std::string columns_svg(const std::vector<ColumnLayout>& layouts);

// s_{n+1}(c) for c ∈ C_{n+1} ascending.
std::map<int64_t, int64_t> spacers(const CFParams& T, int n);

struct InducedStep {
    CFPoint rx;       // point of X_0
    int64_t ceiling;  // ϑ(x)
};
// Carry rule on X_0 = {(0; c_1, c_2, …)}; nullopt for the all-max prefix.
std::optional<InducedStep> induced_base(const CFParams& T, const CFPoint& x);

struct ReturnResult {
    CFPoint point;  // in X_0 form
    int64_t time = 0;
};
// Iterates act(1, ·) until the orbit is back in X_0; nullopt when the cap or tail depth runs out.
std::optional<ReturnResult> first_return_oracle(const CFParams& T, const CFPoint& x, int64_t step_cap);

// (c_1, …, c_m) with f = c_1 + … + c_m, or nullopt when f is a spacer-descended level.
std::optional<std::vector<Element>> x0_decompose(const CFParams& T, int m, const Element& f);

}  // namespace cf
