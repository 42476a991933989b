#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cfforge/catalog.hpp"
#include "cfforge/zstack.hpp"

namespace cf::io {

using json = nlohmann::json;

inline constexpr const char* kSchema = "cf-forge/1";

// Rationals travel as "p/q" strings (integers as "p").
json rat(const Rational& q);
Rational rat_in(const json& j);
std::vector<json> rats(const std::vector<Rational>& v);

// Elements: a bare integer in Z, otherwise an integer array; tree elements as their swap mask.
json elem(const GroupCtx& g, const Element& e);
Element elem_in(const GroupCtx& g, const json& j);
json elems(const GroupCtx& g, const std::vector<Element>& v, size_t limit = 256);
// Text form for flags: "5", "1,0,0" or "(1,0,0)".
Element parse_element(const GroupCtx& g, const std::string& s);
std::vector<Element> parse_elements(const GroupCtx& g, const std::string& s);  // whitespace/';' separated

json measure(const FinMeasure& m, size_t limit = 256);
FinMeasure measure_in(const GroupCtx& g, const json& j);

json verdict(const Verdict& v);
json point(const GroupCtx& g, const CFPoint& x);
CFPoint point_in(const GroupCtx& g, const json& j);

GroupCtx group_in(const json& j);
json group_out(const GroupCtx& g);
Subgroup subgroup_in(const GroupCtx& g, const json& j);
// Shorthand: "mod:4", "heis:2,4,4", "lattice:2,0;0,2", "stab:3", "whole", or a JSON object.
Subgroup parse_subgroup(const GroupCtx& g, const std::string& s);

// {"rule": name, "params": {...}} or {"explicit": {...}}.
CFParams params_in(const json& j);
// {"chain": name, ...} or {"explicit": {"group": ..., "subgroups": [...]}}.
OdometerSpec chain_in(const json& j);

json validation(const ValidationReport& r);
json factor_report(const FactorReport& r);
json layout(const ColumnLayout& L);

}  // namespace cf::io
