#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cfforge/cli.hpp"

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cf::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string golden(const std::string& name) { return slurp(std::string(CF_GOLDEN_DIR) + "/" + name); }

}  // namespace

TEST_CASE("golden reports") {
    const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
        {"validate_fgsw.json", {"validate", "--example", "fgsw", "--depth", "8"}},
        {"factor_sum_fgsw_mod4.json", {"factor-sum", "--example", "fgsw", "--subgroup", "mod:4", "--depth", "10"}},
        {"factor_scan_fgsw_mod3.json", {"factor-scan", "--example", "fgsw", "--subgroup", "mod:3", "--depth", "6"}},
        {"stack_fgsw_N2.json", {"stack", "--example", "fgsw", "-N", "2"}},
        {"example_show_s3.json", {"example", "show", "s3-two-factors"}},
        {"odometer_normal_cover_nonnormal.json", {"odometer", "normal-cover", "--chain", "heisenberg-nonnormal", "-N", "3"}},
        {"act_fgsw_seed7.json", {"act", "--example", "fgsw", "-g", "3", "--seed", "7", "--depth", "6"}},
    };
    for (const auto& [file, args] : cases) {
        CAPTURE(file);
        const auto r = cli(args);
        CHECK(r.code == 0);
        CHECK(r.out == golden(file));
    }
}

TEST_CASE("validate reports all-pass stage checks") {
    const auto r = cli({"validate", "--example", "fgsw", "--depth", "8"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["schema"] == "cf-forge/1");
    CHECK(j["result"]["validation"]["ok"] == true);
    for (const auto& s : j["result"]["validation"]["stages"]) {
        CHECK(s["inclusion"] == true);
        CHECK(s["disjoint"] == true);
        CHECK(s["measure"] == true);
    }
}

TEST_CASE("factor-sum terms") {
    const auto r = cli({"factor-sum", "--example", "fgsw", "--subgroup", "mod:4", "--depth", "10"});
    const auto t = nlohmann::json::parse(r.out)["result"]["verdict"]["terms"];
    CHECK(t == nlohmann::json({"1/2", "1/2", "0", "0", "0", "0", "0", "0", "0", "0"}));
}

TEST_CASE("exit codes") {
    CHECK(cli({"run", "missing.json"}).code == 1);
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"factor-sum", "--example", "fgsw", "--subgroup", "mod:x"}).code == 1);
    CHECK(cli({"validate", "--example", "nope"}).code == 1);
    CHECK(cli({"validate", "--example", "fgsw", "--depth", "99"}).code == 2);
    const std::string bad = "cf_cli_bad.json";
    std::ofstream(bad) << "{not json";
    CHECK(cli({"run", bad}).code == 1);
    std::remove(bad.c_str());
}

TEST_CASE("run dispatches a config and matches the direct call") {
    const std::string cfg = "cf_cli_cfg.json";
    std::ofstream(cfg) << R"({"command": "factor-sum", "example": "fgsw", "subgroup": "mod:4", "depth": 10})";
    const auto a = cli({"run", cfg});
    const auto b = cli({"factor-sum", "--example", "fgsw", "--subgroup", "mod:4", "--depth", "10"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    std::remove(cfg.c_str());
}

TEST_CASE("fixed seed gives byte-identical reports") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"act", "--example", "heisenberg-rank-one", "-g", "1,0,0", "--seed", "42", "--depth", "3"},
             {"odometer", "factor-map", "--example", "fgsw", "--chain", "z-product-odometer", "--samples", "5", "--seed", "3"}}) {
        const auto a = cli(args), b = cli(args);
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
    }
    CHECK(cli({"act", "--example", "fgsw", "--seed", "1"}).out != cli({"act", "--example", "fgsw", "--seed", "2"}).out);
}

TEST_CASE("json and svg outputs") {
    const std::string js = "cf_cli_layout.json", svg = "cf_cli_layout.svg";
    const auto r = cli({"stack", "--example", "fgsw", "-N", "3", "--svg", svg, "--json", js});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(js));
    CHECK(j["result"]["columns"].size() == 4);
    CHECK(j["result"]["columns"][1]["total"] == "3/2");
    const std::string s = slurp(svg);
    CHECK(s.find("data-stage=\"3\"") != std::string::npos);
    CHECK(s.find("data-lo=\"1/4\"") != std::string::npos);
    std::remove(js.c_str());
    std::remove(svg.c_str());
}

TEST_CASE("explicit params and chains") {
    const auto p = cli({"validate", "--params",
                        R"({"explicit": {"group": "integers", "C": [[0, 1]], "F": [[0], [0, 1]]}})", "--depth", "1"});
    CHECK(p.code == 0);
    const auto bad = cli({"validate", "--params",
                          R"({"explicit": {"group": "integers", "C": [[0, 1], [0, 1]], "F": [[0], [0, 1], [0, 1, 2]], "spacer_total": ["1", "1"]}})",
                          "--depth", "2"});
    CHECK(bad.code == 2);
    const auto c = cli({"odometer", "validate", "--chain",
                        R"({"explicit": {"group": "integers", "subgroups": [{"family": "modulus", "m": 3}, {"family": "modulus", "m": 9}]}})",
                        "--depth", "2"});
    CHECK(c.code == 0);
    const auto d = cli({"odometer", "validate", "--chain",
                        R"({"explicit": {"group": "integers", "subgroups": [{"family": "modulus", "m": 3}, {"family": "modulus", "m": 3}]}})",
                        "--depth", "2"});
    CHECK(d.code == 2);
}
